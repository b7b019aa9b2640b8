#include "phif/hierarchy.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <tuple>

namespace phif {

bool CellBox::contains(const std::array<int, 3>& c, int dim) const {
  for (int d = 0; d < dim; ++d)
    if (c[d] < lo[d] || c[d] > hi[d]) return false;
  return true;
}

std::string_view to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::Interior: return "interior";
    case GroupKind::Face: return "face";
    case GroupKind::Edge: return "edge";
    case GroupKind::Corner: return "corner";
  }
  return "?";
}

std::vector<std::vector<CellBox>> build_hierarchy(const GridSpec& spec) {
  std::vector<std::vector<CellBox>> levels(spec.levels + 1);
  for (int l = 0; l <= spec.levels; ++l) {
    const int per_axis = 1 << (spec.levels - l);
    const int size = spec.m << l;
    const int count = spec.dim == 2 ? per_axis * per_axis : per_axis * per_axis * per_axis;
    auto& cells = levels[l];
    cells.reserve(count);
    for (int k = 0; k < count; ++k) {
      CellBox box;
      box.level = l;
      int rest = k;
      for (int d = 0; d < spec.dim; ++d) {
        box.index[d] = rest % per_axis;
        rest /= per_axis;
        box.lo[d] = box.index[d] * size;
        box.hi[d] = box.lo[d] + size;
      }
      cells.push_back(box);
    }
  }
  return levels;
}

std::size_t cell_of(const GridSpec& spec, int level, const std::array<int, 3>& c) {
  const int per_axis = 1 << (spec.levels - level);
  const int size = spec.m << level;
  std::size_t id = 0;
  for (int d = spec.dim - 1; d >= 0; --d) {
    const int k = std::min(c[d] / size, per_axis - 1);
    id = id * per_axis + k;
  }
  return id;
}

GroupKind classify_point(const GridSpec& spec, int level, const std::array<int, 3>& c) {
  const int size = spec.m << level;
  int on = 0;
  for (int d = 0; d < spec.dim; ++d) {
    if (c[d] < 1 || c[d] >= spec.n) throw ConsistencyError("DOF coordinate outside the domain");
    on += c[d] % size == 0;
  }
  if (on == 0) return GroupKind::Interior;
  if (on == spec.dim) return GroupKind::Corner;
  if (spec.dim == 3 && on == 1) return GroupKind::Face;
  return GroupKind::Edge;
}

LevelPartition classify_active(const GridSpec& spec, int level, std::span<const Index> active,
                               std::span<const CellBox> cells) {
  const int size = spec.m << level;
  // (origin reversed so the slowest axis sorts first, kind, boundary axes)
  using Key = std::tuple<int, int, int, int, unsigned>;
  std::map<Key, DofGroup> groups;

  for (Index dof : active) {
    const auto c = spec.coords(dof);
    const GroupKind kind = classify_point(spec, level, c);
    const std::size_t cell = cell_of(spec, level, c);
    if (cell >= cells.size() || !cells[cell].contains(c, spec.dim))
      throw ConsistencyError("DOF not covered by the level's cells");

    std::array<int, 3> origin{0, 0, 0};
    unsigned axes = 0;
    for (int d = 0; d < spec.dim; ++d) {
      if (c[d] % size == 0) {
        origin[d] = c[d];
        axes |= 1u << d;
      } else {
        origin[d] = (c[d] / size) * size;
      }
    }
    Key key{origin[2], origin[1], origin[0], static_cast<int>(kind), axes};
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) {
      it->second.kind = kind;
      it->second.level = level;
      it->second.origin = origin;
      it->second.boundary_axes = axes;
    }
    it->second.indices.push_back(dof);
  }

  const GroupKind separator = spec.dim == 2 ? GroupKind::Edge : GroupKind::Face;
  LevelPartition part;
  part.level = level;
  for (auto& [key, g] : groups) {
    std::sort(g.indices.begin(), g.indices.end());
    if (g.kind == GroupKind::Interior) {
      part.interior.push_back(std::move(g));
      continue;
    }
    if (g.kind == separator) part.skeleton.push_back(g);
    part.precondition.push_back(std::move(g));
  }
  return part;
}

void write_partition_csv(std::ostream& out, const GridSpec& spec, const LevelPartition& part) {
  out << (spec.dim == 2 ? "dof_id,x,y,group_kind,group_id\n" : "dof_id,x,y,z,group_kind,group_id\n");
  std::size_t gid = 0;
  auto emit = [&](const std::vector<DofGroup>& list) {
    for (const DofGroup& g : list) {
      for (Index dof : g.indices) {
        const auto c = spec.coords(dof);
        out << dof;
        for (int d = 0; d < spec.dim; ++d) out << ',' << c[d];
        out << ',' << to_string(g.kind) << ',' << gid << '\n';
      }
      ++gid;
    }
  };
  emit(part.interior);
  emit(part.precondition);
}

}  // namespace phif
