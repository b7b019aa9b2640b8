#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "phif/grid.hpp"

namespace phif {

/// Level-l cell: lattice points lo..hi inclusive per axis, hi - lo = 2^l m.
/// Points with coordinate 0 or n are ghosts (not DOFs).
struct CellBox {
  int level = 0;
  std::array<int, 3> index{0, 0, 0};
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};

  bool contains(const std::array<int, 3>& c, int dim) const;
};

enum class GroupKind { Interior, Face, Edge, Corner };

std::string_view to_string(GroupKind kind);

struct DofGroup {
  GroupKind kind = GroupKind::Interior;
  int level = 0;
  /// Ascending global DOF ids.
  std::vector<Index> indices;
  /// Lattice point with the smallest coordinates on the owning geometry.
  std::array<int, 3> origin{0, 0, 0};
  /// Bit d set when the geometry lies on a cell boundary plane normal to axis d.
  unsigned boundary_axes = 0;
};

struct LevelPartition {
  int level = 0;
  std::vector<DofGroup> interior;
  /// Edges in 2D, faces in 3D.
  std::vector<DofGroup> skeleton;
  /// Edges and corners in 2D, faces, edges and corners in 3D.
  std::vector<DofGroup> precondition;
};

/// Cells for every level 0..L, level l holding 2^{dim(L-l)} cells.
std::vector<std::vector<CellBox>> build_hierarchy(const GridSpec& spec);

/// Cell of `level` whose closure owns the lattice point, by floor division.
std::size_t cell_of(const GridSpec& spec, int level, const std::array<int, 3>& c);

GroupKind classify_point(const GridSpec& spec, int level, const std::array<int, 3>& c);

/// Groups the active DOFs entering `level` by geometry. `cells` must be the
/// level's cell list from build_hierarchy.
LevelPartition classify_active(const GridSpec& spec, int level, std::span<const Index> active,
                               std::span<const CellBox> cells);

/// CSV dump: dof_id,x,y[,z],group_kind,group_id. Group ids follow the
/// interior list, then the precondition list.
void write_partition_csv(std::ostream& out, const GridSpec& spec, const LevelPartition& part);

}  // namespace phif
