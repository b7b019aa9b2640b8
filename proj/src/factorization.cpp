#include "phif/factorization.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>

#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace phif {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Z-order of the lattice coordinates; keeps each cell's rows close in memory.
std::vector<Index> morton_order(const GridSpec& spec) {
  const Index count = spec.dof_count();
  std::vector<std::pair<std::uint64_t, Index>> keyed(count);
  for (Index i = 0; i < count; ++i) {
    const auto c = spec.coords(i);
    std::uint64_t key = 0;
    for (int bit = 0; bit < 20; ++bit)
      for (int d = 0; d < spec.dim; ++d)
        key |= static_cast<std::uint64_t>((c[d] >> bit) & 1) << (bit * spec.dim + d);
    keyed[i] = {key, i};
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<Index> order(count);
  for (Index i = 0; i < count; ++i) order[i] = keyed[i].second;
  return order;
}

Matrix symmetric_gram(const Matrix& X) {
  // X^T X with an exactly symmetric result
  Matrix S = Matrix::Zero(X.cols(), X.cols());
  S.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  return S.selfadjointView<Eigen::Lower>();
}

template <class Vec>
Vector gather(const Vector& x, const Vec& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Index>(k)] = x[idx[k]];
  return out;
}

template <class Vec>
void scatter(Vector& x, const Vec& idx, const Vector& v) {
  for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] = v[static_cast<Index>(k)];
}

// The four actions of one record on a global vector.
void record_forward(const FactorRecord& r, Vector& x) {
  const auto& Lf = r.L.factor;
  Vector xi = gather(x, r.primary);
  if (r.kind == Stage::Precondition) {
    Lf.triangularView<Eigen::Lower>().transpose().solveInPlace(xi);
    scatter(x, r.primary, xi);
    return;
  }
  Vector xb = gather(x, r.secondary);
  if (xb.size() > 0) xi.noalias() -= r.X * xb;
  Lf.triangularView<Eigen::Lower>().transpose().solveInPlace(xi);
  scatter(x, r.primary, xi);
  if (r.kind == Stage::Skeletonize && xb.size() > 0) {
    xb.noalias() -= r.T * xi;
    scatter(x, r.secondary, xb);
  }
}

void record_transpose(const FactorRecord& r, Vector& x) {
  const auto& Lf = r.L.factor;
  Vector xi = gather(x, r.primary);
  if (r.kind == Stage::Precondition) {
    Lf.triangularView<Eigen::Lower>().solveInPlace(xi);
    scatter(x, r.primary, xi);
    return;
  }
  Vector xb = gather(x, r.secondary);
  if (r.kind == Stage::Skeletonize && xb.size() > 0) xi.noalias() -= r.T.transpose() * xb;
  Lf.triangularView<Eigen::Lower>().solveInPlace(xi);
  if (xb.size() > 0) {
    xb.noalias() -= r.X.transpose() * xi;
    scatter(x, r.secondary, xb);
  }
  scatter(x, r.primary, xi);
}

void record_inverse(const FactorRecord& r, Vector& x) {
  const auto& Lf = r.L.factor;
  Vector xi = gather(x, r.primary);
  if (r.kind == Stage::Precondition) {
    xi = Lf.triangularView<Eigen::Lower>().transpose() * xi;
    scatter(x, r.primary, xi);
    return;
  }
  Vector xb = gather(x, r.secondary);
  if (r.kind == Stage::Skeletonize && xb.size() > 0) {
    xb.noalias() += r.T * xi;
    scatter(x, r.secondary, xb);
  }
  Vector y = Lf.triangularView<Eigen::Lower>().transpose() * xi;
  if (xb.size() > 0) y.noalias() += r.X * xb;
  scatter(x, r.primary, y);
}

void record_inverse_transpose(const FactorRecord& r, Vector& x) {
  const auto& Lf = r.L.factor;
  Vector xi = gather(x, r.primary);
  if (r.kind == Stage::Precondition) {
    xi = Lf.triangularView<Eigen::Lower>() * xi;
    scatter(x, r.primary, xi);
    return;
  }
  Vector xb = gather(x, r.secondary);
  if (xb.size() > 0) xb.noalias() += r.X.transpose() * xi;
  Vector y = Lf.triangularView<Eigen::Lower>() * xi;
  if (r.kind == Stage::Skeletonize && xb.size() > 0) y.noalias() += r.T.transpose() * xb;
  scatter(x, r.primary, y);
  if (xb.size() > 0) scatter(x, r.secondary, xb);
}

std::vector<Index> take(std::span<const Index> from, const std::vector<Index>& positions) {
  std::vector<Index> out;
  out.reserve(positions.size());
  for (Index p : positions) out.push_back(from[p]);
  return out;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::HIF: return "hif";
    case Method::PHIF: return "phif";
    case Method::Exact: return "exact";
  }
  return "?";
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Eliminate: return "eliminate";
    case Stage::Precondition: return "precondition";
    case Stage::Skeletonize: return "skeletonize";
    case Stage::Root: return "root";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "hif") return Method::HIF;
  if (name == "phif") return Method::PHIF;
  if (name == "exact") return Method::Exact;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::size_t FactorRecord::bytes() const {
  return sizeof(double) * static_cast<std::size_t>(L.factor.size() + X.size() + T.size()) +
         sizeof(Index) * (primary.size() + secondary.size());
}

StageNotSpd::StageNotSpd(Stage stage, std::size_t group, Index pivot)
    : NotSpdError(pivot, std::string(to_string(stage)) + " group " + std::to_string(group)),
      stage(stage),
      group(group) {}

FactorizationNotSpd::FactorizationNotSpd(NotSpdEvent ev, FactorStats partial)
    : NotSpdError(ev.pivot, "level " + std::to_string(ev.level) + ", " + std::string(to_string(ev.stage)) +
                                ", group " + std::to_string(ev.group)),
      event(ev),
      partial(std::move(partial)) {}

// ---------------------------------------------------------------------------
// stage kernels

std::vector<FactorRecord> eliminate_cells(ActiveMatrix& A, std::span<const DofGroup> groups, int level, Exec exec) {
  struct Work {
    std::vector<Index> boundary;
    LowerTriangular L;
    Matrix X;
    Matrix schur;
    std::optional<Index> failed_pivot;
  };
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(groups.size());
  std::vector<Work> work(groups.size());

  // Groups are uncoupled, so every group's blocks are final before any
  // Schur update lands; the updates are merged afterwards in group order.
  auto compute = [&](std::ptrdiff_t g) {
    Work& w = work[g];
    const auto& I = groups[g].indices;
    w.boundary = A.neighbors(I);
    try {
      w.L = cholesky(A.block(I, I));
    } catch (const NotSpdError& e) {
      w.failed_pivot = e.pivot;
      return;
    }
    w.X = tri_solve(w.L, A.block(I, w.boundary));
    w.schur = symmetric_gram(w.X);
  };
  std::vector<FactorRecord> records;
  records.reserve(groups.size());
  auto merge = [&](std::ptrdiff_t g) {
    Work& w = work[g];
    if (w.failed_pivot) throw StageNotSpd(Stage::Eliminate, g, *w.failed_pivot);
    A.add_block(w.boundary, w.boundary, -w.schur);
    A.remove(groups[g].indices);
    FactorRecord r;
    r.kind = Stage::Eliminate;
    r.level = level;
    r.primary = groups[g].indices;
    r.secondary = std::move(w.boundary);
    r.L = std::move(w.L);
    r.X = std::move(w.X);
    records.push_back(std::move(r));
    w = Work{};
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t g = 0; g < count; ++g) compute(g);
    for (std::ptrdiff_t g = 0; g < count; ++g) merge(g);
  } else {
    // same result; keeps one group's temporaries live at a time
    for (std::ptrdiff_t g = 0; g < count; ++g) {
      compute(g);
      merge(g);
    }
  }
  return records;
}

std::vector<FactorRecord> precondition_blocks(ActiveMatrix& A, std::span<const DofGroup> groups, int level,
                                              Exec exec) {
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(groups.size());
  std::vector<LowerTriangular> factors(groups.size());
  std::vector<std::optional<Index>> failed(groups.size());

  // A group's diagonal block is never touched by the other groups' scaling.
  auto compute = [&](std::ptrdiff_t g) {
    try {
      factors[g] = cholesky(A.block(groups[g].indices, groups[g].indices));
    } catch (const NotSpdError& e) {
      failed[g] = e.pivot;
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t g = 0; g < count; ++g) compute(g);
  } else {
    for (std::ptrdiff_t g = 0; g < count; ++g) compute(g);
  }

  std::vector<FactorRecord> records;
  records.reserve(groups.size());
  for (std::ptrdiff_t g = 0; g < count; ++g) {
    if (failed[g]) throw StageNotSpd(Stage::Precondition, g, *failed[g]);
    const auto& I = groups[g].indices;
    const std::vector<Index> nb = A.neighbors(I);
    const Matrix coupled = tri_solve(factors[g], A.block(I, nb));
    const Index k = static_cast<Index>(I.size());
    A.assign_block(I, I, Matrix::Identity(k, k));
    A.assign_block(I, nb, coupled);
    A.assign_block(nb, I, coupled.transpose());
    FactorRecord r;
    r.kind = Stage::Precondition;
    r.level = level;
    r.primary = I;
    r.L = std::move(factors[g]);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<FactorRecord> skeletonize_separators(ActiveMatrix& A, std::span<const DofGroup> groups, double eps,
                                                 int level, std::vector<Index>* ranks) {
  std::vector<FactorRecord> records;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& I = groups[g].indices;
    const std::vector<Index> outside = A.neighbors(I);
    IdResult id = interpolative_decomposition(A.block(I, outside).transpose(), eps);
    if (ranks) ranks->push_back(static_cast<Index>(id.skeleton.size()));
    if (id.redundant.empty()) continue;

    const std::vector<Index> red = take(I, id.redundant);
    const std::vector<Index> skel = take(I, id.skeleton);
    const Matrix& T = id.T;
    const Matrix Arr = A.block(red, red);
    const Matrix Asr = A.block(skel, red);
    const Matrix Ass = A.block(skel, skel);

    // zeroing update; the residual coupling to the outside is dropped
    Matrix Zsr = Asr - Ass * T;
    Matrix Zrr = Arr - T.transpose() * Asr - Asr.transpose() * T + T.transpose() * Ass * T;
    Zrr = 0.5 * (Zrr + Zrr.transpose()).eval();

    FactorRecord r;
    r.kind = Stage::Skeletonize;
    r.level = level;
    try {
      r.L = cholesky(Zrr);
    } catch (const NotSpdError& e) {
      throw StageNotSpd(Stage::Skeletonize, g, e.pivot);
    }
    r.X = tri_solve(r.L, Zsr.transpose());
    if (!skel.empty()) A.assign_block(skel, skel, Ass - symmetric_gram(r.X));
    A.remove(red);
    r.primary = red;
    r.secondary = skel;
    r.T = std::move(id.T);
    records.push_back(std::move(r));
  }
  return records;
}

bool groups_uncoupled(const ActiveMatrix& A, std::span<const DofGroup> groups) {
  std::vector<std::int64_t> owner(A.order(), -1);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (Index i : groups[g].indices) owner[i] = static_cast<std::int64_t>(g);
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (Index i : groups[g].indices)
      for (const auto& e : A.row(i))
        if (owner[e.col] >= 0 && owner[e.col] != static_cast<std::int64_t>(g) && e.value != 0.0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// factorization driver

Factorization assemble_factorization(Index order, std::vector<FactorRecord> records, const ActiveMatrix& state,
                                     FactorStats stats) {
  Factorization F;
  F.order_ = order;
  F.records_ = std::move(records);
  F.root_dofs_ = state.active_dofs();
  F.root_block_ = state.block(F.root_dofs_, F.root_dofs_);
  try {
    F.root_factor_ = cholesky(F.root_block_);
  } catch (const NotSpdError& e) {
    throw StageNotSpd(Stage::Root, 0, e.pivot);
  }
  std::size_t bytes = sizeof(double) * static_cast<std::size_t>(F.root_block_.size() + F.root_factor_.factor.size());
  for (const auto& r : F.records_) bytes += r.bytes();
  stats.memory_bytes = bytes;
  stats.root_size = F.root_dofs_.size();
  F.stats_ = std::move(stats);
  return F;
}

Factorization factorize(const SymSparseMatrix& A, const GridSpec& spec, const FactorOptions& opts) {
  if (A.order() != spec.dof_count()) throw ConfigError("matrix order does not match the grid");
  if (opts.method != Method::Exact && !(opts.eps > 0.0)) throw ConfigError("eps must be positive");
  const auto t_start = Clock::now();
  const double eps = opts.method == Method::Exact ? 0.0 : opts.eps;
  const bool precondition = opts.method == Method::PHIF;
  const auto cells = build_hierarchy(spec);

  FactorStats stats;
  stats.method = opts.method;
  stats.eps = eps;

  ActiveMatrix state(A, morton_order(spec));
  std::vector<FactorRecord> records;
  auto append = [&](std::vector<FactorRecord>&& more) {
    for (auto& r : more) records.push_back(std::move(r));
  };

  int level = 0;
  try {
    for (level = 0; level < spec.levels; ++level) {
      LevelStats ls;
      ls.level = level;
      ls.active = state.active_count();
      const LevelPartition part = classify_active(spec, level, state.active_dofs(), cells[level]);
      if (opts.level_observer) opts.level_observer(part);
      ls.interior_groups = part.interior.size();
      ls.skeleton_groups = part.skeleton.size();
      ls.precondition_groups = part.precondition.size();

      auto t0 = Clock::now();
      append(eliminate_cells(state, part.interior, level, opts.exec));
      ls.t_eliminate = seconds_since(t0);

      if (precondition) {
        t0 = Clock::now();
        append(precondition_blocks(state, part.precondition, level, opts.exec));
        ls.t_precondition = seconds_since(t0);
      }

      t0 = Clock::now();
      std::vector<Index> ranks;
      append(skeletonize_separators(state, part.skeleton, eps, level, &ranks));
      ls.t_skeletonize = seconds_since(t0);
      if (!ranks.empty()) {
        ls.rank_max = static_cast<std::size_t>(*std::max_element(ranks.begin(), ranks.end()));
        double sum = 0.0;
        for (Index r : ranks) sum += r;
        ls.rank_mean = sum / static_cast<double>(ranks.size());
      }
      ls.active_after = state.active_count();
      stats.levels.push_back(ls);
    }

    const auto t0 = Clock::now();
    Factorization F = assemble_factorization(A.order(), std::move(records), state, stats);
    F.stats_.t_root = seconds_since(t0);
    F.stats_.t_total = seconds_since(t_start);
    return F;
  } catch (const StageNotSpd& e) {
    NotSpdEvent ev{level, e.stage, e.group, e.pivot};
    stats.events.push_back(ev);
    stats.t_total = seconds_since(t_start);
    throw FactorizationNotSpd(ev, std::move(stats));
  }
}

void Factorization::check_length(const Vector& x) const {
  if (x.size() != order_) throw ConfigError("vector length does not match the factorization");
}

Vector Factorization::apply(const Vector& x) const {
  check_length(x);
  Vector y = x;
  for (const auto& r : records_) record_inverse(r, y);
  Vector root = gather(y, root_dofs_);
  scatter(y, root_dofs_, Vector(root_block_ * root));
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) record_inverse_transpose(*it, y);
  return y;
}

Vector Factorization::apply_inverse(const Vector& b) const {
  check_length(b);
  Vector y = b;
  for (const auto& r : records_) record_transpose(r, y);
  Vector root = gather(y, root_dofs_);
  const auto tri = root_factor_.factor.triangularView<Eigen::Lower>();
  tri.solveInPlace(root);
  tri.transpose().solveInPlace(root);
  scatter(y, root_dofs_, root);
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) record_forward(*it, y);
  return y;
}

Vector Factorization::apply_ginv(const Vector& x) const {
  check_length(x);
  Vector y = x;
  for (const auto& r : records_) record_transpose(r, y);
  Vector root = gather(y, root_dofs_);
  root_factor_.factor.triangularView<Eigen::Lower>().solveInPlace(root);
  scatter(y, root_dofs_, root);
  return y;
}

Vector Factorization::apply_ginv_t(const Vector& x) const {
  check_length(x);
  Vector y = x;
  Vector root = gather(y, root_dofs_);
  root_factor_.factor.triangularView<Eigen::Lower>().transpose().solveInPlace(root);
  scatter(y, root_dofs_, root);
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) record_forward(*it, y);
  return y;
}

double Factorization::root_condition(std::size_t max_size) const {
  if (root_dofs_.size() > max_size)
    throw ConfigError("root block too large for a dense condition number (|S_L| = " +
                      std::to_string(root_dofs_.size()) + ")");
  if (root_dofs_.empty()) return 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(root_block_, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  return ev.maxCoeff() / ev.minCoeff();
}

std::string FactorStats::to_json() const {
  nlohmann::json j;
  j["method"] = to_string(method);
  j["eps"] = eps;
  j["root_size"] = root_size;
  j["t_root"] = t_root;
  j["t_total"] = t_total;
  j["memory_bytes"] = memory_bytes;
  j["levels"] = nlohmann::json::array();
  for (const auto& l : levels) {
    j["levels"].push_back({{"level", l.level},
                           {"p", l.interior_groups},
                           {"q", l.skeleton_groups},
                           {"r", l.precondition_groups},
                           {"active", l.active},
                           {"active_after", l.active_after},
                           {"rank_max", l.rank_max},
                           {"rank_mean", l.rank_mean},
                           {"t_eliminate", l.t_eliminate},
                           {"t_precondition", l.t_precondition},
                           {"t_skeletonize", l.t_skeletonize}});
  }
  j["not_spd_events"] = nlohmann::json::array();
  for (const auto& e : events)
    j["not_spd_events"].push_back(
        {{"level", e.level}, {"stage", to_string(e.stage)}, {"group", e.group}, {"pivot", e.pivot}});
  return j.dump(2);
}

}  // namespace phif
