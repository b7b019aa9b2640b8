#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phif/active_matrix.hpp"
#include "phif/dense.hpp"
#include "phif/grid.hpp"
#include "phif/hierarchy.hpp"
#include "phif/sparse.hpp"

namespace phif {

enum class Method { HIF, PHIF, Exact };
enum class Stage { Eliminate, Precondition, Skeletonize, Root };

std::string_view to_string(Method m);
std::string_view to_string(Stage s);
Method parse_method(std::string_view name);

/// One stored operator of the multilevel factorization.
///
///  Eliminate:    primary = I, secondary = B, L = chol(A_II), X = L^{-1} A_BI^T
///  Precondition: primary = I, L = chol(A_II)
///  Skeletonize:  primary = redundant, secondary = skeleton, T the
///                interpolation matrix, L = chol of the zeroed redundant
///                block, X = L^{-1} (zeroed skeleton-redundant block)^T
struct FactorRecord {
  Stage kind = Stage::Eliminate;
  int level = 0;
  std::vector<Index> primary;
  std::vector<Index> secondary;
  LowerTriangular L;
  Matrix X;
  Matrix T;

  std::size_t bytes() const;
};

struct NotSpdEvent {
  int level = 0;
  Stage stage = Stage::Eliminate;
  std::size_t group = 0;
  Index pivot = 0;
};

struct LevelStats {
  int level = 0;
  std::size_t interior_groups = 0;      // p
  std::size_t skeleton_groups = 0;      // q
  std::size_t precondition_groups = 0;  // r
  std::size_t active = 0;               // |S_l| entering the level
  std::size_t active_after = 0;         // |S_{l+1}|
  std::size_t rank_max = 0;
  double rank_mean = 0.0;
  double t_eliminate = 0.0;
  double t_precondition = 0.0;
  double t_skeletonize = 0.0;
};

struct FactorStats {
  Method method = Method::HIF;
  double eps = 0.0;
  std::vector<LevelStats> levels;
  std::size_t root_size = 0;
  double t_root = 0.0;
  double t_total = 0.0;
  std::size_t memory_bytes = 0;
  std::vector<NotSpdEvent> events;

  std::string to_json() const;
};

/// Cholesky breakdown inside a factorization stage.
class FactorizationNotSpd : public NotSpdError {
 public:
  FactorizationNotSpd(NotSpdEvent event, FactorStats partial);
  NotSpdEvent event;
  FactorStats partial;
};

/// Thrown by stage kernels; factorize() adds the level.
class StageNotSpd : public NotSpdError {
 public:
  StageNotSpd(Stage stage, std::size_t group, Index pivot);
  Stage stage;
  std::size_t group;
};

// Stage kernels. Each mutates the live matrix and returns the operators it
// applied. `level` is only stamped into the records.

/// Block elimination of mutually uncoupled interior groups.
std::vector<FactorRecord> eliminate_cells(ActiveMatrix& A, std::span<const DofGroup> groups, int level = 0,
                                          Exec exec = Exec::Serial);

/// Block Jacobi rescaling: every group's diagonal block becomes the identity.
std::vector<FactorRecord> precondition_blocks(ActiveMatrix& A, std::span<const DofGroup> groups, int level = 0,
                                              Exec exec = Exec::Serial);

/// Sequential skeletonization. `ranks`, when given, receives the skeleton
/// count of every group.
std::vector<FactorRecord> skeletonize_separators(ActiveMatrix& A, std::span<const DofGroup> groups, double eps,
                                                 int level = 0, std::vector<Index>* ranks = nullptr);

/// True when no two groups share a nonzero coupling in the live matrix.
bool groups_uncoupled(const ActiveMatrix& A, std::span<const DofGroup> groups);

struct FactorOptions {
  Method method = Method::PHIF;
  double eps = 1e-6;
  Exec exec = Exec::Serial;
  /// Called with every level partition before its elimination stage.
  std::function<void(const LevelPartition&)> level_observer;
};

/// Generalized Cholesky factorization F = G G^T of a grid operator.
class Factorization {
 public:
  Factorization() = default;

  Index order() const { return order_; }
  Method method() const { return stats_.method; }
  double eps() const { return stats_.eps; }
  const FactorStats& stats() const { return stats_; }
  const std::vector<FactorRecord>& records() const { return records_; }
  std::span<const Index> root_dofs() const { return root_dofs_; }
  const Matrix& root_block() const { return root_block_; }

  /// F x
  Vector apply(const Vector& x) const;
  /// F^{-1} b
  Vector apply_inverse(const Vector& b) const;
  /// G^{-1} x
  Vector apply_ginv(const Vector& x) const;
  /// G^{-T} x
  Vector apply_ginv_t(const Vector& x) const;

  /// Dense condition number of the root block. Refuses above `max_size`.
  double root_condition(std::size_t max_size = 5000) const;
  std::size_t memory_bytes() const { return stats_.memory_bytes; }

 private:
  friend Factorization factorize(const SymSparseMatrix&, const GridSpec&, const FactorOptions&);
  friend Factorization assemble_factorization(Index, std::vector<FactorRecord>, const ActiveMatrix&, FactorStats);

  void check_length(const Vector& x) const;

  Index order_ = 0;
  std::vector<FactorRecord> records_;
  std::vector<Index> root_dofs_;
  Matrix root_block_;
  LowerTriangular root_factor_;
  FactorStats stats_;
};

/// Multilevel HIF/PHIF over the grid hierarchy. Exact uses eps = 0 and no
/// preconditioning. Throws FactorizationNotSpd.
Factorization factorize(const SymSparseMatrix& A, const GridSpec& spec, const FactorOptions& opts);

/// Closes a hand-driven sequence of stages: Cholesky of whatever is still
/// active in `state` becomes the root. Throws StageNotSpd with Stage::Root.
Factorization assemble_factorization(Index order, std::vector<FactorRecord> records, const ActiveMatrix& state,
                                     FactorStats stats = {});

}  // namespace phif
