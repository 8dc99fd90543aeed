#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "chsd/forms.hpp"

namespace chsd {

using CscMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Field sizes and offsets of the global system. Order: u_c, P_c, P_m,
/// mean multiplier, phi, mu (keeps the Stokes saddle block contiguous).
struct BlockLayout {
  std::array<int, kFieldCount> size{};
  std::array<int, kFieldCount> offset{};
  int total = 0;

  static BlockLayout from_sizes(const std::array<int, kFieldCount>& sizes);
  static BlockLayout from_spaces(const SpaceSet& spaces);

  int offset_of(Field f) const { return offset[static_cast<int>(f)]; }
  int size_of(Field f) const { return size[static_cast<int>(f)]; }
};

struct BlockTerm {
  const SparseBlock* block = nullptr;
  double sign = 1.0;
};

struct BlockSystem {
  BlockLayout layout;
  CscMatrix matrix;
  Vector rhs;
  Vector solution;
  /// Global indices reduced to identity rows with zero right-hand side.
  std::vector<int> essential;

  auto rhs_segment(Field f) { return rhs.segment(layout.offset_of(f), layout.size_of(f)); }
  auto solution_segment(Field f) const {
    return solution.segment(layout.offset_of(f), layout.size_of(f));
  }
};

/// Scatters the blocks into one global matrix; duplicate entries are summed.
/// Rows and columns listed in `essential` (global indices) are replaced by
/// identity rows (left empty when `essential_identity` is false, for partial
/// systems that are summed later). Throws std::invalid_argument on dimension mismatch.
BlockSystem compose(const BlockLayout& layout, const std::vector<BlockTerm>& terms,
                    const std::vector<int>& essential = {}, bool essential_identity = true);

class SolverError : public std::runtime_error {
 public:
  SolverError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Direct sparse LU backed by UMFPACK. The symbolic analysis is reused while
/// the sparsity pattern stays the same. Not reentrant: use one per thread.
class SparseLU {
 public:
  SparseLU();
  ~SparseLU();
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;

  /// Throws SolverError naming the stage ("symbolic", "numeric") on failure,
  /// including numerically singular matrices.
  void factorize(const CscMatrix& a);
  Vector solve(const Vector& b) const;
  bool factorized() const;
  int size() const;

  double rcond() const { return rcond_; }
  int symbolic_analyses() const { return analyses_; }
  int numeric_factorizations() const { return factorizations_; }

  /// Reciprocal pivot ratio below which a factorization is treated as singular.
  static constexpr double kSingularRcond = 1e-14;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double rcond_ = 0.0;
  int analyses_ = 0;
  int factorizations_ = 0;
};

struct SolveResult {
  Vector x;
  /// ||A x - b||_2 / ||b||_2 (or ||A x - b||_2 when b == 0).
  double relative_residual = 0.0;
  /// max_i |(A x - b)_i|.
  double residual_inf = 0.0;
  /// Certified absolute residual bound: residual_inf plus the rounding floor
  /// of evaluating A x - b in double precision.
  double residual_bound = 0.0;
  int refinement_steps = 0;
  /// False when the solve was served by refining against an earlier factorization.
  bool factorized = true;
  /// True when the relative residual stays above kResidualTarget.
  bool degraded = false;
};

constexpr double kResidualTarget = 1e-11;

struct SolveOptions {
  /// Start from the factorization already held by the cache (typically of a
  /// nearby matrix, e.g. the previous Picard iterate) and converge by
  /// iterative refinement against the new matrix. Falls back to a fresh
  /// factorization when refinement stalls.
  bool reuse_factorization = false;
  int max_reuse_steps = 25;
  /// Refinement counts as stalled when one step reduces the residual by less
  /// than this factor. A back-substitution costs a small fraction of a
  /// factorization, so slow but steady refinement is still worth it.
  double reuse_contraction = 0.5;
};

/// Factorizes and solves, applying up to two steps of iterative refinement.
/// A `cache` keeps the symbolic analysis across calls with the same pattern.
SolveResult solve(const BlockSystem& system, SparseLU* cache = nullptr, const SolveOptions& options = {});
SolveResult solve(const CscMatrix& a, const Vector& b, SparseLU* cache = nullptr,
                  const SolveOptions& options = {});

/// MatrixMarket coordinate (real general, 1-based) dump for offline debugging.
void write_matrix_market(const CscMatrix& a, const std::string& path);

}  // namespace chsd
