#include "chsd/lsolve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <umfpack.h>

namespace chsd {

BlockLayout BlockLayout::from_sizes(const std::array<int, kFieldCount>& sizes) {
  BlockLayout l;
  l.size = sizes;
  int off = 0;
  for (int i = 0; i < kFieldCount; ++i) {
    l.offset[i] = off;
    off += sizes[i];
  }
  l.total = off;
  return l;
}

BlockLayout BlockLayout::from_spaces(const SpaceSet& spaces) {
  std::array<int, kFieldCount> s{};
  for (int i = 0; i < kFieldCount; ++i) s[i] = field_size(spaces, static_cast<Field>(i));
  return from_sizes(s);
}

BlockSystem compose(const BlockLayout& layout, const std::vector<BlockTerm>& terms,
                    const std::vector<int>& essential, bool essential_identity) {
  BlockSystem sys;
  sys.layout = layout;
  sys.essential = essential;
  std::sort(sys.essential.begin(), sys.essential.end());

  std::vector<char> is_ess(layout.total, 0);
  for (int e : sys.essential) {
    if (e < 0 || e >= layout.total)
      throw std::invalid_argument("compose: essential index out of range");
    is_ess[e] = 1;
  }

  std::size_t nnz = sys.essential.size();
  for (const auto& t : terms) {
    if (!t.block) throw std::invalid_argument("compose: null block");
    nnz += static_cast<std::size_t>(t.block->matrix.nonZeros());
  }

  Triplets trip;
  trip.reserve(nnz);
  for (const auto& t : terms) {
    const SparseBlock& b = *t.block;
    const int r0 = layout.offset_of(b.row), c0 = layout.offset_of(b.col);
    if (b.rows() != layout.size_of(b.row) || b.cols() != layout.size_of(b.col)) {
      std::ostringstream os;
      os << "compose: block (" << to_string(b.row) << ", " << to_string(b.col) << ") is "
         << b.rows() << "x" << b.cols() << ", layout expects " << layout.size_of(b.row) << "x"
         << layout.size_of(b.col);
      throw std::invalid_argument(os.str());
    }
    for (int i = 0; i < b.matrix.outerSize(); ++i)
      for (SparseMatrix::InnerIterator it(b.matrix, i); it; ++it) {
        const int r = r0 + static_cast<int>(it.row()), c = c0 + static_cast<int>(it.col());
        if (is_ess[r] || is_ess[c]) continue;
        trip.emplace_back(r, c, t.sign * it.value());
      }
  }
  if (essential_identity)
    for (int e : sys.essential) trip.emplace_back(e, e, 1.0);

  sys.matrix.resize(layout.total, layout.total);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.matrix.makeCompressed();
  sys.rhs = Vector::Zero(layout.total);
  return sys;
}

struct SparseLU::Impl {
  void* symbolic = nullptr;
  void* numeric = nullptr;
  std::vector<int> outer, inner;
  int n = 0;
  CscMatrix a;  // factored matrix, kept for solves

  ~Impl() { release(); }
  void release_numeric() {
    if (numeric) umfpack_di_free_numeric(&numeric);
    numeric = nullptr;
  }
  void release() {
    release_numeric();
    if (symbolic) umfpack_di_free_symbolic(&symbolic);
    symbolic = nullptr;
  }
};

SparseLU::SparseLU() : impl_(std::make_unique<Impl>()) {}
SparseLU::~SparseLU() = default;

void SparseLU::factorize(const CscMatrix& input) {
  if (input.rows() != input.cols()) throw SolverError("symbolic", "matrix is not square");
  Impl& s = *impl_;
  s.a = input;
  s.a.makeCompressed();
  const int n = static_cast<int>(s.a.rows());
  const int* Ap = s.a.outerIndexPtr();
  const int* Ai = s.a.innerIndexPtr();
  const int nnz = static_cast<int>(s.a.nonZeros());

  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  // Nested dissection keeps the fill of the coupled 2D system low; the
  // default AMD ordering produces an order of magnitude more flops here.
  control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;

  const bool same_pattern = s.symbolic && s.n == n &&
                            std::equal(Ap, Ap + n + 1, s.outer.begin(), s.outer.end()) &&
                            std::equal(Ai, Ai + nnz, s.inner.begin(), s.inner.end());
  s.release_numeric();
  if (!same_pattern) {
    s.release();
    const int status =
        umfpack_di_symbolic(n, n, Ap, Ai, s.a.valuePtr(), &s.symbolic, control, info);
    if (status != UMFPACK_OK) {
      s.symbolic = nullptr;
      std::ostringstream os;
      os << "UMFPACK symbolic analysis failed with status " << status;
      throw SolverError("symbolic", os.str());
    }
    s.n = n;
    s.outer.assign(Ap, Ap + n + 1);
    s.inner.assign(Ai, Ai + nnz);
    ++analyses_;
  }
  const int status =
      umfpack_di_numeric(Ap, Ai, s.a.valuePtr(), s.symbolic, &s.numeric, control, info);
  rcond_ = info[UMFPACK_RCOND];
  if (status == UMFPACK_WARNING_singular_matrix || (status == UMFPACK_OK && !(rcond_ >= kSingularRcond))) {
    s.release_numeric();
    std::ostringstream os;
    os << "matrix is numerically singular (pivot ratio " << rcond_ << ")";
    throw SolverError("numeric", os.str());
  }
  if (status != UMFPACK_OK) {
    s.release_numeric();
    std::ostringstream os;
    os << "UMFPACK numeric factorization failed with status " << status;
    throw SolverError("numeric", os.str());
  }
  ++factorizations_;
}

bool SparseLU::factorized() const { return impl_->numeric != nullptr; }
int SparseLU::size() const { return impl_->n; }

Vector SparseLU::solve(const Vector& b) const {
  const Impl& s = *impl_;
  if (!s.numeric) throw SolverError("solve", "no factorization available");
  if (b.size() != s.n) throw SolverError("solve", "right-hand side has the wrong length");
  Vector x(s.n);
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_di_defaults(control);
  control[UMFPACK_IRSTEP] = 0;
  const int status = umfpack_di_solve(UMFPACK_A, s.a.outerIndexPtr(), s.a.innerIndexPtr(),
                                      s.a.valuePtr(), x.data(), b.data(), s.numeric, control, info);
  if (status != UMFPACK_OK) {
    std::ostringstream os;
    os << "UMFPACK solve failed with status " << status;
    throw SolverError("solve", os.str());
  }
  return x;
}

namespace {

void fill_residual(const CscMatrix& a, const Vector& b, SolveResult& r) {
  const Vector res = a * r.x - b;
  const double bn = b.norm();
  r.relative_residual = bn > 0.0 ? res.norm() / bn : res.norm();
  r.residual_inf = res.lpNorm<Eigen::Infinity>();
  // Rounding floor of the residual evaluation: eps * (row nnz + 1) * (|A||x| + |b|).
  Vector scale = b.cwiseAbs();
  Vector nnz_row = Vector::Ones(a.rows());
  for (int c = 0; c < a.outerSize(); ++c)
    for (CscMatrix::InnerIterator it(a, c); it; ++it) {
      scale[it.row()] += std::abs(it.value() * r.x[c]);
      nnz_row[it.row()] += 1.0;
    }
  const double eps = std::numeric_limits<double>::epsilon();
  r.residual_bound = r.residual_inf + eps * scale.cwiseProduct(nnz_row).lpNorm<Eigen::Infinity>();
}

}  // namespace

SolveResult solve(const CscMatrix& a, const Vector& b, SparseLU* cache, const SolveOptions& options) {
  SparseLU local;
  SparseLU& lu = cache ? *cache : local;
  SolveResult r;

  if (options.reuse_factorization && lu.factorized() && lu.size() == a.rows()) {
    r.factorized = false;
    r.x = lu.solve(b);
    fill_residual(a, b, r);
    // A stale factorization solves a neighbouring system; its error is
    // proportional to the change in the matrix and can feed back through
    // time stepping even below the residual target, so refine at least once.
    double prev = r.relative_residual;
    while (std::isfinite(r.relative_residual) &&
           (r.refinement_steps == 0 || r.relative_residual > kResidualTarget) &&
           r.refinement_steps < options.max_reuse_steps) {
      r.x += lu.solve(b - a * r.x);
      ++r.refinement_steps;
      fill_residual(a, b, r);
      if (r.relative_residual <= kResidualTarget) continue;
      if (!(r.relative_residual < options.reuse_contraction * prev)) break;  // stalled: refactorize
      prev = r.relative_residual;
    }
    if (r.relative_residual <= kResidualTarget) return r;
    r = SolveResult{};
  }

  lu.factorize(a);
  r.x = lu.solve(b);
  if (!r.x.allFinite()) throw SolverError("solve", "non-finite solution");
  fill_residual(a, b, r);
  for (int k = 0; k < 2 && r.relative_residual > kResidualTarget; ++k) {
    r.x += lu.solve(b - a * r.x);
    ++r.refinement_steps;
    fill_residual(a, b, r);
  }
  r.degraded = r.relative_residual > kResidualTarget;
  return r;
}

SolveResult solve(const BlockSystem& system, SparseLU* cache, const SolveOptions& options) {
  Vector b = system.rhs;
  for (int e : system.essential) b[e] = 0.0;
  return solve(system.matrix, b, cache, options);
}

void write_matrix_market(const CscMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  out.precision(17);
  for (int c = 0; c < a.outerSize(); ++c)
    for (CscMatrix::InnerIterator it(a, c); it; ++it)
      out << it.row() + 1 << ' ' << c + 1 << ' ' << it.value() << '\n';
  if (!out) throw std::runtime_error("write_matrix_market: write failed for " + path);
}

}  // namespace chsd
