#include "sgq/hilbert.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "parallel.hpp"

namespace sgq {

namespace {

std::atomic<int> g_threads{0};

constexpr Config bit(int i) { return Config{1} << i; }

void check_site(const SpinBasis& b, int i) {
  if (i < 0 || i >= b.n_sites()) {
    throw Error("site index " + std::to_string(i) + " out of range for " +
                std::to_string(b.n_sites()) + " sites");
  }
}

}  // namespace

void set_num_threads(int n) { g_threads.store(std::max(1, n)); }

int num_threads() {
  const int n = g_threads.load();
  if (n > 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// SpinBasis

SpinBasis::SpinBasis(int n_sites, std::optional<double> sz) : n_sites_(n_sites), n_up_(-1) {
  if (n_sites < 1 || n_sites > 40) {
    throw Error("number of sites must lie in [1, 40], got " + std::to_string(n_sites));
  }
  if (sz) {
    const double up = *sz + 0.5 * n_sites;
    const double rounded = std::round(up);
    if (std::abs(up - rounded) > 1e-9 || rounded < 0 || rounded > n_sites) {
      throw Error("empty basis: S^z = " + std::to_string(*sz) + " is infeasible for " +
                  std::to_string(n_sites) + " spins");
    }
    n_up_ = static_cast<int>(rounded);
  }

  binom_.assign(static_cast<std::size_t>(n_sites) + 1,
                std::vector<std::uint64_t>(static_cast<std::size_t>(n_sites) + 2, 0));
  for (int n = 0; n <= n_sites; ++n) {
    binom_[n][0] = 1;
    for (int k = 1; k <= n; ++k) binom_[n][k] = binom_[n - 1][k - 1] + (k <= n - 1 ? binom_[n - 1][k] : 0);
  }

  if (n_up_ < 0) {
    if (n_sites > 30) throw Error("unrestricted basis limited to 30 sites");
    configs_.resize(std::size_t{1} << n_sites);
    std::iota(configs_.begin(), configs_.end(), Config{0});
    return;
  }
  const std::uint64_t dim = binom_[n_sites][n_up_];
  if (dim > (std::uint64_t{1} << 31)) throw Error("sector dimension too large");
  configs_.reserve(dim);
  if (n_up_ == 0) {
    configs_.push_back(0);
    return;
  }
  // Gosper's hack enumerates fixed-popcount integers in ascending order.
  Config c = bit(n_up_) - 1;
  const Config limit = bit(n_sites);
  while (c < limit) {
    configs_.push_back(c);
    const Config lo = c & (~c + 1);
    const Config r = c + lo;
    c = (((r ^ c) >> 2) / lo) | r;
  }
}

std::optional<double> SpinBasis::sector() const {
  if (n_up_ < 0) return std::nullopt;
  return n_up_ - 0.5 * n_sites_;
}

std::optional<std::size_t> SpinBasis::index_of(Config c) const {
  if (n_sites_ < 64 && (c >> n_sites_) != 0) return std::nullopt;
  if (n_up_ < 0) return static_cast<std::size_t>(c);
  if (std::popcount(c) != n_up_) return std::nullopt;
  // Combinatorial rank of c among fixed-popcount integers in ascending order.
  std::size_t rank = 0;
  int k = 1;
  while (c) {
    const int pos = std::countr_zero(c);
    rank += binom_[pos][k];
    c &= c - 1;
    ++k;
  }
  return rank;
}

BasisPtr build_basis(int n_sites, std::optional<double> sz) {
  return std::make_shared<const SpinBasis>(n_sites, sz);
}

// ---------------------------------------------------------------------------
// SparseOperator

SparseOperator::SparseOperator(BasisPtr in, BasisPtr out, std::vector<Triplet> entries,
                               bool hermitian)
    : in_(std::move(in)), out_(std::move(out)), hermitian_(hermitian) {
  if (!in_ || !out_) throw Error("operator needs input and output bases");
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(out_->dim() + 1, 0);
  col_.reserve(entries.size());
  values_.reserve(entries.size());
  std::size_t k = 0;
  while (k < entries.size()) {
    const std::size_t r = entries[k].row, c = entries[k].col;
    if (r >= out_->dim() || c >= in_->dim()) throw Error("operator entry out of range");
    cplx v = 0;
    while (k < entries.size() && entries[k].row == r && entries[k].col == c) v += entries[k++].value;
    if (v != cplx(0)) {
      col_.push_back(c);
      values_.push_back(v);
      ++row_ptr_[r + 1];
    }
  }
  std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
  if (hermitian_) {
    if (!(*in_ == *out_)) throw Error("Hermitian operator must map a basis to itself");
    if (hermiticity_error() > 1e-12) throw Error("operator flagged Hermitian is not");
  }
}

SparseOperator SparseOperator::zero(BasisPtr b) { return SparseOperator(b, b, {}, true); }

SparseOperator SparseOperator::identity(BasisPtr b) {
  std::vector<Triplet> t;
  t.reserve(b->dim());
  for (std::size_t i = 0; i < b->dim(); ++i) t.push_back({i, i, 1.0});
  return SparseOperator(b, b, std::move(t), true);
}

SparseOperator SparseOperator::diagonal(BasisPtr b, std::span<const cplx> d) {
  if (d.size() != b->dim()) throw Error("diagonal length does not match basis");
  std::vector<Triplet> t;
  t.reserve(d.size());
  bool real = true;
  for (std::size_t i = 0; i < d.size(); ++i) {
    t.push_back({i, i, d[i]});
    real = real && d[i].imag() == 0.0;
  }
  return SparseOperator(b, b, std::move(t), real);
}

SparseOperator SparseOperator::from_csr(BasisPtr in, BasisPtr out, std::vector<std::size_t> row_ptr,
                                        std::vector<std::size_t> col, std::vector<cplx> values, bool hermitian) {
  if (!in || !out) throw Error("operator needs input and output bases");
  if (row_ptr.size() != out->dim() + 1 || col.size() != values.size() || row_ptr.back() != col.size())
    throw Error("inconsistent CSR arrays");
  SparseOperator op;
  op.in_ = std::move(in);
  op.out_ = std::move(out);
  op.row_ptr_ = std::move(row_ptr);
  op.col_ = std::move(col);
  op.values_ = std::move(values);
  op.hermitian_ = hermitian;
  return op;
}

SparseOperator SparseOperator::as_hermitian(double tol) const {
  if (!(*in_ == *out_)) throw Error("Hermitian operator must map a basis to itself");
  if (hermiticity_error() > tol) throw Error("operator is not Hermitian");
  SparseOperator op = *this;
  op.hermitian_ = true;
  return op;
}

std::vector<Triplet> SparseOperator::triplets() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.push_back({r, col_[k], values_[k]});
  return t;
}

Mat SparseOperator::to_dense() const {
  Mat m = Mat::Zero(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  for (const auto& t : triplets())
    m(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) = t.value;
  return m;
}

double SparseOperator::hermiticity_error() const {
  if (rows() != cols()) return std::numeric_limits<double>::infinity();
  auto lookup = [this](std::size_t r, std::size_t c) -> cplx {
    auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return 0;
    return values_[static_cast<std::size_t>(it - col_.begin())];
  };
  double err = 0;
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      err = std::max(err, std::abs(values_[k] - std::conj(lookup(col_[k], r))));
  return err;
}

double SparseOperator::norm_bound() const {
  double best = 0;
  for (std::size_t r = 0; r < rows(); ++r) {
    double s = 0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += std::abs(values_[k]);
    best = std::max(best, s);
  }
  return best;
}

bool SparseOperator::is_diagonal() const {
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      if (col_[k] != r) return false;
  return true;
}

SparseOperator SparseOperator::adjoint() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (const auto& e : triplets()) t.push_back({e.col, e.row, std::conj(e.value)});
  SparseOperator out(out_, in_, std::move(t), false);
  out.hermitian_ = hermitian_;
  return out;
}

SparseOperator SparseOperator::scaled(cplx s) const {
  SparseOperator out = *this;
  for (auto& v : out.values_) v *= s;
  out.hermitian_ = hermitian_ && s.imag() == 0.0;
  if (s == cplx(0)) return SparseOperator(in_, out_, {}, hermitian_);
  return out;
}

void SparseOperator::multiply(const Vec& x, Vec& y) const {
  if (static_cast<std::size_t>(x.size()) != cols()) throw Error("operator/vector dimension mismatch");
  y.resize(static_cast<Eigen::Index>(rows()));
  const cplx* xd = x.data();
  cplx* yd = y.data();
  detail::parallel_for(rows(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      cplx acc = 0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * xd[col_[k]];
      yd[r] = acc;
    }
  });
}

namespace {

void require_same(const SparseOperator& a, const SparseOperator& b) {
  if (!(*a.basis_in() == *b.basis_in()) || !(*a.basis_out() == *b.basis_out()))
    throw Error("operator bases do not match");
}

}  // namespace

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  require_same(a, b);
  auto t = a.triplets();
  auto tb = b.triplets();
  t.insert(t.end(), tb.begin(), tb.end());
  SparseOperator out(a.in_, a.out_, std::move(t), false);
  out.hermitian_ = a.hermitian_ && b.hermitian_;
  return out;
}

SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) { return a + b.scaled(-1.0); }

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  if (!(*a.basis_in() == *b.basis_out())) throw Error("operator product: basis mismatch");
  std::vector<Triplet> t;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = a.row_ptr_[r]; k < a.row_ptr_[r + 1]; ++k) {
      const std::size_t mid = a.col_[k];
      for (std::size_t q = b.row_ptr_[mid]; q < b.row_ptr_[mid + 1]; ++q)
        t.push_back({r, b.col_[q], a.values_[k] * b.values_[q]});
    }
  return SparseOperator(b.in_, a.out_, std::move(t), false);
}

SparseOperator linear_combination(std::span<const SparseOperator> ops, std::span<const double> coeffs) {
  if (ops.empty()) throw Error("linear combination of no operators");
  if (ops.size() != coeffs.size()) throw Error("coefficient count does not match operators");
  std::vector<Triplet> t;
  bool herm = true;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    require_same(ops[0], ops[k]);
    herm = herm && ops[k].hermitian();
    if (coeffs[k] == 0.0) continue;
    for (const auto& e : ops[k].triplets()) t.push_back({e.row, e.col, coeffs[k] * e.value});
  }
  SparseOperator out(ops[0].basis_in(), ops[0].basis_out(), std::move(t), false);
  if (herm) out = SparseOperator(ops[0].basis_in(), ops[0].basis_out(), out.triplets(), true);
  return out;
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(BasisPtr b, Vec amplitudes) : basis_(std::move(b)), amp_(std::move(amplitudes)) {
  if (!basis_) throw Error("state needs a basis");
  if (static_cast<std::size_t>(amp_.size()) != basis_->dim()) throw Error("amplitude count does not match basis");
}

StateVector StateVector::zero(BasisPtr b) {
  const auto n = static_cast<Eigen::Index>(b->dim());
  return StateVector(std::move(b), Vec::Zero(n));
}

StateVector StateVector::basis_state(BasisPtr b, Config c) {
  auto idx = b->index_of(c);
  if (!idx) throw Error("configuration outside basis");
  StateVector s = zero(std::move(b));
  s.amp_[static_cast<Eigen::Index>(*idx)] = 1.0;
  return s;
}

StateVector StateVector::random(BasisPtr b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Vec v(static_cast<Eigen::Index>(b->dim()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v[i] = cplx(re, im);
  }
  v.normalize();
  return StateVector(std::move(b), std::move(v));
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (!(n > 0) || !std::isfinite(n)) throw Error("cannot normalize a zero or non-finite state");
  return StateVector(basis_, amp_ / n);
}

cplx inner(const StateVector& a, const StateVector& b) {
  if (!(*a.basis() == *b.basis())) throw Error("inner product: basis mismatch");
  return a.amplitudes().dot(b.amplitudes());
}

double fidelity(const StateVector& a, const StateVector& b) { return std::norm(inner(a, b)); }

StateVector apply(const SparseOperator& op, const StateVector& psi) {
  if (!(*op.basis_in() == *psi.basis())) throw Error("apply: basis mismatch");
  Vec y;
  op.multiply(psi.amplitudes(), y);
  return StateVector(op.basis_out(), std::move(y));
}

cplx expectation(const SparseOperator& op, const StateVector& psi) { return inner(psi, apply(op, psi)); }

// ---------------------------------------------------------------------------
// Building blocks

SparseOperator zz_bond(const BasisPtr& b, int i, int j) {
  check_site(*b, i);
  check_site(*b, j);
  std::vector<Triplet> t;
  t.reserve(b->dim());
  for (std::size_t k = 0; k < b->dim(); ++k) {
    const Config c = b->config_of(k);
    const bool same = ((c >> i) & 1) == ((c >> j) & 1);
    t.push_back({k, k, same ? 0.25 : -0.25});
  }
  return SparseOperator(b, b, std::move(t), true);
}

SparseOperator hop_bond(const BasisPtr& b, int i, int j) {
  check_site(*b, i);
  check_site(*b, j);
  if (i == j) throw Error("hop_bond needs two distinct sites");
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < b->dim(); ++k) {
    const Config c = b->config_of(k);
    if (((c >> i) & 1) == 0 && ((c >> j) & 1) == 1) {
      const Config d = c ^ (bit(i) | bit(j));
      t.push_back({*b->index_of(d), k, 1.0});
    }
  }
  return SparseOperator(b, b, std::move(t), false);
}

SparseOperator exchange_bond(const BasisPtr& b, int i, int j) {
  check_site(*b, i);
  check_site(*b, j);
  if (i == j) throw Error("exchange bond needs two distinct sites");
  std::vector<Triplet> t;
  t.reserve(2 * b->dim());
  for (std::size_t k = 0; k < b->dim(); ++k) {
    const Config c = b->config_of(k);
    const bool si = (c >> i) & 1, sj = (c >> j) & 1;
    if (si == sj) {
      t.push_back({k, k, 0.25});
    } else {
      t.push_back({k, k, -0.25});
      t.push_back({*b->index_of(c ^ (bit(i) | bit(j))), k, 0.5});
    }
  }
  return SparseOperator(b, b, std::move(t), true);
}

SparseOperator sz_site(const BasisPtr& b, int i) {
  check_site(*b, i);
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < b->dim(); ++k) t.push_back({k, k, ((b->config_of(k) >> i) & 1) ? 0.5 : -0.5});
  return SparseOperator(b, b, std::move(t), true);
}

SparseOperator sz_total(const BasisPtr& b) {
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < b->dim(); ++k)
    t.push_back({k, k, std::popcount(b->config_of(k)) - 0.5 * b->n_sites()});
  return SparseOperator(b, b, std::move(t), true);
}

SparseOperator pauli_x(const BasisPtr& b, int i) {
  check_site(*b, i);
  if (b->has_sector()) throw Error("Pauli X leaves a fixed-S^z sector");
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < b->dim(); ++k) t.push_back({*b->index_of(b->config_of(k) ^ bit(i)), k, 1.0});
  return SparseOperator(b, b, std::move(t), true);
}

SparseOperator pauli_z(const BasisPtr& b, int i) { return sz_site(b, i).scaled(2.0); }

SparseOperator pauli_zz(const BasisPtr& b, int i, int j) { return zz_bond(b, i, j).scaled(4.0); }

SparseOperator spin_flip(const BasisPtr& b) {
  BasisPtr out = b;
  if (b->has_sector()) out = build_basis(b->n_sites(), -*b->sector());
  const Config mask = bit(b->n_sites()) - 1;
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < b->dim(); ++k) t.push_back({*out->index_of(~b->config_of(k) & mask), k, 1.0});
  return SparseOperator(b, out, std::move(t), *out == *b);
}

SparseOperator permutation_operator(const BasisPtr& b, std::span<const int> perm) {
  const int n = b->n_sites();
  if (static_cast<int>(perm.size()) != n) throw Error("permutation length does not match site count");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)]) throw Error("site map is not a bijection");
    seen[static_cast<std::size_t>(p)] = 1;
  }
  std::vector<Triplet> t;
  t.reserve(b->dim());
  for (std::size_t k = 0; k < b->dim(); ++k) {
    const Config c = b->config_of(k);
    Config d = 0;
    for (int s = 0; s < n; ++s)
      if ((c >> s) & 1) d |= bit(perm[static_cast<std::size_t>(s)]);
    t.push_back({*b->index_of(d), k, 1.0});
  }
  return SparseOperator(b, b, std::move(t), false);
}

std::vector<int> compose_perm(std::span<const int> outer, std::span<const int> inner) {
  if (outer.size() != inner.size()) throw Error("permutation sizes differ");
  std::vector<int> r(inner.size());
  for (std::size_t s = 0; s < inner.size(); ++s) r[s] = outer[static_cast<std::size_t>(inner[s])];
  return r;
}

std::vector<int> cyclic_shift_perm(int n_sites, const std::vector<std::vector<int>>& cycles, int k) {
  std::vector<int> p(static_cast<std::size_t>(n_sites));
  std::iota(p.begin(), p.end(), 0);
  for (const auto& cyc : cycles) {
    const int len = static_cast<int>(cyc.size());
    if (len == 0) continue;
    for (int a = 0; a < len; ++a) {
      const int to = ((a + k) % len + len) % len;
      p.at(static_cast<std::size_t>(cyc[static_cast<std::size_t>(a)])) = cyc[static_cast<std::size_t>(to)];
    }
  }
  return p;
}

}  // namespace sgq
