#pragma once

// Spin-1/2 configuration bases, sparse operators and state vectors.
//
// Configurations are bitstrings with site 0 as the least-significant bit and
// an up spin stored as 1. Bases list their configurations in ascending
// integer order, optionally restricted to a fixed total S^z.

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sgq {

using cplx = std::complex<double>;
using Config = std::uint64_t;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation that ran but failed to reach its accuracy target.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Worker count used by parallel kernels (apply, phase scans). Results never
/// depend on this value.
void set_num_threads(int n);
int num_threads();

class SpinBasis {
 public:
  /// Full 2^n basis, or the fixed-S^z sector when `sz` is given.
  /// Throws sgq::Error for an infeasible sector.
  SpinBasis(int n_sites, std::optional<double> sz = std::nullopt);

  int n_sites() const { return n_sites_; }
  std::optional<double> sector() const;
  std::size_t dim() const { return configs_.size(); }
  bool has_sector() const { return n_up_ >= 0; }
  int n_up() const { return n_up_; }

  Config config_of(std::size_t i) const { return configs_[i]; }
  /// Index of `c`, or nullopt when `c` lies outside the basis.
  std::optional<std::size_t> index_of(Config c) const;
  std::span<const Config> configs() const { return configs_; }

  bool operator==(const SpinBasis& o) const {
    return n_sites_ == o.n_sites_ && n_up_ == o.n_up_;
  }

 private:
  int n_sites_;
  int n_up_;  // -1 when unrestricted
  std::vector<Config> configs_;
  std::vector<std::vector<std::uint64_t>> binom_;
};

using BasisPtr = std::shared_ptr<const SpinBasis>;

BasisPtr build_basis(int n_sites, std::optional<double> sz = std::nullopt);

struct Triplet {
  std::size_t row;
  std::size_t col;
  cplx value;
};

/// Compressed-row complex matrix between two spin bases. Entries are kept
/// sorted row-major with duplicates merged and exact zeros dropped.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(BasisPtr in, BasisPtr out, std::vector<Triplet> entries,
                 bool hermitian = false);
  static SparseOperator zero(BasisPtr b);
  static SparseOperator identity(BasisPtr b);
  static SparseOperator diagonal(BasisPtr b, std::span<const cplx> d);
  /// Adopts already-canonical CSR arrays (sorted columns, no duplicates).
  static SparseOperator from_csr(BasisPtr in, BasisPtr out, std::vector<std::size_t> row_ptr,
                                 std::vector<std::size_t> col, std::vector<cplx> values, bool hermitian);

  const BasisPtr& basis_in() const { return in_; }
  const BasisPtr& basis_out() const { return out_; }
  std::size_t rows() const { return out_ ? out_->dim() : 0; }
  std::size_t cols() const { return in_ ? in_->dim() : 0; }
  std::size_t nnz() const { return values_.size(); }
  bool hermitian() const { return hermitian_; }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_idx() const { return col_; }
  std::span<const cplx> values() const { return values_; }

  std::vector<Triplet> triplets() const;
  Mat to_dense() const;
  /// Largest |A_ij - conj(A_ji)|.
  double hermiticity_error() const;
  /// Upper bound on the spectral norm (max absolute row sum).
  double norm_bound() const;
  bool is_diagonal() const;

  SparseOperator adjoint() const;
  SparseOperator scaled(cplx s) const;
  /// Copy flagged Hermitian; throws if the entries are not.
  SparseOperator as_hermitian(double tol = 1e-12) const;

  /// y = A x with a fixed per-row summation order.
  void multiply(const Vec& x, Vec& y) const;

  friend SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);
  friend SparseOperator operator-(const SparseOperator& a, const SparseOperator& b);
  friend SparseOperator operator*(cplx s, const SparseOperator& a) { return a.scaled(s); }
  friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);

 private:
  BasisPtr in_, out_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_;
  std::vector<cplx> values_;
  bool hermitian_ = false;
};

/// Sum of c_k * op_k over operators sharing one basis. Hermitian when every
/// term is Hermitian and every coefficient real.
SparseOperator linear_combination(std::span<const SparseOperator> ops,
                                  std::span<const double> coeffs);

class StateVector {
 public:
  StateVector() = default;
  StateVector(BasisPtr b, Vec amplitudes);
  static StateVector zero(BasisPtr b);
  static StateVector basis_state(BasisPtr b, Config c);
  /// Gaussian random normalized state from a fixed seed.
  static StateVector random(BasisPtr b, std::uint64_t seed);

  const BasisPtr& basis() const { return basis_; }
  const Vec& amplitudes() const { return amp_; }
  Vec& amplitudes() { return amp_; }
  std::size_t dim() const { return static_cast<std::size_t>(amp_.size()); }

  double norm() const { return amp_.norm(); }
  StateVector normalized() const;
  cplx operator[](std::size_t i) const { return amp_[static_cast<Eigen::Index>(i)]; }

 private:
  BasisPtr basis_;
  Vec amp_;
};

/// <a|b>
cplx inner(const StateVector& a, const StateVector& b);
double fidelity(const StateVector& a, const StateVector& b);

StateVector apply(const SparseOperator& op, const StateVector& psi);
cplx expectation(const SparseOperator& op, const StateVector& psi);

// Single-site and two-site building blocks (S = sigma / 2).
SparseOperator exchange_bond(const BasisPtr& b, int i, int j);
/// S^z_i S^z_j alone.
SparseOperator zz_bond(const BasisPtr& b, int i, int j);
/// S^+_i S^-_j alone (not Hermitian).
SparseOperator hop_bond(const BasisPtr& b, int i, int j);
SparseOperator sz_site(const BasisPtr& b, int i);
SparseOperator sz_total(const BasisPtr& b);
/// Pauli matrices; X_i needs an unrestricted basis.
SparseOperator pauli_x(const BasisPtr& b, int i);
SparseOperator pauli_z(const BasisPtr& b, int i);
SparseOperator pauli_zz(const BasisPtr& b, int i, int j);
/// Flip every spin; maps the S^z sector to -S^z.
SparseOperator spin_flip(const BasisPtr& b);

/// Site permutation: the spin on site s moves to site perm[s].
SparseOperator permutation_operator(const BasisPtr& b, std::span<const int> perm);
std::vector<int> compose_perm(std::span<const int> outer, std::span<const int> inner);
/// Cyclic shift by `k` within each of the given site lists.
std::vector<int> cyclic_shift_perm(int n_sites, const std::vector<std::vector<int>>& cycles, int k = 1);

}  // namespace sgq
