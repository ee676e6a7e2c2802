#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sgq/hilbert.hpp"

namespace sgq {

struct EigenSolution {
  std::vector<double> eigenvalues;  // ascending
  std::vector<StateVector> eigenvectors;
  std::vector<double> residuals;  // ||H v - E v||
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_residuals)
      : NumericalError(what), residuals(std::move(best_residuals)) {}
  std::vector<double> residuals;
};

struct LanczosOptions {
  std::uint64_t seed = 12345;
  int krylov_dim = 80;
  int max_restarts = 400;
  /// Optional in-place filter applied to every Krylov vector, e.g. a symmetry
  /// projector. Eigenpairs are then those of H restricted to its range.
  std::function<void(Vec&)> filter;
};

/// k lowest eigenpairs of a Hermitian operator by restarted Lanczos with full
/// reorthogonalization, locking one converged vector at a time so degenerate
/// levels are resolved. Throws ConvergenceError after max_restarts.
EigenSolution lowest_eigenpairs(const SparseOperator& H, int k, double tol = 1e-10,
                                const LanczosOptions& opts = {});

/// Number of eigenvalues within split_tol of the lowest one. A negative
/// split_tol selects 1e-8 * max(1, |E0|).
int degeneracy(const EigenSolution& sol, double split_tol = -1.0);

/// Full spectrum of a small Hermitian operator (dense, dim <= 4096).
EigenSolution dense_eigensystem(const SparseOperator& H);
std::vector<double> dense_spectrum(const SparseOperator& H);

}  // namespace sgq
