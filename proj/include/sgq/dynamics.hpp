#pragma once

// Krylov propagation under static and scheduled Hamiltonians.

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "sgq/hilbert.hpp"
#include "sgq/models.hpp"

namespace sgq {

enum class RampShape { constant, linear, smoothstep };

RampShape ramp_shape_from(const std::string& name);
std::string to_string(RampShape s);

struct Ramp {
  std::string cls;
  RampShape shape = RampShape::smoothstep;
  double start = 0.0;
  double end = 0.0;

  /// Value at fractional time s in [0, 1].
  double at(double s) const;
};

struct Schedule {
  double duration = 1.0;
  std::vector<Ramp> segments;
  double dt = 0.25;     // midpoint step
  int krylov_dim = 20;  // Lanczos dimension per propagation step
  /// Keep every n-th step in the trajectory (0 keeps only the endpoints).
  int record_every = 0;

  void validate() const;
  /// Same ramps run backwards in time.
  Schedule reversed() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<double> energies;
  std::vector<double> leakage;  // NaN when no target space was given
  double norm_drift = 0.0;

  const StateVector& final_state() const { return states.back(); }
  void write_csv(std::ostream& os) const;
};

struct KrylovOptions {
  int krylov_dim = 20;
  /// Target error per unit time of the propagated (unit) vector.
  double tol = 1e-12;
};

/// exp(-i H t) psi by adaptive Lanczos propagation. Throws sgq::Error when the
/// step size collapses, reporting the accuracy reached.
StateVector evolve_static(const SparseOperator& H, const StateVector& psi, double t,
                          const KrylovOptions& opts = {});

/// H(c) = sum_k c_k O_k over a shared sparsity pattern, so each evaluation is a
/// single pass over the stored values.
class ParametricOperator {
 public:
  explicit ParametricOperator(std::vector<SparseOperator> terms);
  std::size_t size() const { return n_terms_; }
  SparseOperator at(std::span<const double> coeffs) const;
  const BasisPtr& basis() const { return basis_; }

 private:
  BasisPtr basis_;
  std::size_t n_terms_ = 0;
  std::vector<std::size_t> row_ptr_, col_;
  std::vector<cplx> values_;  // n_terms_ consecutive blocks of nnz
  bool hermitian_ = true;
};

/// Generic driven evolution: coefficient functions of the absolute time t in
/// [0, duration] multiply the fixed terms. Each midpoint step freezes H.
struct Drive {
  ParametricOperator op;
  std::function<std::vector<double>(double t)> coeffs;
};

Trajectory evolve_driven(const Drive& drive, const StateVector& psi, double duration, double dt,
                         int krylov_dim, int record_every = 0,
                         std::span<const StateVector> target = {});

/// Couplings from `base`, with each scheduled class following its ramp.
Drive schedule_drive(const LatticeLayout& layout, const CouplingAssignment& base,
                     const Schedule& sched, const BasisPtr& basis);

Trajectory evolve_schedule(const LatticeLayout& layout, const CouplingAssignment& base,
                           const Schedule& sched, const StateVector& psi,
                           std::span<const StateVector> target = {});

/// 1 - sum_k |<target_k|psi_final>|^2.
double adiabatic_metric(const Trajectory& traj, std::span<const StateVector> target);
double leakage_from(const StateVector& psi, std::span<const StateVector> target);

}  // namespace sgq
