#pragma once

// Ladder and chain order parameters and the phase classifier built on them.

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "sgq/hilbert.hpp"
#include "sgq/logical.hpp"
#include "sgq/models.hpp"

namespace sgq {

/// <S_i . S_j>.
double spin_correlation(const StateVector& psi, int i, int j);

/// D = -(2/L) sum_n (-1)^n <S_n . S_{n+1}> along a leg (0 or 1; chains use 0).
/// Positive on the covering that pairs (0,1),(2,3),...
double dimer_order(const StateVector& psi, const LatticeLayout& layout, int leg = 0);

/// (1/L) sum_n (1/4 - <S_{n,0} . S_{n,1}>).
double rung_singlet_density(const StateVector& psi, const LatticeLayout& layout);

/// -<s_i exp(i pi sum_{i<k<j} s_k) s_j> with s_n the rung-summed S^z.
double string_order(const StateVector& psi, const LatticeLayout& layout, int i, int j);

cplx twist_expectation(const StateVector& psi, const SparseOperator& twist);

/// Rung pairs (leg 0 site, leg 1 site) in rung order.
std::vector<Pair> ladder_rungs(const LatticeLayout& layout);

enum class Phase { C, S, H, R, unclassified };
std::string to_string(Phase p);

struct ClassifierOptions {
  double threshold = 0.05;
  /// Ground-space window: levels within this of E0 count as degenerate.
  double degeneracy_window = 1e-6;
  bool pbc = true;
};

struct PhasePoint {
  CouplingAssignment couplings;
  std::map<std::string, double> observables;
  Phase label = Phase::unclassified;
};

/// Ground state of the L-rung ladder at the given couplings, the Table-style
/// observables on it, and the resulting label. In a degenerate ground space
/// the representative maximizes leg-0 dimer order, ties broken on leg 1.
PhasePoint classify_phase(const CouplingAssignment& couplings, int L,
                          const ClassifierOptions& opts = {});

/// Label from observables already computed (keys as produced by classify_phase).
Phase decide_phase(const std::map<std::string, double>& obs, double threshold);

struct ScanAxis {
  std::string coupling;
  std::vector<double> values;
};

/// Grid over up to two axes, first axis slowest.
std::vector<PhasePoint> phase_scan(const CouplingAssignment& base, const std::vector<ScanAxis>& axes, int L,
                                   const ClassifierOptions& opts = {});
void write_phase_csv(std::ostream& os, const std::vector<PhasePoint>& points);

}  // namespace sgq
