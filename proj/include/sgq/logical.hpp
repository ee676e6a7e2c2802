#pragma once

// Code spaces built from dimer coverings or eigenstates, the twist and
// translation operators acting on them, and extraction of logical actions.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgq/hilbert.hpp"

namespace sgq {

using Pair = std::pair<int, int>;

struct LogicalCode {
  BasisPtr basis;
  std::vector<StateVector> codewords;
  std::vector<std::string> labels;
  std::string construction;
  /// Site lists (ring order, origin first) the twist is taken over.
  std::vector<std::vector<int>> rings;

  std::size_t size() const { return codewords.size(); }
  int n_qubits() const;
  /// Max |<c_i|c_j> - delta_ij|.
  double orthonormality_error() const;
};

struct LogicalAction {
  Mat matrix;
  double leakage = 0.0;
  double global_phase = 0.0;
  double fidelity_to_unitary = 0.0;
};

/// Singlet (|up_a down_b> - |down_a up_b>)/sqrt(2) on every pair (a, b) as
/// given. The pairs must form a perfect matching of the sites.
StateVector dimer_state(const BasisPtr& basis, const std::vector<Pair>& covering);

/// Nearest-neighbour covering of a ring: parity 0 pairs (r0,r1),(r2,r3),...;
/// parity 1 pairs (r1,r2),...,(r_{L-1},r0), the wrap pair last.
std::vector<Pair> ring_covering(const std::vector<int>& ring, int parity);

/// diag prod_n exp(i 2 pi n S^z_{sites[n-1]} / L), n = 1..L.
SparseOperator twist_operator(const BasisPtr& basis, const std::vector<int>& sites);
/// Twist over rung-summed S^z: rungs[n-1] = (leg-1 site, leg-2 site).
SparseOperator plus_twist_operator(const BasisPtr& basis, const std::vector<Pair>& rungs);
/// One-site translation along every listed ring simultaneously.
SparseOperator translation_operator(const BasisPtr& basis, const std::vector<std::vector<int>>& rings,
                                    int shift = 1);

/// Symmetric (Loewdin) orthonormalization. Throws on rank deficiency.
LogicalCode code_from_states(const std::vector<StateVector>& states, const std::vector<std::string>& labels);

/// Product code of dimer coverings: codeword b_1...b_n has ring k in covering
/// b_k. Labels are bitstrings with ring 0 first.
LogicalCode dimer_code(const BasisPtr& basis, const std::vector<std::vector<int>>& rings);

using Process = std::function<StateVector(const StateVector&)>;

LogicalAction extract_action(const LogicalCode& in, const LogicalCode& out, const Process& process);
LogicalAction extract_action(const LogicalCode& in, const LogicalCode& out, const SparseOperator& U);
/// Action from an already computed overlap matrix M_ij = <out_i|U|in_j>.
LogicalAction action_from_matrix(Mat M);

/// Closest unitary to M (polar factor).
Mat polar_unitary(const Mat& M);
/// |tr(target^dagger W)|^2 / d^2 with W the polar unitary of M.
double gate_fidelity(const Mat& M, const Mat& target);

/// Bloch vector (<X>, <Y>, <Z>) of a qubit state or 2x2 density matrix.
Eigen::Vector3d bloch_readout(const Eigen::Vector2cd& psi);
Eigen::Vector3d bloch_readout(const Eigen::Matrix2cd& rho);

nlohmann::json to_json(const LogicalAction& a);

namespace gates {
Mat pauli_x();
Mat pauli_z();
Mat hadamard();
/// diag(1, ..., 1, -1) on n qubits.
Mat controlled_z(int n_qubits);
}  // namespace gates

}  // namespace sgq
