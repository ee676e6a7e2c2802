#pragma once

// Lattice layouts for chains, ladders, transverse-field Ising chains and
// corner-coupled ring networks, and their assembly into Hamiltonians.

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgq/hilbert.hpp"

namespace sgq {

/// Coupling-class names used by the builders below.
namespace coupling {
inline constexpr const char* leg = "J_leg";
inline constexpr const char* second = "J_2nn";
inline constexpr const char* stagger = "J_stagger_delta";
inline constexpr const char* rung = "J_rung";
inline constexpr const char* diag = "J_diag";
inline constexpr const char* corner = "J_corner";
inline constexpr const char* corner_2nn = "J_corner_2nn";
inline constexpr const char* glue = "J_glue";
inline constexpr const char* glue_2nn = "J_glue_2nn";
inline constexpr const char* field = "ising_field";
inline constexpr const char* ising = "ising_lambda";
}  // namespace coupling

using CouplingAssignment = std::map<std::string, double>;

enum class TermKind {
  exchange,  // S_i . S_j
  pauli_zz,  // Z_i Z_j
  pauli_x,   // X_i (single site, j unused)
};

struct Site {
  int id = 0;
  int ring = 0;
  int leg = 0;
  int position = 0;
};

/// One term of the Hamiltonian: weight * coupling(cls) * op(i, j).
struct Bond {
  int i = 0;
  int j = 0;
  std::string cls;
  double weight = 1.0;
  TermKind kind = TermKind::exchange;
};

/// A corner joining two (square) or three (triangular) rings. Ring k
/// contributes the consecutive pair (entry, exit) = (anchor, anchor - 1 mod L);
/// glue bonds join exit(k) to entry(k + 1) cyclically.
struct Corner {
  std::vector<int> rings;
  std::vector<int> anchors;
};

struct LatticeLayout {
  std::string kind;
  std::vector<Site> sites;
  std::vector<Bond> bonds;
  /// Default coupling values; every class used by a bond appears here.
  CouplingAssignment couplings;
  bool pbc = true;
  /// Rung count for ladders, chain length for chains, per-ring size for rings.
  int length = 0;
  std::vector<std::vector<int>> rings;  // site ids in ring order
  std::vector<Corner> corners;

  int n_sites() const { return static_cast<int>(sites.size()); }
  std::vector<std::string> classes() const;
  std::size_t count(const std::string& cls) const;
  /// Ladder site id for rung n on leg (0 or 1).
  int ladder_site(int rung, int leg) const { return leg * length + rung; }
};

LatticeLayout chain_j1j2(int L, double J1, double J2, bool pbc);
LatticeLayout chain_staggered(int L, double J, double delta, bool pbc);
LatticeLayout ladder(int L, double J_leg, double J_2nn, double J_rung, double J_diag, bool pbc);
LatticeLayout tfim_chain(int L, double lambda, bool pbc);

struct RingSpec {
  int L = 8;
  double J1 = 1.0;
  double J2 = 0.5;
};

/// Union of rings joined at corners. Inside each ring the corner pair bond and
/// the two next-nearest bonds straddling it move to J_corner / J_corner_2nn;
/// each corner adds nearest (J_glue) and next-nearest (J_glue_2nn) bonds
/// that close the glued loop. Defaults: J_corner = J_corner_2nn = 1,
/// J_glue = J_glue_2nn = 0, so the default network is a set of plain rings.
LatticeLayout ring_network(const std::vector<RingSpec>& rings, const std::vector<Corner>& corners);

/// Site order of the loop formed when corner `c` is glued: each ring from its
/// entry site around to its exit site, rings taken in corner order.
std::vector<int> glued_loop_order(const LatticeLayout& layout, std::size_t c = 0);

/// Hamiltonian: sum over bonds of couplings[cls] * weight * op.
SparseOperator assemble(const LatticeLayout& layout, const CouplingAssignment& couplings,
                        const BasisPtr& basis);
/// Bond-sum operator of a single coupling class (coefficient 1).
SparseOperator class_operator(const LatticeLayout& layout, const std::string& cls,
                              const BasisPtr& basis);

nlohmann::json to_json(const LatticeLayout& layout);
LatticeLayout layout_from_json(const nlohmann::json& j);

}  // namespace sgq
