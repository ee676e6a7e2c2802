#pragma once

// Kramers-Wannier duality of the transverse-field Ising chain
// H(lambda) = -sum X_n - lambda sum Z_n Z_{n+1}.

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sgq/hilbert.hpp"

namespace sgq {

struct DualOperators {
  /// tilde-X_n = Z_n Z_{n+1}, n = 0..L-2 (dual site n sits on bond (n, n+1)).
  std::vector<SparseOperator> x;
  /// tilde-Z_n = prod_{m <= n} X_m, n = 0..L-2.
  std::vector<SparseOperator> z;
};

/// Dual Pauli operators on the unrestricted basis of an open L-site chain.
DualOperators dual_operators(int L);

/// H(lambda) restricted to the global X-parity sector (prod_n X_n = parity).
Mat parity_sector_hamiltonian(int L, double lambda, int parity, bool pbc = true);

struct ParitySpectra {
  std::vector<double> even;
  std::vector<double> odd;
};

/// Spectra of H(lambda) in the two X-parity sectors.
ParitySpectra parity_split(int L, double lambda, bool pbc = true);

struct DualPair {
  double lambda = 1.0;
  int L = 0;
  std::vector<double> original;  // H(lambda), even parity, periodic
  std::vector<double> dual;      // lambda * H(1/lambda), even parity, periodic
  double max_deviation = 0.0;
  std::string sector = "periodic even <-> periodic even";
};

DualPair spectrum_duality_check(int L, double lambda);

struct OrderDisorder {
  double lambda = 0.0;
  /// <Z_m Z_{m+1}> with m = L/2 - 1.
  double order = 0.0;
  /// <prod_{n <= m} X_n>, the dual field at the same bond.
  double disorder = 0.0;
};

/// Evaluated in the lowest even-parity eigenstate of the periodic chain.
OrderDisorder order_disorder(int L, double lambda);

void write_spectrum_csv(std::ostream& os, const DualPair& p);
void write_order_disorder_csv(std::ostream& os, const std::vector<OrderDisorder>& rows);

}  // namespace sgq
