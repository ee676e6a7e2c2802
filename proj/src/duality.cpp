#include "sgq/duality.hpp"

#include <cmath>
#include <iomanip>

#include "sgq/models.hpp"

namespace sgq {

namespace {

constexpr int kMaxSites = 12;

void check_size(int L) {
  if (L < 3 || L > kMaxSites) throw Error("Ising chain length must be in [3, 12]");
}

// Even/odd combinations (|c> + p |~c>)/sqrt(2), indexed by the representative
// c < ~c. Returns the sector Hamiltonian.
Mat project_parity(const SparseOperator& H, int L, int parity) {
  const Config mask = (Config{1} << L) - 1;
  const std::size_t half = std::size_t{1} << (L - 1);
  Mat M = Mat::Zero(static_cast<Eigen::Index>(half), static_cast<Eigen::Index>(half));
  // Representatives are the configs with the top bit clear.
  auto locate = [&](Config c, Eigen::Index& idx, double& coef) {
    if (c >> (L - 1)) {
      idx = static_cast<Eigen::Index>(~c & mask);
      coef = parity / std::sqrt(2.0);
    } else {
      idx = static_cast<Eigen::Index>(c);
      coef = 1.0 / std::sqrt(2.0);
    }
  };
  const auto rp = H.row_ptr();
  const auto ci = H.col_idx();
  const auto va = H.values();
  for (std::size_t r = 0; r + 1 < rp.size(); ++r)
    for (std::size_t q = rp[r]; q < rp[r + 1]; ++q) {
      Eigen::Index a, b;
      double ca, cb;
      locate(static_cast<Config>(r), a, ca);
      locate(static_cast<Config>(ci[q]), b, cb);
      M(a, b) += ca * va[q] * cb;
    }
  return M;
}

SparseOperator tfim_operator(int L, double lambda, bool pbc) {
  const LatticeLayout lay = tfim_chain(L, lambda, pbc);
  return assemble(lay, lay.couplings, build_basis(L));
}

std::vector<double> sector_spectrum(int L, double lambda, int parity, bool pbc) {
  Eigen::SelfAdjointEigenSolver<Mat> es(parity_sector_hamiltonian(L, lambda, parity, pbc), Eigen::EigenvaluesOnly);
  const auto& w = es.eigenvalues();
  return {w.data(), w.data() + w.size()};
}

}  // namespace

DualOperators dual_operators(int L) {
  check_size(L);
  const auto b = build_basis(L);
  DualOperators d;
  SparseOperator string = SparseOperator::identity(b);
  for (int n = 0; n + 1 < L; ++n) {
    d.x.push_back(pauli_zz(b, n, n + 1));
    string = string * pauli_x(b, n);
    d.z.push_back(string.as_hermitian());
  }
  return d;
}

Mat parity_sector_hamiltonian(int L, double lambda, int parity, bool pbc) {
  check_size(L);
  if (parity != 1 && parity != -1) throw Error("parity must be +1 or -1");
  return project_parity(tfim_operator(L, lambda, pbc), L, parity);
}

ParitySpectra parity_split(int L, double lambda, bool pbc) {
  if (lambda < 0) throw Error("parity_split needs lambda >= 0");
  return {sector_spectrum(L, lambda, 1, pbc), sector_spectrum(L, lambda, -1, pbc)};
}

DualPair spectrum_duality_check(int L, double lambda) {
  if (!(lambda > 0)) throw Error("duality check needs lambda > 0");
  DualPair p;
  p.lambda = lambda;
  p.L = L;
  p.original = sector_spectrum(L, lambda, 1, true);
  p.dual = sector_spectrum(L, 1.0 / lambda, 1, true);
  for (double& e : p.dual) e *= lambda;
  for (std::size_t k = 0; k < p.original.size(); ++k)
    p.max_deviation = std::max(p.max_deviation, std::abs(p.original[k] - p.dual[k]));
  return p;
}

OrderDisorder order_disorder(int L, double lambda) {
  check_size(L);
  Eigen::SelfAdjointEigenSolver<Mat> es(parity_sector_hamiltonian(L, lambda, 1, true));
  const Vec g = es.eigenvectors().col(0);
  // Lift the even-sector vector back to the full basis.
  const auto b = build_basis(L);
  const Config mask = (Config{1} << L) - 1;
  Vec full = Vec::Zero(static_cast<Eigen::Index>(b->dim()));
  for (Eigen::Index c = 0; c < g.size(); ++c) {
    full(c) += g(c) / std::sqrt(2.0);
    full(static_cast<Eigen::Index>(~static_cast<Config>(c) & mask)) += g(c) / std::sqrt(2.0);
  }
  const StateVector psi(b, full);
  const int m = L / 2 - 1;
  const auto d = dual_operators(L);
  return {lambda, expectation(pauli_zz(b, m, m + 1), psi).real(),
          expectation(d.z[static_cast<std::size_t>(m)], psi).real()};
}

void write_spectrum_csv(std::ostream& os, const DualPair& p) {
  os << "index,original,dual,deviation\n" << std::setprecision(17);
  for (std::size_t k = 0; k < p.original.size(); ++k)
    os << k << "," << p.original[k] << "," << p.dual[k] << "," << p.original[k] - p.dual[k] << "\n";
}

void write_order_disorder_csv(std::ostream& os, const std::vector<OrderDisorder>& rows) {
  os << "lambda,order,disorder\n" << std::setprecision(17);
  for (const auto& r : rows) os << r.lambda << "," << r.order << "," << r.disorder << "\n";
}

}  // namespace sgq
