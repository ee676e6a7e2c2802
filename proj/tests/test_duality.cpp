#include <doctest.h>

#include <sstream>

#include "oracle.hpp"
#include "sgq/duality.hpp"
#include "sgq/models.hpp"
#include "sgq/spectral.hpp"

using namespace sgq;

namespace {

bool commute(const Mat& a, const Mat& b) { return (a * b - b * a).cwiseAbs().maxCoeff() < 1e-12; }
bool anticommute(const Mat& a, const Mat& b) { return (a * b + b * a).cwiseAbs().maxCoeff() < 1e-12; }

// Dense periodic TFIM restricted to an X-parity sector, built from Kronecker products.
Eigen::VectorXd oracle_sector_spectrum(int L, double lambda, int parity) {
  Mat h = Mat::Zero(1 << L, 1 << L), px = Mat::Identity(1 << L, 1 << L);
  for (int n = 0; n < L; ++n) {
    h -= oracle::site_op(L, n, oracle::px());
    h -= lambda * oracle::site_op(L, n, oracle::pz()) * oracle::site_op(L, (n + 1) % L, oracle::pz());
    px = px * oracle::site_op(L, n, oracle::px());
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(px);
  Mat vecs(1 << L, 0);
  for (int k = 0; k < (1 << L); ++k)
    if (std::abs(es.eigenvalues()(k) - parity) < 1e-9) {
      vecs.conservativeResize(Eigen::NoChange, vecs.cols() + 1);
      vecs.col(vecs.cols() - 1) = es.eigenvectors().col(k);
    }
  return oracle::spectrum(vecs.adjoint() * h * vecs);
}

}  // namespace

TEST_CASE("dual Pauli algebra matches the original exhaustively") {
  const int L = 4;
  const auto d = dual_operators(L);
  REQUIRE(d.x.size() == 3);
  REQUIRE(d.z.size() == 3);
  const auto b = build_basis(L);
  std::vector<Mat> X, Z, Xt, Zt;
  for (int n = 0; n < 3; ++n) {
    X.push_back(pauli_x(b, n).to_dense());
    Z.push_back(pauli_z(b, n).to_dense());
    Xt.push_back(d.x[static_cast<std::size_t>(n)].to_dense());
    Zt.push_back(d.z[static_cast<std::size_t>(n)].to_dense());
  }
  for (int i = 0; i < 3; ++i) {
    CHECK((Xt[i] * Xt[i]).isIdentity(1e-14));
    CHECK((Zt[i] * Zt[i]).isIdentity(1e-14));
    for (int j = 0; j < 3; ++j) {
      CHECK(anticommute(X[i], Z[j]) == anticommute(Xt[i], Zt[j]));
      CHECK(commute(X[i], Z[j]) == commute(Xt[i], Zt[j]));
      CHECK(commute(Xt[i], Xt[j]));
      CHECK(commute(Zt[i], Zt[j]));
    }
  }
}

TEST_CASE("dual operators rewrite the bulk Hamiltonian") {
  // Bulk: Z_n Z_{n+1} = tilde-X_n and X_{n+1} = tilde-Z_n tilde-Z_{n+1}.
  const auto d = dual_operators(4);
  const auto b = build_basis(4);
  for (int n = 0; n + 1 < 3; ++n) {
    const Mat lhs = pauli_x(b, n + 1).to_dense();
    const Mat rhs = (d.z[static_cast<std::size_t>(n)] * d.z[static_cast<std::size_t>(n + 1)]).to_dense();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((pauli_zz(b, n, n + 1).to_dense() - d.x[static_cast<std::size_t>(n)].to_dense()).cwiseAbs().maxCoeff() <
          1e-14);
  }
}

TEST_CASE("parity sectors") {
  const auto s0 = parity_split(6, 0.0);
  CHECK(s0.even.size() + s0.odd.size() == 64);
  CHECK(s0.even.front() == doctest::Approx(-6.0));
  CHECK(s0.odd.front() > s0.even.front() + 1.0);

  const auto big = parity_split(8, 10.0);
  CHECK(std::abs(big.even.front() - big.odd.front()) < 1e-3 * 10.0);

  for (int parity : {1, -1}) {
    const Eigen::VectorXd ref = oracle_sector_spectrum(6, 0.7, parity);
    const auto ours = parity_split(6, 0.7);
    const auto& v = parity == 1 ? ours.even : ours.odd;
    REQUIRE(v.size() == static_cast<std::size_t>(ref.size()));
    for (std::size_t k = 0; k < v.size(); ++k) CHECK(std::abs(v[k] - ref(static_cast<Eigen::Index>(k))) < 1e-10);
  }

  // Parity commutes with H.
  const auto tf = tfim_chain(6, 0.8, true);
  const auto b = build_basis(6);
  SparseOperator P = SparseOperator::identity(b);
  for (int n = 0; n < 6; ++n) P = P * pauli_x(b, n);
  const auto H = assemble(tf, tf.couplings, b);
  CHECK(((H * P) - (P * H)).nnz() == 0);
}

TEST_CASE("spectral duality") {
  const auto self = spectrum_duality_check(6, 1.0);
  CHECK(self.max_deviation < 1e-12);
  for (int L : {6, 8})
    for (double lam : {0.5, 2.0}) {
      const auto p = spectrum_duality_check(L, lam);
      CHECK(p.original.size() == p.dual.size());
      CHECK(p.max_deviation < 1e-8);
      CHECK(p.original.front() == doctest::Approx(p.dual.front()).epsilon(1e-10));
    }
  std::ostringstream os;
  write_spectrum_csv(os, spectrum_duality_check(6, 2.0));
  const std::string csv = os.str();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 33);
}

TEST_CASE("order and disorder trends") {
  std::vector<OrderDisorder> rows;
  for (double lam : {0.2, 1.0, 5.0}) rows.push_back(order_disorder(8, lam));
  CHECK(rows[0].order < rows[1].order);
  CHECK(rows[1].order < rows[2].order);
  CHECK(rows[0].disorder > rows[1].disorder);
  CHECK(rows[1].disorder > rows[2].disorder);
  std::ostringstream os;
  write_order_disorder_csv(os, rows);
  CHECK(os.str().rfind("lambda,order,disorder", 0) == 0);
}
