#include "sgq/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sgq {

namespace {

// Orthogonalize v against the columns of Q (twice, classical Gram-Schmidt).
void orthogonalize(Vec& v, const std::vector<Vec>& Q) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : Q) v -= q * q.dot(v);
}

Vec random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v[i] = cplx(re, im);
  }
  return v;
}

struct RitzResult {
  double value;
  Vec vector;
  double residual_estimate;
  Vec next_start;  // second Ritz vector, seed for the following search
};

}  // namespace

EigenSolution lowest_eigenpairs(const SparseOperator& H, int k, double tol, const LanczosOptions& opts) {
  if (!H.hermitian()) throw Error("lowest_eigenpairs needs a Hermitian operator");
  const std::size_t n = H.rows();
  if (k < 1 || static_cast<std::size_t>(k) > n) throw Error("requested eigenpair count out of range");

  std::mt19937_64 rng(opts.seed);
  std::vector<Vec> locked;
  std::vector<double> locked_vals;
  Vec Hv;

  auto filtered = [&](Vec& v) {
    if (opts.filter) opts.filter(v);
    orthogonalize(v, locked);
  };

  Vec start = random_vector(n, rng);
  std::vector<double> best_res;
  for (int want = 0; want < k; ++want) {
    filtered(start);
    if (start.norm() < 1e-10) {
      start = random_vector(n, rng);
      filtered(start);
    }
    if (start.norm() < 1e-10) throw Error("filtered space exhausted before k eigenpairs were found");
    start.normalize();

    bool converged = false;
    double last_res = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < opts.max_restarts && !converged; ++restart) {
      const std::size_t free_dim = n - locked.size();
      const int m_max = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(opts.krylov_dim), free_dim));
      std::vector<Vec> Q;
      std::vector<double> alpha, beta;
      Q.push_back(start);
      double beta_last = 0;
      for (int j = 0; j < m_max; ++j) {
        H.multiply(Q[static_cast<std::size_t>(j)], Hv);
        const double a = Q[static_cast<std::size_t>(j)].dot(Hv).real();
        alpha.push_back(a);
        Vec w = Hv;
        orthogonalize(w, Q);
        filtered(w);
        const double b = w.norm();
        beta_last = b;
        if (j + 1 == m_max || b < 1e-12 * std::max(1.0, std::abs(a))) break;
        beta.push_back(b);
        Q.push_back(w / b);
      }
      const int m = static_cast<int>(alpha.size());
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) T(i, i) = alpha[static_cast<std::size_t>(i)];
      for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      const Eigen::VectorXd y0 = es.eigenvectors().col(0);
      Vec ritz = Vec::Zero(static_cast<Eigen::Index>(n));
      for (int i = 0; i < m; ++i) ritz += y0[i] * Q[static_cast<std::size_t>(i)];
      ritz.normalize();
      const double theta = es.eigenvalues()[0];
      const double est = std::abs(beta_last * y0[m - 1]);

      // Explicit residual once the estimate looks converged.
      H.multiply(ritz, Hv);
      const double res = (Hv - theta * ritz).norm();
      last_res = res;
      if (res < tol) {
        converged = true;
        locked.push_back(ritz);
        locked_vals.push_back(theta);
        best_res.push_back(res);
        if (m > 1) {
          const Eigen::VectorXd y1 = es.eigenvectors().col(1);
          Vec next = Vec::Zero(static_cast<Eigen::Index>(n));
          for (int i = 0; i < m; ++i) next += y1[i] * Q[static_cast<std::size_t>(i)];
          // A small random admixture lets the next search find degenerate partners.
          Vec noise = random_vector(n, rng);
          start = next + 1e-3 * noise / noise.norm();
        } else {
          start = random_vector(n, rng);
        }
      } else {
        (void)est;
        start = ritz;
      }
    }
    if (!converged) {
      best_res.push_back(last_res);
      throw ConvergenceError("Lanczos did not converge for eigenpair " + std::to_string(want), best_res);
    }
  }

  // Locking order is not guaranteed to be ascending; sort and rebuild.
  std::vector<std::size_t> order(locked.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return locked_vals[a] < locked_vals[b]; });
  EigenSolution sol;
  BasisPtr basis = H.basis_in();
  for (std::size_t i : order) {
    sol.eigenvalues.push_back(locked_vals[i]);
    sol.eigenvectors.emplace_back(basis, locked[i]);
    H.multiply(locked[i], Hv);
    sol.residuals.push_back((Hv - locked_vals[i] * locked[i]).norm());
  }
  return sol;
}

int degeneracy(const EigenSolution& sol, double split_tol) {
  if (sol.eigenvalues.empty()) throw Error("degeneracy of an empty solution");
  const double e0 = sol.eigenvalues.front();
  if (split_tol < 0) split_tol = 1e-8 * std::max(1.0, std::abs(e0));
  return static_cast<int>(std::count_if(sol.eigenvalues.begin(), sol.eigenvalues.end(),
                                        [&](double e) { return e - e0 <= split_tol; }));
}

EigenSolution dense_eigensystem(const SparseOperator& H) {
  if (!H.hermitian()) throw Error("dense_eigensystem needs a Hermitian operator");
  if (H.rows() > 4096) throw Error("dense diagonalization limited to dimension 4096");
  Eigen::SelfAdjointEigenSolver<Mat> es(H.to_dense());
  EigenSolution sol;
  const Mat& V = es.eigenvectors();
  const Mat A = H.to_dense();
  for (Eigen::Index i = 0; i < V.cols(); ++i) {
    sol.eigenvalues.push_back(es.eigenvalues()[i]);
    sol.eigenvectors.emplace_back(H.basis_in(), V.col(i));
    sol.residuals.push_back((A * V.col(i) - es.eigenvalues()[i] * V.col(i)).norm());
  }
  return sol;
}

std::vector<double> dense_spectrum(const SparseOperator& H) {
  if (!H.hermitian()) throw Error("dense_spectrum needs a Hermitian operator");
  if (H.rows() > 4096) throw Error("dense diagonalization limited to dimension 4096");
  Eigen::SelfAdjointEigenSolver<Mat> es(H.to_dense(), Eigen::EigenvaluesOnly);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

}  // namespace sgq
