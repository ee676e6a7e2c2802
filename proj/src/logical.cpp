#include "sgq/logical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>

namespace sgq {

int LogicalCode::n_qubits() const {
  const auto n = codewords.size();
  if (n == 0 || !std::has_single_bit(n)) throw Error("codeword count is not a power of two");
  return std::countr_zero(n);
}

double LogicalCode::orthonormality_error() const {
  double err = 0;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j)
      err = std::max(err, std::abs(inner(codewords[i], codewords[j]) - (i == j ? 1.0 : 0.0)));
  return err;
}

StateVector dimer_state(const BasisPtr& basis, const std::vector<Pair>& covering) {
  const int n = basis->n_sites();
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (const auto& [a, b] : covering) {
    for (int s : {a, b}) {
      if (s < 0 || s >= n || used[static_cast<std::size_t>(s)]) throw Error("covering is not a perfect matching");
      used[static_cast<std::size_t>(s)] = 1;
    }
  }
  if (2 * covering.size() != static_cast<std::size_t>(n)) throw Error("covering is not a perfect matching");
  if (basis->has_sector() && *basis->sector() != 0.0) throw Error("dimer states live in the S^z = 0 sector");

  StateVector psi = StateVector::zero(basis);
  const std::size_t np = covering.size();
  const double amp = std::pow(2.0, -0.5 * static_cast<double>(np));
  for (std::uint64_t choice = 0; choice < (std::uint64_t{1} << np); ++choice) {
    Config c = 0;
    int sign = 1;
    for (std::size_t p = 0; p < np; ++p) {
      if ((choice >> p) & 1) {
        c |= Config{1} << covering[p].second;
        sign = -sign;
      } else {
        c |= Config{1} << covering[p].first;
      }
    }
    psi.amplitudes()[static_cast<Eigen::Index>(*basis->index_of(c))] = sign * amp;
  }
  return psi;
}

std::vector<Pair> ring_covering(const std::vector<int>& ring, int parity) {
  const auto L = ring.size();
  if (L < 2 || L % 2 != 0) throw Error("ring coverings need an even ring");
  std::vector<Pair> pairs;
  for (std::size_t k = static_cast<std::size_t>(parity & 1); k < L; k += 2)
    pairs.emplace_back(ring[k], ring[(k + 1) % L]);
  return pairs;
}

SparseOperator twist_operator(const BasisPtr& basis, const std::vector<int>& sites) {
  const auto L = static_cast<double>(sites.size());
  if (sites.empty()) throw Error("twist needs at least one site");
  std::vector<cplx> d(basis->dim());
  for (std::size_t k = 0; k < basis->dim(); ++k) {
    const Config c = basis->config_of(k);
    double phase = 0;
    for (std::size_t n = 0; n < sites.size(); ++n) {
      const double sz = ((c >> sites[n]) & 1) ? 0.5 : -0.5;
      phase += static_cast<double>(n + 1) * sz;
    }
    d[k] = std::polar(1.0, 2.0 * std::numbers::pi * phase / L);
  }
  return SparseOperator::diagonal(basis, d);
}

SparseOperator plus_twist_operator(const BasisPtr& basis, const std::vector<Pair>& rungs) {
  const auto L = static_cast<double>(rungs.size());
  if (rungs.empty()) throw Error("plus twist needs at least one rung");
  std::vector<cplx> d(basis->dim());
  for (std::size_t k = 0; k < basis->dim(); ++k) {
    const Config c = basis->config_of(k);
    double phase = 0;
    for (std::size_t n = 0; n < rungs.size(); ++n) {
      const double sz = (((c >> rungs[n].first) & 1) ? 0.5 : -0.5) + (((c >> rungs[n].second) & 1) ? 0.5 : -0.5);
      phase += static_cast<double>(n + 1) * sz;
    }
    d[k] = std::polar(1.0, 2.0 * std::numbers::pi * phase / L);
  }
  return SparseOperator::diagonal(basis, d);
}

SparseOperator translation_operator(const BasisPtr& basis, const std::vector<std::vector<int>>& rings, int shift) {
  return permutation_operator(basis, cyclic_shift_perm(basis->n_sites(), rings, shift));
}

LogicalCode code_from_states(const std::vector<StateVector>& states, const std::vector<std::string>& labels) {
  if (states.empty()) throw Error("code needs at least one state");
  if (labels.size() != states.size()) throw Error("label count does not match states");
  const auto n = static_cast<Eigen::Index>(states.size());
  Mat G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      G(i, j) = inner(states[static_cast<std::size_t>(i)], states[static_cast<std::size_t>(j)]);
  Eigen::SelfAdjointEigenSolver<Mat> es(G);
  if (es.eigenvalues().minCoeff() < 1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()))
    throw Error("codeword candidates are linearly dependent");
  const Mat inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                       es.eigenvectors().adjoint();
  LogicalCode code;
  code.basis = states.front().basis();
  code.labels = labels;
  code.construction = "loewdin";
  for (Eigen::Index j = 0; j < n; ++j) {
    Vec v = Vec::Zero(static_cast<Eigen::Index>(code.basis->dim()));
    for (Eigen::Index i = 0; i < n; ++i) v += inv_sqrt(i, j) * states[static_cast<std::size_t>(i)].amplitudes();
    code.codewords.emplace_back(code.basis, std::move(v));
  }
  return code;
}

LogicalCode dimer_code(const BasisPtr& basis, const std::vector<std::vector<int>>& rings) {
  if (rings.empty()) throw Error("dimer code needs at least one ring");
  const std::size_t nq = rings.size();
  std::vector<StateVector> states;
  std::vector<std::string> labels;
  std::set<int> covered;
  for (const auto& r : rings) covered.insert(r.begin(), r.end());
  if (static_cast<int>(covered.size()) != basis->n_sites()) throw Error("rings must cover every site exactly once");
  for (std::size_t word = 0; word < (std::size_t{1} << nq); ++word) {
    std::vector<Pair> cov;
    std::string label;
    for (std::size_t q = 0; q < nq; ++q) {
      const int b = static_cast<int>((word >> (nq - 1 - q)) & 1);
      auto p = ring_covering(rings[q], b);
      cov.insert(cov.end(), p.begin(), p.end());
      label.push_back(b ? '1' : '0');
    }
    states.push_back(dimer_state(basis, cov));
    labels.push_back(label);
  }
  LogicalCode code = code_from_states(states, labels);
  code.construction = "dimer-coverings";
  code.rings = rings;
  return code;
}

Mat polar_unitary(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

double gate_fidelity(const Mat& M, const Mat& target) {
  if (M.rows() != target.rows() || M.cols() != target.cols()) throw Error("gate fidelity: size mismatch");
  const double d = static_cast<double>(M.rows());
  return std::norm((target.adjoint() * polar_unitary(M)).trace()) / (d * d);
}

LogicalAction action_from_matrix(Mat M) {
  LogicalAction a;
  const double d = static_cast<double>(M.rows());
  Eigen::Index r = 0, c = 0;
  M.cwiseAbs().maxCoeff(&r, &c);
  const double phase = std::arg(M(r, c));
  M *= std::polar(1.0, -phase);
  a.global_phase = phase;
  a.leakage = std::clamp(1.0 - (M.adjoint() * M).trace().real() / d, 0.0, 1.0);
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& s = svd.singularValues();
  const double sum = s.sum(), sq = s.squaredNorm();
  a.fidelity_to_unitary = sq > 0 ? std::clamp(sum * sum / (d * sq), 0.0, 1.0) : 0.0;
  a.matrix = std::move(M);
  return a;
}

LogicalAction extract_action(const LogicalCode& in, const LogicalCode& out, const Process& process) {
  if (!(*in.basis == *out.basis)) throw Error("codes must share a physical basis");
  Mat M(static_cast<Eigen::Index>(out.size()), static_cast<Eigen::Index>(in.size()));
  for (std::size_t j = 0; j < in.size(); ++j) {
    const StateVector img = process(in.codewords[j]);
    for (std::size_t i = 0; i < out.size(); ++i)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = inner(out.codewords[i], img);
  }
  return action_from_matrix(std::move(M));
}

LogicalAction extract_action(const LogicalCode& in, const LogicalCode& out, const SparseOperator& U) {
  return extract_action(in, out, [&U](const StateVector& s) { return apply(U, s); });
}

Eigen::Vector3d bloch_readout(const Eigen::Vector2cd& psi) {
  return bloch_readout(Eigen::Matrix2cd(psi * psi.adjoint()));
}

Eigen::Vector3d bloch_readout(const Eigen::Matrix2cd& rho) {
  const cplx tr = rho.trace();
  if (std::abs(tr - 1.0) > 1e-9) throw Error("Bloch readout needs a normalized state");
  return {2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

nlohmann::json to_json(const LogicalAction& a) {
  nlohmann::json m = nlohmann::json::array();
  for (Eigen::Index i = 0; i < a.matrix.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < a.matrix.cols(); ++j) row.push_back({a.matrix(i, j).real(), a.matrix(i, j).imag()});
    m.push_back(row);
  }
  return {{"matrix", m},
          {"leakage", a.leakage},
          {"global_phase", a.global_phase},
          {"fidelity_to_unitary", a.fidelity_to_unitary}};
}

namespace gates {
Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
Mat hadamard() {
  Mat m(2, 2);
  m << 1, 1, 1, -1;
  return m / std::sqrt(2.0);
}
Mat controlled_z(int n) {
  if (n < 1) throw Error("controlled_z needs at least one qubit");
  const Eigen::Index d = Eigen::Index{1} << n;
  Mat m = Mat::Identity(d, d);
  m(d - 1, d - 1) = -1;
  return m;
}
}  // namespace gates

}  // namespace sgq
