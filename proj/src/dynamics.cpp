#include "sgq/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>

#include "parallel.hpp"

namespace sgq {

namespace {

using MatVec = std::function<void(const Vec&, Vec&)>;

// Advances v by exp(-i H t) in adaptively sized Lanczos steps.
void krylov_propagate(const MatVec& H, Vec& v, double t, const KrylovOptions& opts) {
  if (t == 0.0) return;
  if (opts.krylov_dim < 2) throw Error("Krylov dimension must be at least 2");
  const double beta0 = v.norm();
  if (beta0 == 0.0) return;
  const Eigen::Index n = v.size();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(opts.krylov_dim, n));
  const double sign = t > 0 ? 1.0 : -1.0;
  double remaining = std::abs(t);
  double h_try = remaining;
  std::vector<Vec> V;
  Vec w;
  while (remaining > 0) {
    const double beta = v.norm();
    V.clear();
    V.push_back(v / beta);
    std::vector<double> alpha, off;
    double beta_m = 0;
    bool breakdown = false;
    for (int j = 0; j < m_max; ++j) {
      H(V[static_cast<std::size_t>(j)], w);
      const double a = V[static_cast<std::size_t>(j)].dot(w).real();
      alpha.push_back(a);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : V) w -= q * q.dot(w);
      const double b = w.norm();
      beta_m = b;
      if (b < 1e-13 * (1.0 + std::abs(a))) {
        breakdown = true;
        break;
      }
      if (j + 1 == m_max) break;
      off.push_back(b);
      V.push_back(w / b);
    }
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) T(i, i) = alpha[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = off[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const Eigen::MatrixXd& S = es.eigenvectors();
    const Eigen::VectorXd& lam = es.eigenvalues();

    auto coeffs = [&](double h) {
      Vec c = Vec::Zero(m);
      for (int k = 0; k < m; ++k) {
        const cplx ph = std::exp(cplx(0, -sign * h * lam[k]));
        c += (ph * S(0, k)) * S.col(k).cast<cplx>();
      }
      return c;
    };

    double h = std::min(h_try, remaining);
    Vec c;
    for (int halvings = 0;; ++halvings) {
      c = coeffs(h);
      const double err = breakdown ? 0.0 : beta_m * std::abs(c[m - 1]);
      if (err <= opts.tol * std::max(h, 1e-3)) break;
      if (halvings > 60) {
        throw NumericalError("Krylov step size collapsed; error estimate " + std::to_string(err) + " at step " +
                    std::to_string(h));
      }
      h *= 0.5;
    }
    Vec next = Vec::Zero(n);
    for (int k = 0; k < m; ++k) next += c[k] * V[static_cast<std::size_t>(k)];
    v = beta * next;
    remaining -= h;
    if (remaining < 1e-14 * std::abs(t)) remaining = 0;
    h_try = (h == std::min(h_try, remaining + h)) ? 2 * h : h;
  }
  (void)beta0;
}

}  // namespace

RampShape ramp_shape_from(const std::string& name) {
  if (name == "constant") return RampShape::constant;
  if (name == "linear") return RampShape::linear;
  if (name == "smoothstep") return RampShape::smoothstep;
  throw Error("unknown ramp shape: " + name);
}

std::string to_string(RampShape s) {
  switch (s) {
    case RampShape::constant: return "constant";
    case RampShape::linear: return "linear";
    case RampShape::smoothstep: return "smoothstep";
  }
  return "smoothstep";
}

double Ramp::at(double s) const {
  s = std::clamp(s, 0.0, 1.0);
  switch (shape) {
    case RampShape::constant: return start;
    case RampShape::linear: return start + (end - start) * s;
    case RampShape::smoothstep: return start + (end - start) * s * s * (3.0 - 2.0 * s);
  }
  return start;
}

void Schedule::validate() const {
  if (!(duration > 0) || !std::isfinite(duration)) throw Error("schedule duration must be positive");
  if (!(dt > 0) || !std::isfinite(dt)) throw Error("schedule step must be positive");
  if (krylov_dim < 2) throw Error("Krylov dimension must be at least 2");
  std::set<std::string> seen;
  for (const auto& r : segments) {
    if (!std::isfinite(r.start) || !std::isfinite(r.end)) throw Error("ramp values must be finite");
    if (!seen.insert(r.cls).second) throw Error("class scheduled twice: " + r.cls);
  }
}

Schedule Schedule::reversed() const {
  Schedule r = *this;
  for (auto& s : r.segments) {
    if (s.shape != RampShape::constant) std::swap(s.start, s.end);
  }
  return r;
}

void Trajectory::write_csv(std::ostream& os) const {
  os << "time,energy,leakage\n";
  os << std::setprecision(17);
  for (std::size_t k = 0; k < times.size(); ++k) {
    os << times[k] << ',' << energies[k] << ',';
    if (std::isnan(leakage[k])) os << "nan";
    else os << leakage[k];
    os << '\n';
  }
}

StateVector evolve_static(const SparseOperator& H, const StateVector& psi, double t, const KrylovOptions& opts) {
  if (!H.hermitian()) throw Error("evolve_static needs a Hermitian operator");
  if (!(*H.basis_in() == *psi.basis())) throw Error("evolve_static: basis mismatch");
  Vec v = psi.amplitudes();
  krylov_propagate([&H](const Vec& x, Vec& y) { H.multiply(x, y); }, v, t, opts);
  return StateVector(psi.basis(), std::move(v));
}

ParametricOperator::ParametricOperator(std::vector<SparseOperator> terms) : n_terms_(terms.size()) {
  if (terms.empty()) throw Error("parametric operator needs at least one term");
  basis_ = terms.front().basis_in();
  for (const auto& t : terms) {
    if (!(*t.basis_in() == *basis_) || !(*t.basis_out() == *basis_)) throw Error("parametric terms must share one basis");
    hermitian_ = hermitian_ && t.hermitian();
  }
  const std::size_t rows = basis_->dim();
  row_ptr_.assign(rows + 1, 0);
  std::vector<std::size_t> cols;
  for (std::size_t r = 0; r < rows; ++r) {
    cols.clear();
    for (const auto& t : terms) {
      auto rp = t.row_ptr();
      auto ci = t.col_idx();
      cols.insert(cols.end(), ci.begin() + static_cast<std::ptrdiff_t>(rp[r]),
                  ci.begin() + static_cast<std::ptrdiff_t>(rp[r + 1]));
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    col_.insert(col_.end(), cols.begin(), cols.end());
    row_ptr_[r + 1] = col_.size();
  }
  const std::size_t nnz = col_.size();
  values_.assign(nnz * n_terms_, cplx(0));
  for (std::size_t k = 0; k < n_terms_; ++k) {
    auto rp = terms[k].row_ptr();
    auto ci = terms[k].col_idx();
    auto va = terms[k].values();
    for (std::size_t r = 0; r < rows; ++r) {
      auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
      auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
      for (std::size_t q = rp[r]; q < rp[r + 1]; ++q) {
        const auto pos = static_cast<std::size_t>(std::lower_bound(first, last, ci[q]) - col_.begin());
        values_[k * nnz + pos] = va[q];
      }
    }
  }
}

SparseOperator ParametricOperator::at(std::span<const double> coeffs) const {
  if (coeffs.size() != n_terms_) throw Error("coefficient count does not match parametric terms");
  const std::size_t nnz = col_.size();
  std::vector<cplx> vals(nnz, cplx(0));
  for (std::size_t k = 0; k < n_terms_; ++k) {
    const double c = coeffs[k];
    if (!std::isfinite(c)) throw Error("non-finite drive coefficient");
    if (c == 0.0) continue;
    const cplx* src = values_.data() + k * nnz;
    for (std::size_t p = 0; p < nnz; ++p) vals[p] += c * src[p];
  }
  return SparseOperator::from_csr(basis_, basis_, row_ptr_, col_, std::move(vals), hermitian_);
}

double leakage_from(const StateVector& psi, std::span<const StateVector> target) {
  double kept = 0;
  for (const auto& t : target) kept += fidelity(t, psi);
  return 1.0 - kept;
}

Trajectory evolve_driven(const Drive& drive, const StateVector& psi, double duration, double dt, int krylov_dim,
                         int record_every, std::span<const StateVector> target) {
  if (!(duration > 0) || !(dt > 0)) throw Error("drive duration and step must be positive");
  if (!(*drive.op.basis() == *psi.basis())) throw Error("drive/state basis mismatch");
  const auto steps = static_cast<long>(std::ceil(duration / dt - 1e-12));
  const double h = duration / static_cast<double>(steps);
  const double norm0 = psi.norm();
  KrylovOptions kopts;
  kopts.krylov_dim = krylov_dim;

  Trajectory traj;
  Vec v = psi.amplitudes();
  Vec Hv;
  auto record = [&](double t, const SparseOperator& H) {
    H.multiply(v, Hv);
    StateVector s(psi.basis(), v);
    traj.times.push_back(t);
    traj.energies.push_back(v.dot(Hv).real() / v.squaredNorm());
    traj.leakage.push_back(target.empty() ? std::numeric_limits<double>::quiet_NaN() : leakage_from(s, target));
    traj.states.push_back(std::move(s));
    traj.norm_drift = std::max(traj.norm_drift, std::abs(v.norm() - norm0));
  };

  record(0.0, drive.op.at(drive.coeffs(0.0)));
  for (long k = 0; k < steps; ++k) {
    const double tm = (static_cast<double>(k) + 0.5) * h;
    const SparseOperator H = drive.op.at(drive.coeffs(tm));
    krylov_propagate([&H](const Vec& x, Vec& y) { H.multiply(x, y); }, v, h, kopts);
    traj.norm_drift = std::max(traj.norm_drift, std::abs(v.norm() - norm0));
    const bool last = k + 1 == steps;
    if (last || (record_every > 0 && (k + 1) % record_every == 0)) {
      const double t = static_cast<double>(k + 1) * h;
      record(t, drive.op.at(drive.coeffs(t)));
    }
  }
  return traj;
}

Drive schedule_drive(const LatticeLayout& layout, const CouplingAssignment& base, const Schedule& sched,
                     const BasisPtr& basis) {
  sched.validate();
  CouplingAssignment fixed = base;
  const auto present = layout.classes();
  std::vector<SparseOperator> terms;
  for (const auto& seg : sched.segments) {
    if (std::find(present.begin(), present.end(), seg.cls) == present.end())
      throw Error("scheduled class not present in layout: " + seg.cls);
    fixed[seg.cls] = 0.0;
  }
  terms.push_back(assemble(layout, fixed, basis));
  for (const auto& seg : sched.segments) terms.push_back(class_operator(layout, seg.cls, basis));
  auto segs = sched.segments;
  const double T = sched.duration;
  return Drive{ParametricOperator(std::move(terms)), [segs, T](double t) {
                 std::vector<double> c{1.0};
                 for (const auto& s : segs) c.push_back(s.at(t / T));
                 return c;
               }};
}

Trajectory evolve_schedule(const LatticeLayout& layout, const CouplingAssignment& base, const Schedule& sched,
                           const StateVector& psi, std::span<const StateVector> target) {
  const Drive d = schedule_drive(layout, base, sched, psi.basis());
  return evolve_driven(d, psi, sched.duration, sched.dt, sched.krylov_dim, sched.record_every, target);
}

double adiabatic_metric(const Trajectory& traj, std::span<const StateVector> target) {
  if (traj.states.empty()) throw Error("empty trajectory");
  return leakage_from(traj.final_state(), target);
}

}  // namespace sgq
