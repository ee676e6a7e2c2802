#include "sgq/observables.hpp"

#include <cmath>
#include <iomanip>

#include "sgq/spectral.hpp"

namespace sgq {

namespace {

void require_ladder(const LatticeLayout& layout) {
  if (layout.kind != "ladder") throw Error("observable needs a ladder layout");
}

int leg_site(const LatticeLayout& layout, int n, int leg) {
  if (layout.kind == "ladder") return layout.ladder_site(n, leg);
  if (leg != 0) throw Error("chains have a single leg");
  return n;
}

double rung_sz(Config c, const Pair& rung) {
  return (((c >> rung.first) & 1) ? 0.5 : -0.5) + (((c >> rung.second) & 1) ? 0.5 : -0.5);
}

// Hermitian matrix of `op` restricted to span(states).
Mat projected(const SparseOperator& op, const std::vector<StateVector>& states) {
  const auto g = static_cast<Eigen::Index>(states.size());
  Mat m(g, g);
  for (Eigen::Index b = 0; b < g; ++b) {
    const StateVector ob = apply(op, states[static_cast<std::size_t>(b)]);
    for (Eigen::Index a = 0; a < g; ++a) m(a, b) = inner(states[static_cast<std::size_t>(a)], ob);
  }
  return 0.5 * (m + m.adjoint());
}

SparseOperator dimer_operator(const LatticeLayout& layout, const BasisPtr& basis, int leg) {
  const int L = layout.length;
  const int nb = layout.pbc ? L : L - 1;
  SparseOperator op = SparseOperator::zero(basis);
  for (int n = 0; n < nb; ++n) {
    const double w = -(2.0 / L) * ((n % 2 == 0) ? 1.0 : -1.0);
    op = op + w * exchange_bond(basis, leg_site(layout, n, leg), leg_site(layout, (n + 1) % L, leg));
  }
  return op;
}

// Top eigenvectors of `op` inside span(states), kept if within tol of the max.
std::vector<StateVector> top_subspace(const SparseOperator& op, const std::vector<StateVector>& states, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(projected(op, states));
  const auto g = es.eigenvalues().size();
  const double top = es.eigenvalues()(g - 1);
  std::vector<StateVector> out;
  for (Eigen::Index k = g - 1; k >= 0 && top - es.eigenvalues()(k) <= tol; --k) {
    Vec v = Vec::Zero(states.front().amplitudes().size());
    for (Eigen::Index a = 0; a < g; ++a) v += es.eigenvectors()(a, k) * states[static_cast<std::size_t>(a)].amplitudes();
    out.emplace_back(states.front().basis(), std::move(v));
  }
  return out;
}

}  // namespace

double spin_correlation(const StateVector& psi, int i, int j) {
  return expectation(exchange_bond(psi.basis(), i, j), psi).real();
}

double dimer_order(const StateVector& psi, const LatticeLayout& layout, int leg) {
  return expectation(dimer_operator(layout, psi.basis(), leg), psi).real();
}

double rung_singlet_density(const StateVector& psi, const LatticeLayout& layout) {
  require_ladder(layout);
  double acc = 0;
  for (int n = 0; n < layout.length; ++n)
    acc += 0.25 - spin_correlation(psi, layout.ladder_site(n, 0), layout.ladder_site(n, 1));
  return acc / layout.length;
}

std::vector<Pair> ladder_rungs(const LatticeLayout& layout) {
  require_ladder(layout);
  std::vector<Pair> r;
  for (int n = 0; n < layout.length; ++n) r.emplace_back(layout.ladder_site(n, 0), layout.ladder_site(n, 1));
  return r;
}

double string_order(const StateVector& psi, const LatticeLayout& layout, int i, int j) {
  const auto rungs = ladder_rungs(layout);
  if (i < 0 || j >= layout.length || j - i < 2) throw Error("string order needs 0 <= i, i + 2 <= j < L");
  const auto& basis = *psi.basis();
  const Vec& a = psi.amplitudes();
  double acc = 0;
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    const double p = std::norm(a[static_cast<Eigen::Index>(k)]);
    if (p == 0) continue;
    const Config c = basis.config_of(k);
    const double si = rung_sz(c, rungs[static_cast<std::size_t>(i)]);
    const double sj = rung_sz(c, rungs[static_cast<std::size_t>(j)]);
    if (si == 0 || sj == 0) continue;
    double m = 0;
    for (int n = i + 1; n < j; ++n) m += rung_sz(c, rungs[static_cast<std::size_t>(n)]);
    const double sign = (std::lround(m) % 2 == 0) ? 1.0 : -1.0;
    acc += p * si * sj * sign;
  }
  return -acc;
}

cplx twist_expectation(const StateVector& psi, const SparseOperator& twist) { return expectation(twist, psi); }

std::string to_string(Phase p) {
  switch (p) {
    case Phase::C: return "C";
    case Phase::S: return "S";
    case Phase::H: return "H";
    case Phase::R: return "R";
    case Phase::unclassified: break;
  }
  return "unclassified";
}

Phase decide_phase(const std::map<std::string, double>& obs, double t) {
  const double d0 = obs.at("dimer_leg0"), d1 = obs.at("dimer_leg1");
  const double rho = obs.at("rung_singlet_density"), so = obs.at("string_order");
  const bool n0 = std::abs(d0) > t, n1 = std::abs(d1) > t;
  if (n0 && n1) return (d0 > 0) == (d1 > 0) ? Phase::C : Phase::S;
  if (n0 || n1) return Phase::unclassified;
  if (rho > 0.5 + t && std::abs(so) < rho - t) return Phase::R;
  if (rho < 0.5 - t && so > t && so > rho + t) return Phase::H;
  return Phase::unclassified;
}

PhasePoint classify_phase(const CouplingAssignment& couplings, int L, const ClassifierOptions& opts) {
  auto get = [&](const char* k, double d) {
    auto it = couplings.find(k);
    return it == couplings.end() ? d : it->second;
  };
  const LatticeLayout lay = ladder(L, get(coupling::leg, 1.0), get(coupling::second, 0.0), get(coupling::rung, 0.0),
                                   get(coupling::diag, 0.0), opts.pbc);
  for (const auto& [k, v] : couplings)
    if (!lay.couplings.contains(k)) throw Error("coupling '" + k + "' is not a ladder coupling");
  CouplingAssignment full = lay.couplings;
  for (const auto& [k, v] : couplings) full[k] = v;

  const auto basis = build_basis(lay.n_sites(), 0.0);
  const SparseOperator H = assemble(lay, full, basis);
  const EigenSolution sol = lowest_eigenpairs(H, 4);
  std::vector<StateVector> ground;
  for (std::size_t k = 0; k < sol.eigenvalues.size(); ++k)
    if (sol.eigenvalues[k] - sol.eigenvalues[0] <= opts.degeneracy_window) ground.push_back(sol.eigenvectors[k]);
  if (ground.size() > 1) ground = top_subspace(dimer_operator(lay, basis, 0), ground, 1e-8);
  if (ground.size() > 1) ground = top_subspace(dimer_operator(lay, basis, 1), ground, 1e-8);
  const StateVector& psi = ground.front();

  PhasePoint pt;
  pt.couplings = full;
  pt.observables["energy"] = sol.eigenvalues[0];
  pt.observables["ground_degeneracy"] = static_cast<double>(
      std::count_if(sol.eigenvalues.begin(), sol.eigenvalues.end(),
                    [&](double e) { return e - sol.eigenvalues[0] <= opts.degeneracy_window; }));
  pt.observables["dimer_leg0"] = dimer_order(psi, lay, 0);
  pt.observables["dimer_leg1"] = dimer_order(psi, lay, 1);
  pt.observables["rung_singlet_density"] = rung_singlet_density(psi, lay);
  pt.observables["string_order"] = string_order(psi, lay, 0, L / 2);
  pt.observables["plus_twist_re"] = twist_expectation(psi, plus_twist_operator(basis, ladder_rungs(lay))).real();
  pt.label = decide_phase(pt.observables, opts.threshold);
  return pt;
}

std::vector<PhasePoint> phase_scan(const CouplingAssignment& base, const std::vector<ScanAxis>& axes, int L,
                                   const ClassifierOptions& opts) {
  if (axes.size() > 2) throw Error("phase scans take at most two axes");
  std::vector<CouplingAssignment> grid{base};
  for (const auto& ax : axes) {
    if (ax.values.empty()) throw Error("scan axis '" + ax.coupling + "' has no values");
    std::vector<CouplingAssignment> next;
    for (const auto& g : grid)
      for (double v : ax.values) {
        auto c = g;
        c[ax.coupling] = v;
        next.push_back(std::move(c));
      }
    grid = std::move(next);
  }
  std::vector<PhasePoint> out;
  for (const auto& c : grid) out.push_back(classify_phase(c, L, opts));
  return out;
}

void write_phase_csv(std::ostream& os, const std::vector<PhasePoint>& points) {
  if (points.empty()) return;
  const auto& c0 = points.front().couplings;
  const auto& o0 = points.front().observables;
  bool first = true;
  for (const auto& [k, v] : c0) os << (first ? "" : ",") << k, first = false;
  for (const auto& [k, v] : o0) os << "," << k;
  os << ",label\n" << std::setprecision(17);
  for (const auto& p : points) {
    first = true;
    for (const auto& [k, v] : p.couplings) os << (first ? "" : ",") << v, first = false;
    for (const auto& [k, v] : p.observables) os << "," << v;
    os << "," << to_string(p.label) << "\n";
  }
}

}  // namespace sgq
