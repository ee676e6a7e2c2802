#include <doctest.h>

#include <sstream>

#include "oracle.hpp"
#include "sgq/dynamics.hpp"
#include "sgq/logical.hpp"
#include "sgq/models.hpp"
#include "sgq/spectral.hpp"

using namespace sgq;

namespace {

// Four corner spins u=0, l=1, d=2, r=3 with glue bonds (l,d), (r,u) and
// corner bonds (u,l), (d,r).
LatticeLayout corner4() {
  LatticeLayout lay;
  lay.kind = "corner";
  for (int i = 0; i < 4; ++i) lay.sites.push_back({i, i / 2, 0, i % 2});
  lay.bonds = {{0, 1, coupling::corner}, {2, 3, coupling::corner}, {1, 2, coupling::glue}, {3, 0, coupling::glue}};
  lay.couplings = {{coupling::corner, 1.0}, {coupling::glue, 0.0}};
  return lay;
}

Schedule glue_ramp(double tau) {
  Schedule s;
  s.duration = tau;
  s.segments = {{coupling::glue, RampShape::smoothstep, 0.0, 5.0}};
  return s;
}

// Dense midpoint integration of the same ramp.
oracle::Vec dense_ramp(const oracle::Vec& v0, double tau, double dt, bool backwards) {
  oracle::Vec v = v0;
  const oracle::Mat hc = oracle::heis(4, 0, 1) + oracle::heis(4, 2, 3);
  const oracle::Mat hg = oracle::heis(4, 1, 2) + oracle::heis(4, 3, 0);
  const int n = static_cast<int>(std::ceil(tau / dt - 1e-12));
  const double h = tau / n;
  for (int k = 0; k < n; ++k) {
    double s = (k + 0.5) * h / tau;
    if (backwards) s = 1.0 - s;
    const double g = 5.0 * s * s * (3 - 2 * s);
    v = oracle::propagate(hc + g * hg, v, h);
  }
  return v;
}

}  // namespace

TEST_CASE("ramp shapes") {
  Ramp r{"x", RampShape::smoothstep, 1.0, 3.0};
  CHECK(r.at(0.0) == 1.0);
  CHECK(r.at(1.0) == 3.0);
  CHECK(r.at(0.5) == doctest::Approx(2.0));
  const double eps = 1e-6;
  CHECK(std::abs(r.at(eps) - r.at(0.0)) / eps < 1e-4);
  CHECK(std::abs(r.at(1.0) - r.at(1.0 - eps)) / eps < 1e-4);
  CHECK(Ramp{"x", RampShape::linear, 0.0, 2.0}.at(0.25) == doctest::Approx(0.5));
  CHECK(Ramp{"x", RampShape::constant, 4.0, 9.0}.at(0.7) == 4.0);
  Schedule bad;
  bad.duration = -1;
  CHECK_THROWS_AS(bad.validate(), Error);
  Schedule m;
  m.krylov_dim = 1;
  CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("static evolution basics") {
  const auto b = build_basis(6, 0.0);
  const auto psi = StateVector::random(b, 11);
  CHECK((evolve_static(SparseOperator::zero(b), psi, 3.0).amplitudes() - psi.amplitudes()).norm() < 1e-14);

  const auto mg = chain_j1j2(6, 1.0, 0.5, true);
  const auto H = assemble(mg, mg.couplings, b);
  const auto sol = lowest_eigenpairs(H, 1);
  const auto& g = sol.eigenvectors[0];
  const auto gt = evolve_static(H, g, 2.5);
  const cplx ov = inner(g, gt);
  CHECK(std::abs(ov) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(ov - std::polar(1.0, -sol.eigenvalues[0] * 2.5)) < 1e-9);

  const auto t = evolve_static(H, psi, 7.0);
  CHECK(std::abs(t.norm() - 1.0) < 1e-9);
  CHECK(std::abs(expectation(H, t).real() - expectation(H, psi).real()) < 1e-8 * std::abs(expectation(H, psi).real()) + 1e-12);
}

TEST_CASE("two-site singlet-triplet beat") {
  const auto b = build_basis(2, 0.0);
  const auto H = exchange_bond(b, 0, 1);
  const auto ud = StateVector::basis_state(b, 0b01);
  for (double t : {0.3, 1.0, 2.0, 5.5}) {
    const auto psi = evolve_static(H, ud, t);
    CHECK(std::norm(inner(ud, psi)) == doctest::Approx(std::pow(std::cos(t / 2), 2)).epsilon(1e-10));
    const oracle::Vec ref = oracle::propagate(oracle::restrict(oracle::heis(2, 0, 1), {1, 2}), ud.amplitudes(), t);
    CHECK(std::abs(std::abs(ref.dot(psi.amplitudes())) - 1.0) < 1e-10);
  }
}

TEST_CASE("Krylov propagation matches the dense exponential") {
  const auto lad = ladder(4, 1.0, 0.3, 0.7, 0.2, true);
  const auto b = build_basis(8);
  const auto H = assemble(lad, lad.couplings, b);
  const auto psi = StateVector::random(b, 21);
  for (double t : {0.5, 3.0, 10.0}) {
    const oracle::Vec ref = oracle::propagate(H.to_dense(), psi.amplitudes(), t);
    const auto ours = evolve_static(H, psi, t);
    CHECK(1.0 - std::norm(ref.dot(ours.amplitudes())) < 1e-9);
    CHECK((ref - ours.amplitudes()).norm() < 1e-8);
  }
}

TEST_CASE("constant schedule equals static evolution") {
  const auto mg = chain_j1j2(8, 1.0, 0.5, true);
  const auto b = build_basis(8, 0.0);
  Schedule s;
  s.duration = 4.0;
  s.segments = {{coupling::second, RampShape::constant, 0.5, 0.5}};
  const auto psi = StateVector::random(b, 3);
  const auto traj = evolve_schedule(mg, mg.couplings, s, psi);
  const auto ref = evolve_static(assemble(mg, mg.couplings, b), psi, 4.0);
  CHECK(fidelity(traj.final_state(), ref) > 1 - 1e-9);
  CHECK(traj.norm_drift < 1e-8);
}

TEST_CASE("scheduled evolution matches dense midpoint integration") {
  const auto lay = corner4();
  const auto b = build_basis(4);
  const auto psi = StateVector::random(b, 9);
  Schedule s = glue_ramp(6.0);
  s.dt = 0.2;
  const auto traj = evolve_schedule(lay, lay.couplings, s, psi);
  const oracle::Vec ref = dense_ramp(psi.amplitudes(), 6.0, 0.2, false);
  CHECK(1.0 - std::norm(ref.dot(traj.final_state().amplitudes())) < 1e-9);
}

TEST_CASE("unitarity under a schedule") {
  const auto lay = corner4();
  const auto b = build_basis(4);
  const auto a = StateVector::random(b, 1), c = StateVector::random(b, 2);
  const auto s = glue_ramp(10.0);
  const auto at = evolve_schedule(lay, lay.couplings, s, a).final_state();
  const auto ct = evolve_schedule(lay, lay.couplings, s, c).final_state();
  CHECK(std::abs(inner(at, ct) - inner(a, c)) < 1e-8);
}

TEST_CASE("corner glue ramp is adiabatic") {
  const auto lay = corner4();
  const auto b = build_basis(4);
  // Corner singlets (u,l), (d,r): the unglued |11>-type corner state.
  const auto start = dimer_state(b, {{0, 1}, {2, 3}});
  CouplingAssignment end = lay.couplings;
  end[coupling::glue] = 5.0;
  const auto glued = lowest_eigenpairs(assemble(lay, end, b), 1).eigenvectors[0];
  const std::vector<StateVector> target{glued};

  const auto fwd = evolve_schedule(lay, lay.couplings, glue_ramp(200.0), start, target);
  CHECK(fidelity(fwd.final_state(), glued) > 0.99);
  CHECK(adiabatic_metric(fwd, target) < 0.01);

  const oracle::Vec dense_fwd = dense_ramp(start.amplitudes(), 200.0, 0.25, false);
  CHECK(std::norm(glued.amplitudes().dot(dense_fwd)) > 0.99);

  const auto back = evolve_schedule(lay, end, glue_ramp(200.0).reversed(), fwd.final_state());
  CHECK(fidelity(back.final_state(), start) > 0.98);

  double prev = 1.0;
  for (double tau : {5.0, 10.0, 20.0}) {
    const double leak = adiabatic_metric(evolve_schedule(lay, lay.couplings, glue_ramp(tau), start), target);
    CHECK(leak < prev);
    prev = leak;
  }
}

TEST_CASE("leakage metric limits") {
  const auto b = build_basis(4, 0.0);
  const auto s = StateVector::basis_state(b, 0b0011), o = StateVector::basis_state(b, 0b0101);
  CHECK(leakage_from(s, std::vector<StateVector>{s}) == doctest::Approx(0.0));
  CHECK(leakage_from(s, std::vector<StateVector>{o}) == doctest::Approx(1.0));
}

TEST_CASE("trajectory recording and CSV export") {
  const auto lay = corner4();
  const auto b = build_basis(4, 0.0);
  Schedule s = glue_ramp(2.0);
  s.record_every = 2;
  const auto traj = evolve_schedule(lay, lay.couplings, s, dimer_state(b, {{0, 1}, {2, 3}}));
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.times.back() == doctest::Approx(2.0));
  CHECK(traj.states.size() == traj.times.size());
  CHECK(traj.times.size() >= 3);
  std::ostringstream os;
  traj.write_csv(os);
  CHECK(os.str().rfind("time,energy,leakage", 0) == 0);
}
