#include "sgq/protocols.hpp"

#include <bit>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>

#include "sgq/observables.hpp"
#include "sgq/spectral.hpp"

namespace sgq {

namespace {

constexpr double kPi = std::numbers::pi;

nlohmann::json matrix_json(const Mat& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    out.push_back(row);
  }
  return out;
}

Mat power(const Mat& m, int k) {
  Mat r = Mat::Identity(m.rows(), m.cols());
  for (int i = 0; i < k; ++i) r = r * m;
  return r;
}

ProtocolReport finish(ProtocolReport r) {
  r.fidelity = gate_fidelity(r.corrected, r.target);
  r.flagged = r.action.leakage > r.leakage_threshold;
  return r;
}

ProtocolReport exact_unitary_report(const std::string& name, const LogicalCode& code, const SparseOperator& U,
                                    const Mat& target, double threshold) {
  ProtocolReport r;
  r.protocol = name;
  r.action = extract_action(code, code, U);
  r.target = target;
  r.corrected = r.action.matrix;
  r.leakage_threshold = threshold;
  r.phases["global"] = wrap_phase(r.action.global_phase);
  return finish(std::move(r));
}

Mat kron_power(const Mat& m, std::size_t n) {
  Mat r = Mat::Identity(1, 1);
  for (std::size_t k = 0; k < n; ++k) {
    Mat next(r.rows() * m.rows(), r.cols() * m.cols());
    for (Eigen::Index i = 0; i < r.rows(); ++i)
      for (Eigen::Index j = 0; j < r.cols(); ++j) next.block(i * m.rows(), j * m.cols(), m.rows(), m.cols()) = r(i, j) * m;
    r = std::move(next);
  }
  return r;
}

CouplingAssignment couplings_at_end(const LatticeLayout& layout, const CouplingAssignment& base, const Schedule& s) {
  CouplingAssignment c = layout.couplings;
  for (const auto& [k, v] : base) c[k] = v;
  for (const auto& seg : s.segments) c[seg.cls] = seg.at(1.0);
  return c;
}

// Lowest state of H inside the range of `project`; sign fixed so the
// largest-magnitude amplitude is real positive.
StateVector lowest_in_sector(const SparseOperator& H, const std::function<void(Vec&)>& project) {
  LanczosOptions o;
  o.filter = project;
  StateVector v = lowest_eigenpairs(H, 1, 1e-10, o).eigenvectors.front();
  Eigen::Index k = 0;
  v.amplitudes().cwiseAbs().maxCoeff(&k);
  const cplx ph = std::polar(1.0, -std::arg(v.amplitudes()(k)));
  return StateVector(v.basis(), v.amplitudes() * ph);
}

}  // namespace

double wrap_phase(double a) {
  double w = std::remainder(a, 2 * kPi);
  if (w <= -kPi) w += 2 * kPi;
  return w;
}

nlohmann::json to_json(const ProtocolReport& r) {
  nlohmann::json j;
  j["protocol"] = r.protocol;
  j["parameters"] = r.parameters;
  j["action"] = to_json(r.action);
  j["target"] = matrix_json(r.target);
  j["corrected"] = matrix_json(r.corrected);
  j["fidelity"] = r.fidelity;
  j["leakage"] = r.action.leakage;
  j["phases"] = r.phases;
  j["leakage_threshold"] = r.leakage_threshold;
  j["flagged"] = r.flagged;
  j["diagnostics"] = r.diagnostics;
  return j;
}

void write_csv_header(std::ostream& os) { os << "protocol,parameters,fidelity,leakage,fidelity_to_unitary,flagged,phases\n"; }

void write_csv_row(std::ostream& os, const ProtocolReport& r) {
  std::string params = r.parameters.dump();
  for (char& c : params)
    if (c == ',') c = ';';
  std::ostringstream ph;
  ph << std::setprecision(17);
  bool first = true;
  for (const auto& [k, v] : r.phases) ph << (first ? "" : ";") << k << "=" << v, first = false;
  os << std::setprecision(17) << r.protocol << "," << params << "," << r.fidelity << "," << r.action.leakage << ","
     << r.action.fidelity_to_unitary << "," << (r.flagged ? "true" : "false") << "," << ph.str() << "\n";
}

ProtocolReport run_pump(const LogicalCode& code, int shift, double threshold) {
  if (code.rings.empty()) throw Error("pump needs a ring code");
  const int nq = code.n_qubits();
  if (static_cast<std::size_t>(nq) != code.rings.size()) throw Error("pump expects one qubit per ring");
  const auto U = translation_operator(code.basis, code.rings, shift);
  auto r = exact_unitary_report("pump", code, U, kron_power(power(gates::pauli_x(), ((shift % 2) + 2) % 2), code.rings.size()),
                                threshold);
  r.parameters = {{"shift", shift}, {"ring_sizes", nlohmann::json::array()}};
  for (const auto& ring : code.rings) r.parameters["ring_sizes"].push_back(ring.size());
  return r;
}

ProtocolReport run_twist(const LogicalCode& code, int times, double threshold) {
  if (code.rings.empty()) throw Error("twist needs a ring code");
  if (times < 0) throw Error("twist count must be non-negative");
  SparseOperator F = SparseOperator::identity(code.basis);
  for (const auto& ring : code.rings) F = F * twist_operator(code.basis, ring);
  SparseOperator U = SparseOperator::identity(code.basis);
  for (int k = 0; k < times; ++k) U = U * F;
  auto r = exact_unitary_report("twist", code, U, kron_power(power(gates::pauli_z(), times % 2), code.rings.size()),
                                threshold);
  r.parameters = {{"times", times}};
  return r;
}

TeleportResult run_teleport_h(const Eigen::Vector2cd& psi, int m) {
  if (m != 0 && m != 1) throw Error("measurement outcome must be 0 or 1");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw Error("teleportation input must be normalized");
  // Two-qubit amplitudes indexed (s, a) -> 2 s + a.
  Eigen::Vector4cd st;
  const double h = 1.0 / std::sqrt(2.0);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) st(2 * s + a) = psi(s) * h;
  st(3) = -st(3);  // CZ
  Eigen::Vector4cd after;
  for (int a = 0; a < 2; ++a) {
    after(a) = h * (st(a) + st(2 + a));
    after(2 + a) = h * (st(a) - st(2 + a));
  }
  TeleportResult r;
  Eigen::Vector2cd anc(after(2 * m), after(2 * m + 1));
  r.probability = anc.squaredNorm();
  r.pre_correction = anc / std::sqrt(r.probability);
  r.correction = m;
  r.output = m ? Eigen::Vector2cd(r.pre_correction(1), r.pre_correction(0)) : r.pre_correction;
  return r;
}

Schedule linear_path_schedule(const CouplingAssignment& from, const CouplingAssignment& to, double duration,
                              RampShape shape) {
  Schedule s;
  s.duration = duration;
  for (const auto& [k, v] : to) {
    auto it = from.find(k);
    if (it == from.end()) throw Error("coupling '" + k + "' missing from the start point");
    if (it->second != v) s.segments.push_back({k, shape, it->second, v});
  }
  for (const auto& [k, v] : from)
    if (!to.contains(k)) throw Error("coupling '" + k + "' missing from the end point");
  return s;
}

ProtocolReport run_shuffle(const LatticeLayout& lay, const CouplingAssignment& point_c,
                           const CouplingAssignment& point_r, const Schedule& sched, const ShuffleOptions& opts) {
  if (lay.kind != "ladder" || !lay.pbc) throw Error("shuffle needs a periodic ladder");
  sched.validate();
  CouplingAssignment pc = lay.couplings, pr = lay.couplings;
  for (const auto& [k, v] : point_c) pc[k] = v;
  for (const auto& [k, v] : point_r) pr[k] = v;
  for (const auto& [k, v] : pc) {
    double start = v, end = v;
    for (const auto& seg : sched.segments)
      if (seg.cls == k) start = seg.at(0.0), end = seg.at(1.0);
    if (std::abs(start - v) > 1e-12 || std::abs(end - pr.at(k)) > 1e-12)
      throw Error("schedule does not connect the two points in coupling '" + k + "'");
  }
  const int L = lay.length;

  const auto basis = build_basis(lay.n_sites(), 0.0);
  std::vector<int> leg0, leg1;
  for (int n = 0; n < L; ++n) leg0.push_back(lay.ladder_site(n, 0)), leg1.push_back(lay.ladder_site(n, 1));
  const SparseOperator T = translation_operator(basis, {leg0, leg1});
  const SparseOperator flip = spin_flip(basis);
  auto projector = [&](int t) {
    return [&, t](Vec& v) {
      Vec y;
      flip.multiply(v, y);
      v = 0.5 * (v + y);
      Vec acc = v, cur = v;
      for (int k = 1; k < L; ++k) {
        T.multiply(cur, y);
        cur = y;
        acc += (t == 1 || k % 2 == 0 ? 1.0 : -1.0) * cur;
      }
      v = acc / static_cast<double>(L);
    };
  };

  const SparseOperator Hc = assemble(lay, pc, basis), Hr = assemble(lay, pr, basis);
  const StateVector aa = dimer_state(basis, [&] {
    auto p = ring_covering(leg0, 0), q = ring_covering(leg1, 0);
    p.insert(p.end(), q.begin(), q.end());
    return p;
  }());
  std::vector<StateVector> c_states;
  for (int t : {1, -1}) {
    StateVector v = lowest_in_sector(Hc, projector(t));
    const cplx ov = inner(v, aa);
    if (std::abs(ov) < 1e-3) throw Error("C-point sector state has no weight on the aligned covering");
    c_states.emplace_back(basis, v.amplitudes() * std::polar(1.0, -std::arg(ov)));
  }
  nlohmann::json labels = nlohmann::json::object();
  if (opts.check_phases) {
    // At finite size the C doublet is split; its own spread sets the window.
    ClassifierOptions co;
    const double split = std::abs(expectation(Hc, c_states[0]).real() - expectation(Hc, c_states[1]).real());
    if (split > opts.max_c_splitting)
      throw Error("shuffle start point: C doublet split by " + std::to_string(split) + ", not a C point");
    co.degeneracy_window = split + 1e-6;
    const Phase lc = classify_phase(pc, L, co).label, lr = classify_phase(pr, L).label;
    if (lc != Phase::C) throw Error("shuffle start point classifies as " + to_string(lc) + ", expected C");
    if (lr != Phase::R) throw Error("shuffle end point classifies as " + to_string(lr) + ", expected R");
    labels = {{"point_c", to_string(lc)}, {"point_r", to_string(lr)}, {"c_window", co.degeneracy_window}};
  }
  const double h = 1.0 / std::sqrt(2.0);
  LogicalCode in;
  in.basis = basis;
  in.labels = {"0", "1"};
  in.construction = "C-point sector states, covering aligned";
  in.codewords = {StateVector(basis, h * (c_states[0].amplitudes() + c_states[1].amplitudes())),
                  StateVector(basis, h * (c_states[0].amplitudes() - c_states[1].amplitudes()))};
  LogicalCode out;
  out.basis = basis;
  out.labels = {"+", "-"};
  out.construction = "R-point sector states";
  out.codewords = {lowest_in_sector(Hr, projector(1)), lowest_in_sector(Hr, projector(-1))};

  ProtocolReport r;
  r.protocol = "shuffle";
  r.action = extract_action(in, out, [&](const StateVector& s) {
    return evolve_schedule(lay, pc, sched, s).final_state();
  });
  r.target = gates::hadamard();
  // Remove the diagonal phase freedom on both sides.
  Mat M = r.action.matrix;
  for (Eigen::Index i = 0; i < 2; ++i) M.row(i) *= std::polar(1.0, -std::arg(M(i, 0)));
  const double col_phase = std::arg(M(0, 1));
  M.col(1) *= std::polar(1.0, -col_phase);
  r.corrected = M;
  r.phases["global"] = wrap_phase(r.action.global_phase);
  r.phases["row_1"] = wrap_phase(std::arg(r.action.matrix(1, 0)) - std::arg(r.action.matrix(0, 0)));
  r.phases["column_1"] = wrap_phase(col_phase);
  r.leakage_threshold = opts.leakage_threshold;
  r.parameters = {{"L", L}, {"duration", sched.duration}, {"dt", sched.dt}, {"point_c", pc}, {"point_r", pr}};
  nlohmann::json overlaps = nlohmann::json::array();
  for (Eigen::Index j = 0; j < 2; ++j)
    overlaps.push_back({std::norm(r.action.matrix(0, j)), std::norm(r.action.matrix(1, j))});
  r.diagnostics["overlap_sq"] = overlaps;
  if (!labels.empty()) r.diagnostics["endpoint_phases"] = labels;
  r.diagnostics["c_sector_energies"] = {expectation(Hc, c_states[0]).real(), expectation(Hc, c_states[1]).real()};
  r.diagnostics["r_sector_energies"] = {expectation(Hr, out.codewords[0]).real(),
                                        expectation(Hr, out.codewords[1]).real()};
  return finish(std::move(r));
}

std::string to_string(TwistMode m) { return m == TwistMode::instant ? "instant" : "flux"; }

std::string to_string(Calibration c) { return c == Calibration::phases ? "phases" : "reference"; }

Calibration calibration_from(const std::string& s) {
  if (s == "phases") return Calibration::phases;
  if (s == "reference") return Calibration::reference;
  throw Error("unknown calibration '" + s + "'");
}

TwistMode twist_mode_from(const std::string& s) {
  if (s == "instant") return TwistMode::instant;
  if (s == "flux") return TwistMode::flux;
  throw Error("unknown twist mode '" + s + "'");
}

ProtocolReport run_gtg(const LatticeLayout& net, const CouplingAssignment& base, const Schedule& glue, int n_qubits,
                       const GtgOptions& opts) {
  if (net.kind != "ring_network" || net.corners.size() != 1) throw Error("GTG needs a ring network with one corner");
  if (n_qubits != 2 && n_qubits != 3) throw Error("GTG supports 2 or 3 qubits");
  if (static_cast<int>(net.rings.size()) != n_qubits || static_cast<int>(net.corners[0].rings.size()) != n_qubits)
    throw Error("GTG: every ring must meet at the corner");
  glue.validate();
  if (opts.free_time < 0) throw Error("free time must be non-negative");

  const auto basis = build_basis(net.n_sites(), 0.0);
  const LogicalCode code = dimer_code(basis, net.rings);
  const std::vector<int> loop = glued_loop_order(net, 0);
  const CouplingAssignment glued = couplings_at_end(net, base, glue);
  const SparseOperator H_glued = assemble(net, glued, basis);
  const Schedule deglue = glue.reversed();

  // Flux threading: bonds that cross the loop's start get the Peierls phase.
  std::vector<int> pos(static_cast<std::size_t>(net.n_sites()), -1);
  for (std::size_t p = 0; p < loop.size(); ++p) pos[static_cast<std::size_t>(loop[p])] = static_cast<int>(p);
  const int N = static_cast<int>(loop.size());
  SparseOperator fixed = H_glued, kx = SparseOperator::zero(basis), ky = SparseOperator::zero(basis);
  nlohmann::json cut = nlohmann::json::array();
  for (const auto& b : net.bonds) {
    if (b.kind != TermKind::exchange) continue;
    const int pi = pos[static_cast<std::size_t>(b.i)], pj = pos[static_cast<std::size_t>(b.j)];
    if (std::abs(pi - pj) <= N / 2) continue;
    const double c = glued.at(b.cls) * b.weight;
    if (c == 0.0) continue;
    const int a = pi > pj ? b.i : b.j, d = pi > pj ? b.j : b.i;
    const SparseOperator P = hop_bond(basis, a, d);
    fixed = fixed - c * exchange_bond(basis, a, d) + c * zz_bond(basis, a, d);
    kx = kx + (0.5 * c) * (P + P.adjoint());
    ky = ky + (0.5 * c) * (cplx(0, 1) * P - cplx(0, 1) * P.adjoint());
    cut.push_back({a, d});
  }
  const bool flux = opts.twist == TwistMode::flux;
  if (flux && cut.empty()) throw Error("flux twist: no glued bond crosses the loop start");
  std::optional<ParametricOperator> flux_op;
  if (flux) flux_op.emplace(std::vector<SparseOperator>{fixed.as_hermitian(1e-12), kx.as_hermitian(1e-12), ky.as_hermitian(1e-12)});
  auto flux_drive = [&](bool retrace) {
    const double T = opts.twist_time;
    return Drive{*flux_op, [T, retrace](double t) {
                   const double f = Ramp{"", RampShape::smoothstep, 0.0, 1.0}.at(t / T);
                   const double phi = 2 * kPi * (retrace ? std::min(f, 1.0 - f) : f);
                   return std::vector<double>{1.0, std::cos(phi), std::sin(phi)};
                 }};
  };
  const SparseOperator F = twist_operator(basis, loop);

  const std::size_t d = code.size();
  Mat Mt(d, d), Mc(d, d);
  std::vector<double> glued_energy(d);
  double glued_overlap = 0;
  const StateVector loop_cover = dimer_state(basis, ring_covering(loop, 1));
  for (std::size_t j = 0; j < d; ++j) {
    const StateVector g = evolve_schedule(net, base, glue, code.codewords[j]).final_state();
    glued_energy[j] = expectation(H_glued, g).real();
    if (j + 1 == d) glued_overlap = fidelity(loop_cover, g);
    StateVector twisted = flux ? evolve_driven(flux_drive(false), g, opts.twist_time, glue.dt, glue.krylov_dim).final_state()
                               : apply(F, g);
    StateVector reference = flux ? evolve_driven(flux_drive(true), g, opts.twist_time, glue.dt, glue.krylov_dim).final_state()
                                 : g;
    if (opts.free_time > 0) {
      twisted = evolve_static(H_glued, twisted, opts.free_time);
      reference = evolve_static(H_glued, reference, opts.free_time);
    }
    const StateVector ot = evolve_schedule(net, base, deglue, twisted).final_state();
    const StateVector oc = evolve_schedule(net, base, deglue, reference).final_state();
    for (std::size_t i = 0; i < d; ++i) {
      Mt(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = inner(code.codewords[i], ot);
      Mc(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = inner(code.codewords[i], oc);
    }
  }

  ProtocolReport r;
  r.protocol = n_qubits == 2 ? "gtg2" : "gtg3";
  r.action = action_from_matrix(Mt);
  r.target = gates::controlled_z(n_qubits);
  r.leakage_threshold = opts.leakage_threshold;
  // Dynamical phase per excitation number, from the calibration diagonal.
  std::vector<cplx> acc(static_cast<std::size_t>(n_qubits) + 1, 0.0);
  for (std::size_t j = 0; j < d; ++j) acc[static_cast<std::size_t>(std::popcount(j))] += Mc(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
  std::vector<double> delta(acc.size());
  for (std::size_t w = 0; w < acc.size(); ++w) delta[w] = std::arg(acc[w]) - std::arg(acc[0]);
  Mat by_phase = Mt;
  for (std::size_t j = 0; j < d; ++j)
    by_phase.col(static_cast<Eigen::Index>(j)) *= std::polar(1.0, -delta[static_cast<std::size_t>(std::popcount(j))]);
  const Eigen::JacobiSVD<Mat> svd(Mc, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat by_reference = Mt * (svd.matrixU() * svd.matrixV().adjoint()).adjoint();
  r.corrected = opts.calibration == Calibration::phases ? by_phase : by_reference;
  for (std::size_t w = 1; w < delta.size(); ++w) r.phases["delta_" + std::to_string(w)] = wrap_phase(delta[w]);
  for (std::size_t j = 0; j < d; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    r.phases["state_" + code.labels[j]] = wrap_phase(std::arg(Mt(jj, jj)) - std::arg(Mt(0, 0)));
    r.phases["corrected_" + code.labels[j]] = wrap_phase(std::arg(r.corrected(jj, jj)) - std::arg(r.corrected(0, 0)));
  }
  r.parameters = {{"n_qubits", n_qubits},
                  {"ring_size", net.length},
                  {"glue_duration", glue.duration},
                  {"dt", glue.dt},
                  {"free_time", opts.free_time},
                  {"twist", to_string(opts.twist)},
                  {"calibration", to_string(opts.calibration)},
                  {"glued_couplings", glued}};
  if (flux) r.parameters["twist_time"] = opts.twist_time;
  const auto calib = action_from_matrix(Mc);
  r.diagnostics["calibration_leakage"] = calib.leakage;
  r.diagnostics["zero_state_return"] = std::norm(Mt(0, 0));
  r.diagnostics["corrected_zero_state_return"] = std::norm(r.corrected(0, 0));
  r.diagnostics["fidelity_phase_calibrated"] = gate_fidelity(by_phase, r.target);
  r.diagnostics["fidelity_reference_calibrated"] = gate_fidelity(by_reference, r.target);
  r.diagnostics["glued_energies"] = glued_energy;
  r.diagnostics["glued_all_ones_loop_overlap"] = glued_overlap;
  r.diagnostics["cut_bonds"] = cut;
  r.diagnostics["loop_order"] = loop;
  r = finish(std::move(r));
  return r;
}

}  // namespace sgq
