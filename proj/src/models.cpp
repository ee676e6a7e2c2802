#include "sgq/models.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sgq {

namespace {

constexpr Config bit(int i) { return Config{1} << i; }

void add_bond(LatticeLayout& l, int i, int j, const std::string& cls, double w = 1.0,
              TermKind kind = TermKind::exchange) {
  l.bonds.push_back(Bond{i, j, cls, w, kind});
}

void add_chain_sites(LatticeLayout& l, int n, int ring, int leg) {
  for (int p = 0; p < n; ++p) l.sites.push_back(Site{l.n_sites(), ring, leg, p});
}

void validate(const LatticeLayout& l) {
  for (const auto& b : l.bonds) {
    if (b.i < 0 || b.i >= l.n_sites()) throw Error("bond references a missing site");
    if (b.kind != TermKind::pauli_x) {
      if (b.j < 0 || b.j >= l.n_sites()) throw Error("bond references a missing site");
      if (b.i == b.j) throw Error("self bond");
    }
    if (!l.couplings.contains(b.cls)) throw Error("bond class without default coupling: " + b.cls);
  }
}

const char* kind_name(TermKind k) {
  switch (k) {
    case TermKind::exchange: return "exchange";
    case TermKind::pauli_zz: return "pauli_zz";
    case TermKind::pauli_x: return "pauli_x";
  }
  return "exchange";
}

TermKind kind_from(const std::string& s) {
  if (s == "exchange") return TermKind::exchange;
  if (s == "pauli_zz") return TermKind::pauli_zz;
  if (s == "pauli_x") return TermKind::pauli_x;
  throw Error("unknown term kind: " + s);
}

// Bonds with their final coefficient; zero coefficients are skipped.
struct Weighted {
  const Bond* bond;
  double coeff;
};

SparseOperator build(const std::vector<Weighted>& terms, const BasisPtr& basis) {
  std::vector<Triplet> t;
  t.reserve(basis->dim() * (1 + terms.size() / 2));
  for (std::size_t k = 0; k < basis->dim(); ++k) {
    const Config c = basis->config_of(k);
    double diag = 0;
    for (const auto& [b, coeff] : terms) {
      switch (b->kind) {
        case TermKind::exchange: {
          const bool si = (c >> b->i) & 1, sj = (c >> b->j) & 1;
          if (si == sj) {
            diag += 0.25 * coeff;
          } else {
            diag -= 0.25 * coeff;
            t.push_back({*basis->index_of(c ^ (bit(b->i) | bit(b->j))), k, 0.5 * coeff});
          }
          break;
        }
        case TermKind::pauli_zz:
          diag += (((c >> b->i) & 1) == ((c >> b->j) & 1) ? 1.0 : -1.0) * coeff;
          break;
        case TermKind::pauli_x: {
          auto idx = basis->index_of(c ^ bit(b->i));
          if (!idx) throw Error("transverse-field terms need an unrestricted basis");
          t.push_back({*idx, k, coeff});
          break;
        }
      }
    }
    if (diag != 0.0) t.push_back({k, k, diag});
  }
  return SparseOperator(basis, basis, std::move(t), true);
}

}  // namespace

std::vector<std::string> LatticeLayout::classes() const {
  std::set<std::string> s;
  for (const auto& b : bonds) s.insert(b.cls);
  return {s.begin(), s.end()};
}

std::size_t LatticeLayout::count(const std::string& cls) const {
  return static_cast<std::size_t>(
      std::count_if(bonds.begin(), bonds.end(), [&](const Bond& b) { return b.cls == cls; }));
}

LatticeLayout chain_j1j2(int L, double J1, double J2, bool pbc) {
  if (L < 4) throw Error("J1-J2 chain needs at least 4 sites");
  LatticeLayout l;
  l.kind = "chain_j1j2";
  l.pbc = pbc;
  l.length = L;
  add_chain_sites(l, L, 0, 0);
  const int nn = pbc ? L : L - 1;
  for (int n = 0; n < nn; ++n) add_bond(l, n, (n + 1) % L, coupling::leg);
  if (J2 != 0.0) {
    const int nnn = pbc ? L : L - 2;
    for (int n = 0; n < nnn; ++n) add_bond(l, n, (n + 2) % L, coupling::second);
  }
  l.couplings = {{coupling::leg, J1}, {coupling::second, J2}};
  std::vector<int> ring(static_cast<std::size_t>(L));
  for (int n = 0; n < L; ++n) ring[static_cast<std::size_t>(n)] = n;
  l.rings = {ring};
  validate(l);
  return l;
}

LatticeLayout chain_staggered(int L, double J, double delta, bool pbc) {
  if (std::abs(delta) > 1.0) throw Error("dimerization |delta| must not exceed 1");
  if (L < 2 || (pbc && (L % 2 != 0 || L < 4))) throw Error("staggered ring needs an even length >= 4");
  LatticeLayout l;
  l.kind = "chain_staggered";
  l.pbc = pbc;
  l.length = L;
  add_chain_sites(l, L, 0, 0);
  const int nn = pbc ? L : L - 1;
  for (int n = 0; n < nn; ++n) {
    add_bond(l, n, (n + 1) % L, coupling::leg);
    add_bond(l, n, (n + 1) % L, coupling::stagger, n % 2 == 0 ? 1.0 : -1.0);
  }
  l.couplings = {{coupling::leg, J}, {coupling::stagger, J * delta}};
  std::vector<int> ring(static_cast<std::size_t>(L));
  for (int n = 0; n < L; ++n) ring[static_cast<std::size_t>(n)] = n;
  l.rings = {ring};
  validate(l);
  return l;
}

LatticeLayout ladder(int L, double J_leg, double J_2nn, double J_rung, double J_diag, bool pbc) {
  if (L < 4) throw Error("ladder needs at least 4 rungs");
  LatticeLayout l;
  l.kind = "ladder";
  l.pbc = pbc;
  l.length = L;
  add_chain_sites(l, L, 0, 0);
  add_chain_sites(l, L, 0, 1);
  auto s = [&](int n, int leg) { return l.ladder_site(((n % L) + L) % L, leg); };
  const int nn = pbc ? L : L - 1;
  const int nnn = pbc ? L : L - 2;
  for (int leg = 0; leg < 2; ++leg)
    for (int n = 0; n < nn; ++n) add_bond(l, s(n, leg), s(n + 1, leg), coupling::leg);
  for (int leg = 0; leg < 2; ++leg)
    for (int n = 0; n < nnn; ++n) add_bond(l, s(n, leg), s(n + 2, leg), coupling::second);
  for (int n = 0; n < L; ++n) add_bond(l, s(n, 0), s(n, 1), coupling::rung);
  for (int n = 0; n < nn; ++n) {
    add_bond(l, s(n, 0), s(n + 1, 1), coupling::diag);
    add_bond(l, s(n, 1), s(n + 1, 0), coupling::diag);
  }
  l.couplings = {{coupling::leg, J_leg}, {coupling::second, J_2nn}, {coupling::rung, J_rung},
                 {coupling::diag, J_diag}};
  for (int leg = 0; leg < 2; ++leg) {
    std::vector<int> ring;
    for (int n = 0; n < L; ++n) ring.push_back(s(n, leg));
    l.rings.push_back(ring);
  }
  validate(l);
  return l;
}

LatticeLayout tfim_chain(int L, double lambda, bool pbc) {
  if (L < 2) throw Error("Ising chain needs at least 2 sites");
  LatticeLayout l;
  l.kind = "tfim_chain";
  l.pbc = pbc;
  l.length = L;
  add_chain_sites(l, L, 0, 0);
  for (int n = 0; n < L; ++n) add_bond(l, n, n, coupling::field, -1.0, TermKind::pauli_x);
  const int nn = pbc && L > 2 ? L : L - 1;
  for (int n = 0; n < nn; ++n) add_bond(l, n, (n + 1) % L, coupling::ising, -1.0, TermKind::pauli_zz);
  l.couplings = {{coupling::field, 1.0}, {coupling::ising, lambda}};
  validate(l);
  return l;
}

LatticeLayout ring_network(const std::vector<RingSpec>& specs, const std::vector<Corner>& corners) {
  if (specs.empty()) throw Error("ring network needs at least one ring");
  LatticeLayout l;
  l.kind = "ring_network";
  l.pbc = true;
  l.length = specs.front().L;
  std::vector<int> offset;
  for (std::size_t r = 0; r < specs.size(); ++r) {
    if (specs[r].L < 4) throw Error("rings need at least 4 sites");
    offset.push_back(l.n_sites());
    add_chain_sites(l, specs[r].L, static_cast<int>(r), 0);
    std::vector<int> ring;
    for (int p = 0; p < specs[r].L; ++p) ring.push_back(offset.back() + p);
    l.rings.push_back(ring);
  }
  auto site = [&](int ring, int p) {
    const int L = specs[static_cast<std::size_t>(ring)].L;
    return offset[static_cast<std::size_t>(ring)] + ((p % L) + L) % L;
  };

  // Ring bonds keyed by their first site position: class override per ring.
  std::map<std::pair<int, int>, int> nn_override, nnn_override;  // (ring, p) -> corner
  std::set<int> corner_sites;
  for (std::size_t c = 0; c < corners.size(); ++c) {
    Corner cr = corners[c];
    if (cr.rings.size() != 2 && cr.rings.size() != 3)
      throw Error("a corner joins two (square) or three (triangular) rings");
    if (cr.anchors.empty()) cr.anchors.assign(cr.rings.size(), 0);
    if (cr.anchors.size() != cr.rings.size()) throw Error("corner anchors do not match rings");
    std::set<int> distinct(cr.rings.begin(), cr.rings.end());
    if (distinct.size() != cr.rings.size()) throw Error("corner lists a ring twice");
    for (std::size_t k = 0; k < cr.rings.size(); ++k) {
      const int r = cr.rings[k];
      if (r < 0 || r >= static_cast<int>(specs.size())) throw Error("corner references a missing ring");
      const int a = cr.anchors[k];
      for (int s : {site(r, a), site(r, a - 1)})
        if (!corner_sites.insert(s).second) throw Error("overlapping corner assignments");
      // NN bond (a-1, a); NNN bonds (a-2, a) and (a-1, a+1), keyed by first site.
      const int L = specs[static_cast<std::size_t>(r)].L;
      const int p_nn = ((a - 1) % L + L) % L;
      if (!nn_override.emplace(std::pair{r, p_nn}, static_cast<int>(c)).second)
        throw Error("overlapping corner assignments");
      for (int p : {a - 2, a - 1})
        if (!nnn_override.emplace(std::pair{r, ((p % L) + L) % L}, static_cast<int>(c)).second)
          throw Error("overlapping corner assignments");
    }
    l.corners.push_back(cr);
  }

  for (std::size_t r = 0; r < specs.size(); ++r) {
    const auto& sp = specs[r];
    const int ri = static_cast<int>(r);
    for (int p = 0; p < sp.L; ++p) {
      const bool corner = nn_override.contains({ri, p});
      add_bond(l, site(ri, p), site(ri, p + 1), corner ? coupling::corner : coupling::leg, sp.J1);
    }
    if (sp.J2 != 0.0) {
      for (int p = 0; p < sp.L; ++p) {
        const bool corner = nnn_override.contains({ri, p});
        add_bond(l, site(ri, p), site(ri, p + 2), corner ? coupling::corner_2nn : coupling::second, sp.J2);
      }
    }
  }
  for (const auto& cr : l.corners) {
    const std::size_t n = cr.rings.size();
    for (std::size_t k = 0; k < n; ++k) {
      const int r0 = cr.rings[k], r1 = cr.rings[(k + 1) % n];
      const int exit0 = cr.anchors[k] - 1, entry1 = cr.anchors[(k + 1) % n];
      const auto& s0 = specs[static_cast<std::size_t>(r0)];
      const auto& s1 = specs[static_cast<std::size_t>(r1)];
      add_bond(l, site(r0, exit0), site(r1, entry1), coupling::glue, 0.5 * (s0.J1 + s1.J1));
      const double j2 = 0.5 * (s0.J2 + s1.J2);
      if (j2 != 0.0) {
        add_bond(l, site(r0, exit0 - 1), site(r1, entry1), coupling::glue_2nn, j2);
        add_bond(l, site(r0, exit0), site(r1, entry1 + 1), coupling::glue_2nn, j2);
      }
    }
  }
  l.couplings = {{coupling::leg, 1.0}, {coupling::second, 1.0}};
  if (!l.corners.empty()) {
    l.couplings[coupling::corner] = 1.0;
    l.couplings[coupling::corner_2nn] = 1.0;
    l.couplings[coupling::glue] = 0.0;
    l.couplings[coupling::glue_2nn] = 0.0;
  }
  validate(l);
  return l;
}

std::vector<int> glued_loop_order(const LatticeLayout& layout, std::size_t c) {
  if (c >= layout.corners.size()) throw Error("corner index out of range");
  const auto& cr = layout.corners[c];
  std::vector<int> order;
  for (std::size_t k = 0; k < cr.rings.size(); ++k) {
    const auto& ring = layout.rings.at(static_cast<std::size_t>(cr.rings[k]));
    const int L = static_cast<int>(ring.size());
    for (int q = 0; q < L; ++q) order.push_back(ring[static_cast<std::size_t>((cr.anchors[k] + q) % L)]);
  }
  return order;
}

SparseOperator assemble(const LatticeLayout& layout, const CouplingAssignment& couplings,
                        const BasisPtr& basis) {
  if (basis->n_sites() != layout.n_sites()) throw Error("basis size does not match layout");
  std::vector<Weighted> terms;
  for (const auto& b : layout.bonds) {
    auto it = couplings.find(b.cls);
    if (it == couplings.end()) throw Error("missing coupling value for class " + b.cls);
    if (!std::isfinite(it->second)) throw Error("non-finite coupling for class " + b.cls);
    const double c = it->second * b.weight;
    if (c != 0.0) terms.push_back({&b, c});
  }
  return build(terms, basis);
}

SparseOperator class_operator(const LatticeLayout& layout, const std::string& cls, const BasisPtr& basis) {
  if (basis->n_sites() != layout.n_sites()) throw Error("basis size does not match layout");
  std::vector<Weighted> terms;
  for (const auto& b : layout.bonds)
    if (b.cls == cls && b.weight != 0.0) terms.push_back({&b, b.weight});
  return build(terms, basis);
}

nlohmann::json to_json(const LatticeLayout& l) {
  nlohmann::json j;
  j["kind"] = l.kind;
  j["pbc"] = l.pbc;
  j["length"] = l.length;
  auto& sites = j["sites"] = nlohmann::json::array();
  for (const auto& s : l.sites)
    sites.push_back({{"id", s.id}, {"ring", s.ring}, {"leg", s.leg}, {"position", s.position}});
  auto& bonds = j["bonds"] = nlohmann::json::array();
  for (const auto& b : l.bonds)
    bonds.push_back({{"i", b.i}, {"j", b.j}, {"class", b.cls}, {"weight", b.weight}, {"kind", kind_name(b.kind)}});
  j["couplings"] = l.couplings;
  j["rings"] = l.rings;
  auto& corners = j["corners"] = nlohmann::json::array();
  for (const auto& c : l.corners) corners.push_back({{"rings", c.rings}, {"anchors", c.anchors}});
  return j;
}

LatticeLayout layout_from_json(const nlohmann::json& j) {
  try {
    LatticeLayout l;
    l.kind = j.at("kind").get<std::string>();
    l.pbc = j.at("pbc").get<bool>();
    l.length = j.at("length").get<int>();
    for (const auto& s : j.at("sites"))
      l.sites.push_back(Site{s.at("id"), s.at("ring"), s.at("leg"), s.at("position")});
    for (std::size_t k = 0; k < l.sites.size(); ++k)
      if (l.sites[k].id != static_cast<int>(k)) throw Error("site ids must be 0..n-1 in order");
    for (const auto& b : j.at("bonds"))
      l.bonds.push_back(Bond{b.at("i"), b.at("j"), b.at("class"), b.at("weight"), kind_from(b.at("kind"))});
    l.couplings = j.at("couplings").get<CouplingAssignment>();
    l.rings = j.value("rings", std::vector<std::vector<int>>{});
    for (const auto& c : j.value("corners", nlohmann::json::array()))
      l.corners.push_back(Corner{c.at("rings"), c.at("anchors")});
    validate(l);
    return l;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed layout document: ") + e.what());
  }
}

}  // namespace sgq
