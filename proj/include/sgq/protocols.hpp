#pragma once

// End-to-end logical gate protocols and their reports.

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgq/dynamics.hpp"
#include "sgq/logical.hpp"
#include "sgq/models.hpp"

namespace sgq {

struct ProtocolReport {
  std::string protocol;
  nlohmann::json parameters = nlohmann::json::object();
  LogicalAction action;
  Mat target;
  /// Action after the protocol's phase correction; `fidelity` is measured on it.
  Mat corrected;
  double fidelity = 0.0;
  /// Measured phases in (-pi, pi].
  std::map<std::string, double> phases;
  double leakage_threshold = 0.2;
  bool flagged = false;
  nlohmann::json diagnostics = nlohmann::json::object();
};

nlohmann::json to_json(const ProtocolReport& r);
void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const ProtocolReport& r);

/// Wraps an angle into (-pi, pi].
double wrap_phase(double a);

/// Translation by `shift` sites along every ring of the code. Targets X^shift.
ProtocolReport run_pump(const LogicalCode& code, int shift = 1, double leakage_threshold = 0.2);
/// Product of the single-ring twists, applied `times` times. Targets Z^times.
ProtocolReport run_twist(const LogicalCode& code, int times = 1, double leakage_threshold = 0.2);

struct TeleportResult {
  Eigen::Vector2cd output;          // after the X^m correction
  Eigen::Vector2cd pre_correction;  // renormalized ancilla state
  double probability = 0.0;         // of outcome m
  int correction = 0;               // apply X^correction
};

/// <m|_S H_S CZ |psi>_S |+>_A, renormalized and X^m corrected.
TeleportResult run_teleport_h(const Eigen::Vector2cd& psi, int m);

/// Couplings that differ between the two points, ramped with `shape`.
Schedule linear_path_schedule(const CouplingAssignment& from, const CouplingAssignment& to, double duration,
                              RampShape shape = RampShape::smoothstep);

struct ShuffleOptions {
  double leakage_threshold = 0.2;
  /// Check that the endpoints classify as C and R.
  bool check_phases = true;
  /// Upper bound on the C-doublet splitting accepted as finite-size degeneracy.
  double max_c_splitting = 0.05;
};

/// Ladder shuffle from a C point to an R point. Input codewords are the
/// covering-aligned combinations of the two lowest states at the C point in
/// the whole-ladder translation sectors; outputs are the lowest states at the
/// R point in those sectors, labelled + and -.
ProtocolReport run_shuffle(const LatticeLayout& ladder_layout, const CouplingAssignment& point_c,
                           const CouplingAssignment& point_r, const Schedule& sched, const ShuffleOptions& opts = {});

enum class TwistMode { instant, flux };
std::string to_string(TwistMode m);
TwistMode twist_mode_from(const std::string& s);

/// `phases` removes one dynamical phase per excitation number; `reference`
/// right-multiplies by the inverse of the unitary part of the calibration map.
enum class Calibration { phases, reference };
std::string to_string(Calibration c);
Calibration calibration_from(const std::string& s);

struct GtgOptions {
  double free_time = 0.0;
  TwistMode twist = TwistMode::instant;
  /// Duration of the flux sweep in flux mode.
  double twist_time = 50.0;
  Calibration calibration = Calibration::phases;
  double leakage_threshold = 0.2;
};

/// Glue ramp, global twist over the glued loop, free evolution, time-reversed
/// deglue ramp, for every covering-product basis state. A calibration pass
/// without the twist measures the dynamical phases removed in `corrected`.
ProtocolReport run_gtg(const LatticeLayout& network, const CouplingAssignment& base, const Schedule& glue,
                       int n_qubits, const GtgOptions& opts = {});

}  // namespace sgq
