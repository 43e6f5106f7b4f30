#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "framewright/dynamics.hpp"
#include "framewright/error.hpp"

namespace framewright::forge {

using device::DeviceModel;
using dynamics::GateInstance;
using linalg::Unitary4;

// Named drive parameters of one gate on one pair. Keys per kind:
//   ISWAP_ONRES, SQISWAP_ONRES: omega_mhz, flat_ns, y_sign
//   SWAP: omega_mhz, flat_ns, y_sign, cr_omega_mhz, cr_phase_rad
//   ISWAP_STARK, BSWAP_STARK, SQISWAP_STARK: omega_mhz, lambda_mhz, flat_ns, drag_beta_ns
//   B: omega_mhz, omega2_mhz, flat_ns, flat2_ns, y_sign
//   CZ_ECHOED_CR: cr_omega_mhz, cr_phase_rad, cr_flat_ns, rotary_mhz
struct GateRecipe {
  GateKind kind = GateKind::ISWAP_ONRES;
  std::size_t driven = 0;
  std::size_t idle = 1;
  std::map<std::string, double> params;

  double get(const std::string &key) const;
  double get_or(const std::string &key, double fallback) const;
};

struct PulseProgram {
  std::array<std::size_t, 2> qubits{}; // (driven, idle)
  dynamics::Waveform waveform;
  // Frame used for the canonical propagator, (driven, idle), MHz.
  std::array<double, 2> frame_mhz{};
  dynamics::FrameOffsets offsets;
  std::optional<Mat2> wrap_pre, wrap_post;

  double total_duration() const { return waveform.duration_ns; }
};

PulseProgram build_program(const DeviceModel &dev, const GateRecipe &r);
// V: program propagator in its own frame starting at t = 0, basis (driven, idle).
Unitary4 canonical_unitary(const DeviceModel &dev, const PulseProgram &p);

struct Resonance {
  double omega_mhz = 0;
  double lambda_mhz = 0;
  double drive_freq_mhz = 0;
  double stark_shift_mhz = 0;
};

// free_param: lambda (Stark ISWAP / sqrt-ISWAP), drive frequency (BSWAP), unused otherwise.
Resonance solve_resonance(GateKind kind, const DeviceModel &dev, std::size_t driven,
                          std::size_t idle, double free_param = 0.0);

struct TuneOptions {
  std::vector<std::string> names; // parameters to optimize
  std::map<std::string, double> steps;
  double improvement_tol = 1e-6;
  int max_sweeps = 50;
  // Error if the converged infidelity is above this.
  double max_infidelity = 1.0;
};

struct TuneResult {
  GateRecipe recipe;
  double infidelity = 1.0;
  int sweeps = 0;
};

// Thrown when the sweep cap is hit; carries the best point reached.
struct TuneCapError : NumericalError {
  TuneCapError(const std::string &what, TuneResult partial)
      : NumericalError(what, partial.infidelity), partial(std::move(partial)) {}
  TuneResult partial;
};

TuneResult amplitude_fine_tune(const DeviceModel &dev, const GateRecipe &start,
                               const Unitary4 &target, const TuneOptions &opt);

struct Synthesis {
  GateRecipe recipe;
  PulseProgram program;
  GateInstance instance;
  double infidelity = 1.0; // phase-optimized, vs target_unitary(kind)
};

struct SynthOptions {
  std::optional<double> lambda_mhz;     // Stark gates
  std::optional<double> drive_freq_mhz; // BSWAP
  double max_infidelity = 1e-3;
  bool snap_duration = true;
};

// Default (driven, idle) labels on the bundled three-qubit device: Q8/Q9 for the
// on-resonant and Stark ISWAP families, Q12 driven against Q8 for BSWAP, Q8 controlling
// Q12 for CZ.
std::array<std::string, 2> default_pair_labels(GateKind kind);

Synthesis synthesize(const DeviceModel &dev, GateKind kind, std::size_t driven, std::size_t idle,
                     const SynthOptions &opt = {});
// Rebuilds program and instance from a stored recipe without tuning.
Synthesis realize(const DeviceModel &dev, const GateRecipe &r);

Synthesis synth_iswap_onres(const DeviceModel &dev, std::size_t driven, std::size_t idle,
                            const SynthOptions &opt = {});
Synthesis synth_swap(const DeviceModel &dev, std::size_t driven, std::size_t idle,
                     const SynthOptions &opt = {});
Synthesis synth_stark_iswap(const DeviceModel &dev, std::size_t driven, std::size_t idle,
                            const SynthOptions &opt = {});
Synthesis synth_stark_bswap(const DeviceModel &dev, std::size_t driven, std::size_t idle,
                            const SynthOptions &opt = {});
Synthesis synth_sqiswap(GateKind variant, const DeviceModel &dev, std::size_t driven,
                        std::size_t idle, const SynthOptions &opt = {});
Synthesis synth_bgate(const DeviceModel &dev, std::size_t driven, std::size_t idle,
                      const SynthOptions &opt = {});
Synthesis synth_cz_echoed_cr(const DeviceModel &dev, std::size_t control, std::size_t target,
                             const SynthOptions &opt = {});

// Idle-qubit frequency shift (MHz) from the CR tone of a SWAP recipe, measured by a
// Ramsey-style phase on the idle qubit with the direct drive off.
double cr_stark_shift(const DeviceModel &dev, const GateRecipe &swap);

// exp(-i theta/2 Z (x) X) style angle of the CR block alone: returns the XZ rotation
// angle (driven X, idle Z) accumulated by a SWAP recipe's CR tone.
double cr_xz_angle(const DeviceModel &dev, const GateRecipe &swap);

// Echoed cross-resonance sequence with ideal primitives: Pi_{3pi/4}, CR_{pi/4}, X_pi, CR_{-pi/4} and
// target dressing. control = left factor.
Unitary4 ideal_echoed_cr_cz();

} // namespace framewright::forge
