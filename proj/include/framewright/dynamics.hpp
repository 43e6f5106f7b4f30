#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "framewright/device.hpp"
#include "framewright/gates.hpp"
#include "framewright/linalg.hpp"

namespace framewright::dynamics {

using device::DeviceModel;
using device::DriveSegment;
using device::PulseEnvelope;
using linalg::Hermitian4;
using linalg::Unitary4;

// Per-qubit rotation rate of a gate's internal frame relative to the logical frame:
// f_frame - f_qubit, MHz.
struct FrameOffsets {
  double driven_mhz = 0.0;
  double idle_mhz = 0.0;
};

struct Crosstalk {
  double ix_mhz = 0.0;
  double zz_mhz = 0.0;
};

struct EffectiveModel {
  enum class Kind { OnResonant, Stark };
  Kind kind = Kind::OnResonant;
  Hermitian4 hamiltonian; // at model.omega_mhz, basis (driven, idle)
  FrameOffsets frame_offsets;
  double omega_mhz = 0, lambda_mhz = 0, delta_mhz = 0, mu = 0;
  Crosstalk crosstalk;

  // Same model at instantaneous amplitude omega; drag enters as a Y term (on-resonant only).
  Hermitian4 at(double omega_mhz, double quadrature_mhz = 0.0) const;
};

EffectiveModel effective_hamiltonian_onres(const DeviceModel &dev, std::size_t driven,
                                           std::size_t idle, double omega_mhz,
                                           Crosstalk xt = {});
EffectiveModel effective_hamiltonian_stark(const DeviceModel &dev, std::size_t driven,
                                           std::size_t idle, double omega_mhz,
                                           double lambda_mhz);

// Time-ordered propagator of the effective model under env (amplitude rescaled by
// Omega(t)/Omega_peak). dt in ns.
Unitary4 evolve_effective(const EffectiveModel &model, const PulseEnvelope &env,
                          double dt = 0.05);

// Instantaneous rotation rxy(theta, phi) in the qubit's logical frame, applied at time_ns.
// Used for zero-width operations such as absorbable Y wrappers.
struct IdealRotation {
  std::size_t channel = 0;
  double time_ns = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

// Drives on a qubit pair over [0, duration_ns].
struct Waveform {
  std::vector<DriveSegment> segments;
  std::vector<IdealRotation> rotations;
  double duration_ns = 0.0;
};

struct StepOptions {
  double dt = 0.02;
};

// Ground-truth integrator: each qubit in its own logical frame, absolute time t_start + t.
// qubits gives the basis order of the result (left factor first).
Unitary4 reference_evolve(const DeviceModel &dev, std::array<std::size_t, 2> qubits,
                          std::span<const DriveSegment> segments, double t_start,
                          StepOptions opt = {});
Unitary4 reference_evolve(const DeviceModel &dev, std::array<std::size_t, 2> qubits,
                          const Waveform &wf, double t_start, StepOptions opt = {});

// Propagator of wf in a rotating frame with frame frequencies frame_mhz (per basis
// qubit), evaluated from program time 0. Stretches with constant Hamiltonian are
// exponentiated exactly; the rest uses Magnus steps of at most dt.
Unitary4 frame_evolve(const DeviceModel &dev, std::array<std::size_t, 2> qubits,
                      const Waveform &wf, std::array<double, 2> frame_mhz,
                      StepOptions opt = {0.05});

// State-vector version of the reference integrator with checkpoints; used by sweeps.
std::vector<Vec4> reference_trajectory(const DeviceModel &dev,
                                               std::array<std::size_t, 2> qubits,
                                               const Waveform &wf, const Vec4 &psi0,
                                               std::span<const double> checkpoints,
                                               double t_start = 0.0, StepOptions opt = {});

struct GateInstance {
  GateKind kind = GateKind::ISWAP_ONRES;
  std::size_t driven = 0;
  std::size_t idle = 1;
  // V in basis (driven, idle), including any absorbable wrappers.
  Unitary4 canonical;
  FrameOffsets frame_offsets;
  // Empty until calibrated.
  std::vector<double> calibrated_phases;
  double duration_ns = 0.0;
  // Zero-width wrappers on the driven qubit that the compiler may fold into U gates:
  // canonical = (post (x) I) core (pre (x) I).
  std::optional<Mat2> wrap_pre;
  std::optional<Mat2> wrap_post;
  // Time-independent corrections (driven, idle) applied after the gate.
  std::array<double, 2> static_post{0.0, 0.0};

  Unitary4 core() const;
  bool calibrated() const;
};

Mat4 frame_operator(const FrameOffsets &off, double t_ns);

// F(t_end) V F(t_start)^dag with F(t) = Z(2 pi o_d t) (x) Z(2 pi o_i t).
Unitary4 frame_wrap(const GateInstance &inst, double t_start, double t_end);
Unitary4 frame_wrap(const Unitary4 &v, const FrameOffsets &off, double t_start,
                    double t_end);

struct ChevronTable {
  std::vector<double> amplitudes_mhz;
  std::vector<double> durations_ns;
  // p[i][j]: amplitude i, duration j.
  std::vector<std::vector<double>> p_transfer;

  std::string to_csv() const;
  // Amplitude with the largest transfer at any duration.
  double ridge_amplitude() const;
};

struct SweepOptions {
  bool dual_drive = false;   // FLICFORQ: drive both qubits at the frame frequency
  double idle_amplitude_ratio = 1.0;
  StepOptions step{};
  unsigned threads = 1;
};

// Square on-resonant drive on `driven` wrapped by ideal Y rotations; |01> prepared in
// (driven, idle) order, P(|10>) recorded.
ChevronTable chevron_sweep(const DeviceModel &dev, std::size_t driven, std::size_t idle,
                           std::span<const double> amplitudes_mhz,
                           std::span<const double> durations_ns, SweepOptions opt = {});

// Dominant exchange frequency (MHz) of a transfer trace sampled uniformly in time.
double oscillation_frequency(std::span<const double> times_ns, std::span<const double> p);

} // namespace framewright::dynamics
