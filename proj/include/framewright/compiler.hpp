#pragma once

#include <array>
#include <string>
#include <vector>

#include "framewright/dynamics.hpp"
#include "framewright/gates.hpp"
#include "framewright/library.hpp"

namespace framewright::compiler {

using dynamics::GateInstance;
using forge::GateLibrary;
using linalg::Unitary4;

inline constexpr long kOneQubitNs = 64;
// A U gate is two X90 pulses with virtual Zs around them.
inline constexpr long kUGateNs = 2 * kOneQubitNs;

enum class OpKind {
  Rxy,      // rotation theta about cos(phi) X + sin(phi) Y, one 64 ns pulse
  U,        // Rz(phi) Ry(theta) Rz(lambda)
  VirtualZ, // Z(theta), zero width
  Physical, // pending 2x2 matrix, zero width; only exists between compiler passes
  TwoQubit,
  Barrier,
  Measure,
};

struct Op {
  OpKind kind = OpKind::Rxy;
  std::vector<int> qubits;
  double theta = 0.0, phi = 0.0, lambda = 0.0;
  GateKind gate = GateKind::ISWAP_ONRES;
  Mat2 matrix = Mat2::Identity();
  bool slot = false;      // provisioned U slot around a non-commuting gate
  bool elided = false;    // slot that ended up as identity; keeps its time reservation
  bool corrected = false; // two-qubit op whose frame corrections are already in the circuit
  long start_ns = 0, end_ns = 0;

  static Op rxy(int q, double theta, double phi);
  static Op u(int q, double theta, double phi, double lambda);
  static Op z(int q, double theta);
  static Op physical(int q, const Mat2 &m);
  static Op two_qubit(GateKind k, int a = 0, int b = 1);
  static Op barrier(std::vector<int> qs = {});
  static Op measure(int q);

  bool acts_on(int q) const;
};

struct CircuitIR {
  int num_qubits = 2;
  std::vector<Op> ops;
};

struct ScheduledCircuit {
  int num_qubits = 2;
  std::vector<Op> ops; // start_ns/end_ns set
  long duration_ns = 0;
};

// Frame handling of one gate kind.
enum class RateSource { Detuning, StarkShift, None };
struct FrameRule {
  Placement placement;
  RateSource rate;
  Commutation commutation;
};
const FrameRule &frame_rule(GateKind k);

// Z angles in the instance basis (driven, idle), in the time order pre -> gate -> post.
struct GateCorrections {
  std::array<double, 2> pre{0.0, 0.0};
  std::array<double, 2> post{0.0, 0.0};
  bool has_pre = false;
  bool physical = false; // corrections realized inside U slots instead of as frame changes
};

// tracking = false drops the time-dependent terms and keeps the calibrated phases.
GateCorrections gate_corrections(const GateInstance &in, double t_start, double t_end,
                                 bool tracking = true);
// post * frame_wrap(V, t_start, t_end) * pre, instance basis.
Unitary4 corrected_gate(const GateInstance &in, double t_start, double t_end,
                        bool tracking = true);
// Phases for which corrected_gate is closest to the target, read off the
// phase-optimized distance fit.
std::vector<double> oracle_phases(const GateInstance &in);

// Copy of lib with every V replaced by its ideal target and oracle phases filled in.
GateLibrary ideal_library(const GateLibrary &lib);
// Fills every uncalibrated instance with oracle phases.
void calibrate_with_oracle(GateLibrary &lib);

// Circuit qubit that carries the instance's driven qubit (the lower device index maps to
// circuit qubit 0).
int driven_slot(const GateInstance &in);

CircuitIR provision_u(const CircuitIR &c);
ScheduledCircuit schedule(const CircuitIR &c, const GateLibrary &lib);
ScheduledCircuit insert_frame_corrections(const ScheduledCircuit &sc, const GateLibrary &lib,
                                          bool tracking = true);
ScheduledCircuit commute_z_to_end(const ScheduledCircuit &sc);
ScheduledCircuit absorb_into_u(const ScheduledCircuit &sc);

struct CompileOptions {
  bool frame_tracking = true;
};
ScheduledCircuit compile(const CircuitIR &c, const GateLibrary &lib,
                         const CompileOptions &opt = {});
CircuitIR to_circuit(const ScheduledCircuit &sc);

struct SimOptions {
  enum class Model { FrameWrap, Pulse };
  Model model = Model::FrameWrap;
  const device::DeviceModel *device = nullptr; // required for Pulse
};

// Unitary of a scheduled circuit; two-qubit ops act at their scheduled times.
Unitary4 circuit_unitary(const ScheduledCircuit &sc, const GateLibrary &lib,
                         const SimOptions &opt = {});
// Action of one scheduled op on both qubits (identity for barriers and measurements).
Unitary4 op_unitary(const Op &op, const GateLibrary &lib, const SimOptions &opt = {});
// Ideal gates, no timing.
Unitary4 ideal_unitary(const CircuitIR &c);

// U(theta, phi, lambda) and its inverse (global phase dropped).
Mat2 u_matrix(double theta, double phi, double lambda);
std::array<double, 3> u_params(const Mat2 &m);
Mat2 op_matrix(const Op &op);

CircuitIR circuit_from_json(const std::string &text);
std::string circuit_to_json(const CircuitIR &c);
// Angles rounded to 1e-10 rad so the text is stable across libm implementations.
std::string schedule_to_json(const ScheduledCircuit &sc);

} // namespace framewright::compiler
