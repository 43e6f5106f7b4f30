#include "framewright/compiler.hpp"
#include "framewright/error.hpp"

namespace framewright::compiler {

using namespace linalg;

namespace {

Unitary4 on_qubit(const Mat2 &m, int q) {
  return q == 0 ? Unitary4::kron(m, Mat2::Identity()) : Unitary4::kron(Mat2::Identity(), m);
}

Unitary4 swap_basis(const Unitary4 &u) {
  const Unitary4 s = targets::swap();
  return s * u * s;
}

// Action of a scheduled two-qubit op in circuit basis.
Unitary4 two_qubit_action(const Op &op, const GateLibrary &lib, const SimOptions &opt) {
  const auto &syn = lib.at(op.gate);
  const GateInstance &in = syn.instance;
  const double ts = static_cast<double>(op.start_ns), te = static_cast<double>(op.end_ns);
  Unitary4 u;
  if (opt.model == SimOptions::Model::Pulse) {
    if (!opt.device)
      throw ValidationError("circuit_unitary: pulse model needs a device");
    dynamics::Waveform wf = syn.program.waveform;
    // Corrected ops had their wrappers moved into U slots.
    if (op.corrected)
      wf.rotations.clear();
    u = dynamics::reference_evolve(*opt.device, syn.program.qubits, wf, ts);
  } else {
    u = dynamics::frame_wrap(op.corrected ? in.core() : in.canonical, in.frame_offsets, ts, te);
  }
  return driven_slot(in) == 0 ? u : swap_basis(u);
}

} // namespace

Unitary4 op_unitary(const Op &op, const GateLibrary &lib, const SimOptions &opt) {
  switch (op.kind) {
  case OpKind::Rxy:
  case OpKind::U:
  case OpKind::VirtualZ:
  case OpKind::Physical:
    return on_qubit(op_matrix(op), op.qubits[0]);
  case OpKind::TwoQubit:
    return two_qubit_action(op, lib, opt);
  case OpKind::Barrier:
  case OpKind::Measure:
    break;
  }
  return Unitary4::identity();
}

Unitary4 circuit_unitary(const ScheduledCircuit &sc, const GateLibrary &lib,
                         const SimOptions &opt) {
  Unitary4 acc;
  for (const auto &op : sc.ops)
    if (op.kind != OpKind::Barrier && op.kind != OpKind::Measure)
      acc = op_unitary(op, lib, opt) * acc;
  return acc;
}

} // namespace framewright::compiler
