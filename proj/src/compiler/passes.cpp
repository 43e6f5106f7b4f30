#include <algorithm>
#include <cmath>
#include <optional>

#include "framewright/compiler.hpp"
#include "framewright/error.hpp"

namespace framewright::compiler {

using namespace linalg;

namespace {

bool blocking(const Op &op) {
  return op.kind == OpKind::TwoQubit &&
         frame_rule(op.gate).commutation == Commutation::Blocking;
}

bool zero_width(const Op &op) {
  return op.kind == OpKind::VirtualZ || op.kind == OpKind::Physical ||
         op.kind == OpKind::Barrier;
}

// Nearest op on q before/after index i that takes time, if any.
template <class Ops>
std::optional<std::size_t> neighbor(const Ops &ops, std::size_t i, int q, int dir) {
  for (long j = static_cast<long>(i) + dir; j >= 0 && j < static_cast<long>(ops.size());
       j += dir) {
    const Op &o = ops[static_cast<std::size_t>(j)];
    if (o.acts_on(q) && !zero_width(o))
      return static_cast<std::size_t>(j);
  }
  return std::nullopt;
}

Op slot_op(int q) {
  Op s = Op::u(q, 0.0, 0.0, 0.0);
  s.slot = true;
  return s;
}

void check_pair(const Op &op) {
  if (op.qubits.size() != 2 || op.qubits[0] == op.qubits[1] || op.qubits[0] < 0 ||
      op.qubits[1] < 0 || op.qubits[0] > 1 || op.qubits[1] > 1)
    throw ValidationError("two-qubit op must act on qubits 0 and 1");
}

// Z on circuit qubit q from an instance-basis (driven, idle) angle pair.
Mat2 z_for(int q, const GateInstance &in, const std::array<double, 2> &ang) {
  return rz(q == driven_slot(in) ? ang[0] : ang[1]);
}

} // namespace

CircuitIR provision_u(const CircuitIR &c) {
  // A 1Q gate right next to a non-commuting gate becomes that gate's slot.
  std::vector<bool> take(c.ops.size(), false);
  for (std::size_t i = 0; i < c.ops.size(); ++i) {
    if (!blocking(c.ops[i]))
      continue;
    check_pair(c.ops[i]);
    for (int q = 0; q < 2; ++q)
      for (int dir : {-1, +1}) {
        auto j = neighbor(c.ops, i, q, dir);
        if (j && (c.ops[*j].kind == OpKind::Rxy || c.ops[*j].kind == OpKind::U))
          take[*j] = true;
      }
  }
  CircuitIR out{c.num_qubits, {}};
  out.ops.reserve(c.ops.size());
  for (std::size_t i = 0; i < c.ops.size(); ++i) {
    const Op &op = c.ops[i];
    if (take[i] && !op.slot) {
      const auto p = u_params(op_matrix(op));
      Op s = slot_op(op.qubits[0]);
      std::tie(s.theta, s.phi, s.lambda) = std::tuple(p[0], p[1], p[2]);
      out.ops.push_back(s);
      continue;
    }
    if (!blocking(op)) {
      out.ops.push_back(op);
      continue;
    }
    for (int q = 0; q < 2; ++q) {
      auto prev = neighbor(out.ops, out.ops.size(), q, -1);
      if (!prev || !out.ops[*prev].slot)
        out.ops.push_back(slot_op(q));
    }
    out.ops.push_back(op);
    for (int q = 0; q < 2; ++q) {
      auto next = neighbor(c.ops, i, q, +1);
      if (!next || !(c.ops[*next].slot || take[*next]))
        out.ops.push_back(slot_op(q));
    }
  }
  return out;
}

ScheduledCircuit schedule(const CircuitIR &c, const GateLibrary &lib) {
  if (c.num_qubits != 2)
    throw ValidationError("schedule: only two-qubit circuits are supported");
  ScheduledCircuit sc{c.num_qubits, {}, 0};
  std::array<long, 2> ready{0, 0};
  std::array<bool, 2> measured{false, false};
  std::optional<std::array<std::size_t, 2>> pair;
  for (Op op : c.ops) {
    for (int q : op.qubits)
      if (q < 0 || q >= c.num_qubits)
        throw ValidationError("schedule: qubit index out of range");
    long start = 0, dur = 0;
    switch (op.kind) {
    case OpKind::Rxy:
      dur = kOneQubitNs;
      break;
    case OpKind::U:
      dur = kUGateNs;
      break;
    case OpKind::VirtualZ:
    case OpKind::Physical:
    case OpKind::Measure:
      break;
    case OpKind::Barrier:
      break;
    case OpKind::TwoQubit: {
      check_pair(op);
      const GateInstance &in = lib.instance(op.gate);
      const std::array<std::size_t, 2> p{std::min(in.driven, in.idle), std::max(in.driven, in.idle)};
      if (!pair)
        pair = p;
      else if (*pair != p)
        throw ValidationError(std::string("schedule: ") + std::string(to_string(op.gate)) +
                              " is calibrated on a different device pair");
      const double d = in.duration_ns;
      dur = std::lround(d);
      if (std::abs(d - static_cast<double>(dur)) > 1e-6)
        throw ValidationError(std::string("schedule: ") + std::string(to_string(op.gate)) +
                              " duration is not on the 1 ns grid");
      break;
    }
    }
    std::vector<int> qs = op.qubits;
    if (op.kind == OpKind::Barrier && qs.empty())
      qs = {0, 1};
    for (int q : qs) {
      start = std::max(start, ready[static_cast<std::size_t>(q)]);
      if (measured[static_cast<std::size_t>(q)] && op.kind != OpKind::Measure &&
          op.kind != OpKind::Barrier && op.kind != OpKind::VirtualZ)
        throw ValidationError("schedule: operation after measurement");
    }
    op.start_ns = start;
    op.end_ns = start + dur;
    for (int q : qs) {
      ready[static_cast<std::size_t>(q)] = op.end_ns;
      if (op.kind == OpKind::Measure)
        measured[static_cast<std::size_t>(q)] = true;
    }
    sc.duration_ns = std::max(sc.duration_ns, op.end_ns);
    sc.ops.push_back(std::move(op));
  }
  return sc;
}

ScheduledCircuit insert_frame_corrections(const ScheduledCircuit &sc, const GateLibrary &lib,
                                          bool tracking) {
  ScheduledCircuit out{sc.num_qubits, {}, sc.duration_ns};
  for (const Op &op : sc.ops) {
    if (op.kind != OpKind::TwoQubit || op.corrected) {
      out.ops.push_back(op);
      continue;
    }
    const GateInstance &in = lib.instance(op.gate);
    const auto corr = gate_corrections(in, static_cast<double>(op.start_ns),
                                       static_cast<double>(op.end_ns), tracking);
    const int qd = driven_slot(in);
    auto at = [](Op o, long t) {
      o.start_ns = o.end_ns = t;
      return o;
    };
    // Time order: pre corrections, pre wrapper, core, post wrapper, post corrections.
    if (corr.has_pre)
      for (int q = 0; q < 2; ++q)
        out.ops.push_back(at(Op::physical(q, z_for(q, in, corr.pre)), op.start_ns));
    if (in.wrap_pre)
      out.ops.push_back(at(Op::physical(qd, *in.wrap_pre), op.start_ns));
    Op g = op;
    g.corrected = true;
    out.ops.push_back(g);
    if (in.wrap_post)
      out.ops.push_back(at(Op::physical(qd, *in.wrap_post), op.end_ns));
    for (int q = 0; q < 2; ++q) {
      const double a = q == qd ? corr.post[0] : corr.post[1];
      out.ops.push_back(at(corr.physical ? Op::physical(q, rz(a)) : Op::z(q, a), op.end_ns));
    }
  }
  return out;
}

ScheduledCircuit commute_z_to_end(const ScheduledCircuit &sc) {
  ScheduledCircuit out{sc.num_qubits, {}, sc.duration_ns};
  std::array<double, 2> pend{0.0, 0.0};
  auto flush = [&](int q, long t) {
    double &p = pend[static_cast<std::size_t>(q)];
    if (p != 0.0) {
      Op z = Op::physical(q, rz(p));
      z.start_ns = z.end_ns = t;
      out.ops.push_back(z);
    }
    p = 0.0;
  };
  for (const Op &op : sc.ops) {
    switch (op.kind) {
    case OpKind::VirtualZ:
      pend[static_cast<std::size_t>(op.qubits[0])] += op.theta;
      break;
    case OpKind::Rxy: {
      // Z(p) then R  ==  R' then Z(p), with R' = Z(-p) R Z(p).
      Op r = op;
      r.phi = wrap_angle(op.phi - pend[static_cast<std::size_t>(op.qubits[0])]);
      out.ops.push_back(r);
      break;
    }
    case OpKind::U: {
      Op u = op;
      const double p = pend[static_cast<std::size_t>(op.qubits[0])];
      if (p != 0.0) {
        u.phi = wrap_angle(op.phi - p);
        u.lambda = wrap_angle(op.lambda + p);
        u.elided = false;
      }
      out.ops.push_back(u);
      break;
    }
    case OpKind::Physical:
      flush(op.qubits[0], op.start_ns);
      out.ops.push_back(op);
      break;
    case OpKind::TwoQubit:
      switch (frame_rule(op.gate).commutation) {
      case Commutation::SwapPhases:
        std::swap(pend[0], pend[1]);
        break;
      case Commutation::SwapNegate:
        pend = {-pend[1], -pend[0]};
        break;
      case Commutation::Diagonal:
        break;
      case Commutation::Blocking:
        flush(0, op.start_ns);
        flush(1, op.start_ns);
        break;
      }
      out.ops.push_back(op);
      break;
    case OpKind::Barrier:
    case OpKind::Measure:
      out.ops.push_back(op);
      break;
    }
  }
  for (int q = 0; q < 2; ++q) {
    const double p = wrap_angle(pend[static_cast<std::size_t>(q)]);
    if (p != 0.0) {
      Op z = Op::z(q, p);
      z.start_ns = z.end_ns = sc.duration_ns;
      out.ops.push_back(z);
    }
  }
  return out;
}

ScheduledCircuit absorb_into_u(const ScheduledCircuit &sc) {
  std::vector<Op> ops = sc.ops;
  std::vector<bool> drop(ops.size(), false);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].kind != OpKind::Physical || drop[i])
      continue;
    const int q = ops[i].qubits[0];
    // Collect the run of pending matrices on q starting here (time order).
    Mat2 m = Mat2::Identity();
    std::size_t last = i;
    for (std::size_t j = i; j < ops.size(); ++j) {
      if (!ops[j].acts_on(q))
        continue;
      if (ops[j].kind == OpKind::Physical) {
        m = ops[j].matrix * m;
        drop[j] = true;
        last = j;
      } else if (ops[j].kind != OpKind::Barrier) {
        break;
      }
    }
    auto prev = neighbor(ops, i, q, -1);
    auto next = neighbor(ops, last, q, +1);
    Op *target = nullptr;
    bool after = false;
    if (prev && ops[*prev].slot) {
      target = &ops[*prev];
      after = true;
    } else if (next && ops[*next].slot) {
      target = &ops[*next];
    }
    if (!target)
      throw ValidationError("absorb_into_u: unprovisioned slot needed on qubit " +
                            std::to_string(q));
    const Mat2 u = u_matrix(target->theta, target->phi, target->lambda);
    const auto p = u_params(after ? Mat2(m * u) : Mat2(u * m));
    std::tie(target->theta, target->phi, target->lambda) = std::tuple(p[0], p[1], p[2]);
  }
  ScheduledCircuit out{sc.num_qubits, {}, sc.duration_ns};
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (drop[i])
      continue;
    Op op = ops[i];
    if (op.slot) {
      const Mat2 u = u_matrix(op.theta, op.phi, op.lambda);
      const cplx tr = u.trace() / 2.0;
      op.elided = std::abs(std::abs(tr) - 1.0) < 1e-12;
      if (op.elided)
        op.theta = op.phi = op.lambda = 0.0;
    }
    out.ops.push_back(std::move(op));
  }
  return out;
}

CircuitIR to_circuit(const ScheduledCircuit &sc) {
  CircuitIR c{sc.num_qubits, sc.ops};
  for (auto &op : c.ops)
    op.start_ns = op.end_ns = 0;
  return c;
}

ScheduledCircuit compile(const CircuitIR &c, const GateLibrary &lib, const CompileOptions &opt) {
  for (const auto &op : c.ops)
    if (op.kind == OpKind::Physical)
      throw ValidationError("compile: input contains pending physical corrections");
  const ScheduledCircuit s = schedule(provision_u(c), lib);
  return absorb_into_u(commute_z_to_end(insert_frame_corrections(s, lib, opt.frame_tracking)));
}

} // namespace framewright::compiler
