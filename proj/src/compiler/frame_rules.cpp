#include <cmath>

#include "framewright/compiler.hpp"
#include "framewright/error.hpp"

namespace framewright::compiler {

using namespace linalg;

const FrameRule &frame_rule(GateKind k) {
  static const FrameRule iswap{Placement::BackOnly, RateSource::Detuning,
                               Commutation::SwapPhases};
  static const FrameRule bswap{Placement::BackOnly, RateSource::StarkShift,
                               Commutation::SwapNegate};
  static const FrameRule sqiswap{Placement::FrontBackDriven, RateSource::Detuning,
                                 Commutation::Blocking};
  static const FrameRule bgate{Placement::FrontBackIdle, RateSource::Detuning,
                               Commutation::Blocking};
  static const FrameRule cz{Placement::None, RateSource::None, Commutation::Diagonal};
  switch (k) {
  case GateKind::ISWAP_ONRES:
  case GateKind::SWAP:
  case GateKind::ISWAP_STARK:
    return iswap;
  case GateKind::BSWAP_STARK:
    return bswap;
  case GateKind::SQISWAP_ONRES:
  case GateKind::SQISWAP_STARK:
    return sqiswap;
  case GateKind::B:
    return bgate;
  case GateKind::CZ_ECHOED_CR:
    return cz;
  }
  throw ValidationError("frame_rule: unknown gate kind");
}

int driven_slot(const GateInstance &in) { return in.driven < in.idle ? 0 : 1; }

namespace {

// Time-dependent parts only (phases zero).
GateCorrections rate_terms(const GateInstance &in, double ts, double te) {
  const double od = kTwoPiMHz * in.frame_offsets.driven_mhz;
  const double oi = kTwoPiMHz * in.frame_offsets.idle_mhz;
  GateCorrections c;
  switch (frame_rule(in.kind).placement) {
  case Placement::BackOnly:
    if (frame_rule(in.kind).commutation == Commutation::SwapPhases) {
      // Detuning rate: o_i - o_d = f_driven - f_idle.
      c.post = {(oi - od) * te, (od - oi) * te};
    } else {
      // Stark rate: -(o_d + o_i) = omega_s.
      c.post = {-(od + oi) * te, -(od + oi) * te};
    }
    break;
  case Placement::FrontBackDriven:
    c.has_pre = true;
    c.physical = true;
    c.pre = {-(oi - od) * ts, 0.0};
    c.post = {(oi - od) * te, 0.0};
    break;
  case Placement::FrontBackIdle:
    c.has_pre = true;
    c.physical = true;
    c.pre = {od * ts, oi * ts};
    c.post = {-od * te, -oi * te};
    break;
  case Placement::None:
    break;
  }
  return c;
}

// Phase slots: which (pre/post, driven/idle) entry each calibrated phase adds to.
struct Slot {
  bool post;
  int which;
};

std::vector<Slot> phase_slots(GateKind k) {
  switch (frame_rule(k).placement) {
  case Placement::BackOnly:
    return {{true, 0}, {true, 1}};
  case Placement::FrontBackDriven:
    return {{false, 0}, {true, 0}, {true, 1}};
  case Placement::FrontBackIdle:
    return {{false, 0}, {true, 0}, {false, 1}, {true, 1}};
  case Placement::None:
    return {};
  }
  return {};
}

double &entry(GateCorrections &c, Slot s) { return s.post ? c.post[s.which] : c.pre[s.which]; }

} // namespace

GateCorrections gate_corrections(const GateInstance &in, double ts, double te, bool tracking) {
  GateCorrections c = tracking ? rate_terms(in, ts, te) : rate_terms(in, 0.0, 0.0);
  const auto slots = phase_slots(in.kind);
  if (frame_rule(in.kind).placement == Placement::None) {
    c.post = in.static_post;
    return c;
  }
  if (!in.calibrated())
    throw ValidationError(std::string("missing calibrated phases for ") +
                          std::string(to_string(in.kind)));
  for (std::size_t i = 0; i < slots.size(); ++i)
    entry(c, slots[i]) += in.calibrated_phases[i];
  return c;
}

Unitary4 corrected_gate(const GateInstance &in, double ts, double te, bool tracking) {
  const auto c = gate_corrections(in, ts, te, tracking);
  const Unitary4 pre = Unitary4::from_matrix(zz_layer(c.pre[0], c.pre[1]));
  const Unitary4 post = Unitary4::from_matrix(zz_layer(c.post[0], c.post[1]));
  return post * dynamics::frame_wrap(in, ts, te) * pre;
}

std::vector<double> oracle_phases(const GateInstance &in) {
  const auto slots = phase_slots(in.kind);
  if (slots.empty())
    return {};
  const double t = in.duration_ns;
  const Unitary4 m = dynamics::frame_wrap(in, 0.0, t);
  const auto fit = phase_optimized_distance(m, target_unitary(in.kind));
  const auto [a, b, c, d] = fit.phases;
  // (Z(a) x Z(b)) M (Z(c) x Z(d)) ~ T; move the right-hand Zs to where the rule wants them.
  GateCorrections want;
  switch (frame_rule(in.kind).placement) {
  case Placement::BackOnly:
    if (frame_rule(in.kind).commutation == Commutation::SwapPhases)
      want.post = {a + d, b + c};
    else
      want.post = {a - d, b - c};
    break;
  case Placement::FrontBackDriven:
    // Z(c) x Z(d) = (Z(c - d) x I)(Z(d) x Z(d)), and Z(d) x Z(d) commutes with the gate.
    want.pre = {c - d, 0.0};
    want.post = {a + d, b + d};
    break;
  case Placement::FrontBackIdle:
    want.pre = {c, d};
    want.post = {a, b};
    break;
  case Placement::None:
    break;
  }
  GateCorrections rate = rate_terms(in, 0.0, t);
  std::vector<double> phases;
  for (const auto &s : slots)
    phases.push_back(wrap_angle(entry(want, s) - entry(rate, s)));
  return phases;
}

GateLibrary ideal_library(const GateLibrary &lib) {
  GateLibrary out;
  for (const auto &[k, s] : lib.gates()) {
    forge::Synthesis copy = s;
    auto &in = copy.instance;
    in.canonical = target_unitary(k);
    in.static_post = {0.0, 0.0};
    if (frame_rule(k).placement == Placement::None) {
      const auto fit = phase_optimized_distance(dynamics::frame_wrap(in, 0.0, in.duration_ns),
                                                target_unitary(k));
      in.static_post = {wrap_angle(fit.phases[0] + fit.phases[2]),
                        wrap_angle(fit.phases[1] + fit.phases[3])};
    }
    in.calibrated_phases = oracle_phases(in);
    copy.infidelity = 0.0;
    out.put(std::move(copy));
  }
  return out;
}

void calibrate_with_oracle(GateLibrary &lib) {
  for (auto &[k, s] : lib.gates())
    if (!s.instance.calibrated())
      lib.at(k).instance.calibrated_phases = oracle_phases(s.instance);
}

} // namespace framewright::compiler
