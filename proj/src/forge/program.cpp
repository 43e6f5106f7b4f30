#include <cmath>

#include "framewright/error.hpp"
#include "framewright/forge.hpp"

namespace framewright::forge {

using namespace linalg;
using device::DriveSegment;
using device::kOneQubitSigma;
using device::kRampSigma;

double GateRecipe::get(const std::string &key) const {
  auto it = params.find(key);
  if (it == params.end())
    throw ValidationError(std::string(to_string(kind)) + " recipe lacks parameter '" + key + "'");
  return it->second;
}

double GateRecipe::get_or(const std::string &key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

namespace {

DriveSegment seg(std::size_t ch, double f, device::PulseEnvelope env, double start) {
  DriveSegment s;
  s.channel = ch;
  s.drive_freq_mhz = f;
  s.envelope = env;
  s.start_ns = start;
  return s;
}

DriveSegment pulse_1q(std::size_t ch, double f, double theta, double phi, double start) {
  const double a = device::gaussian_amplitude_for(std::abs(theta), kOneQubitSigma);
  return seg(ch, f, device::gaussian(kOneQubitSigma, a, theta < 0 ? phi + kPi : phi), start);
}

device::PulseEnvelope drive(double flat, double omega, double phase, bool lifted,
                            double beta = 0.0, double lambda = 0.0) {
  if (flat < 0)
    throw ValidationError("negative flat-top duration");
  auto e = device::flat_top(kRampSigma, flat, omega, phase);
  e.lifted = lifted;
  e.drag_beta = beta;
  e.detuning_mhz = lambda;
  return e;
}

} // namespace

PulseProgram build_program(const DeviceModel &dev, const GateRecipe &r) {
  const std::size_t d = r.driven, i = r.idle;
  const double fd = dev.qubit(d).f01_mhz();
  const double fi = dev.qubit(i).f01_mhz();
  const double delta = fd - fi;
  if (!dev.coupling(d, i))
    throw ValidationError("gate pair is not coupled");

  PulseProgram p;
  p.qubits = {d, i};
  auto &wf = p.waveform;
  switch (r.kind) {
  case GateKind::ISWAP_ONRES:
  case GateKind::SWAP: {
    const double ys = r.get("y_sign");
    wf.segments.push_back(pulse_1q(d, fd, kPi / 2, ys * kPi / 2, 0.0));
    auto x = seg(d, fd, drive(r.get("flat_ns"), r.get("omega_mhz"), 0.0, false), 64.0);
    wf.segments.push_back(x);
    if (r.kind == GateKind::SWAP) {
      wf.segments.push_back(seg(i, fd,
                                drive(r.get("flat_ns"), r.get("cr_omega_mhz"),
                                      r.get("cr_phase_rad"), true),
                                64.0));
    }
    wf.segments.push_back(pulse_1q(d, fd, kPi / 2, -ys * kPi / 2, x.end_ns()));
    wf.duration_ns = x.end_ns() + 64.0;
    p.frame_mhz = {fd, fd};
    p.offsets = {0.0, delta};
    break;
  }
  case GateKind::ISWAP_STARK:
  case GateKind::BSWAP_STARK:
  case GateKind::SQISWAP_STARK: {
    const double lam = r.get("lambda_mhz");
    const double fdrive = fd - lam;
    auto x = seg(d, fdrive,
                 drive(r.get("flat_ns"), r.get("omega_mhz"), 0.0, true,
                       r.get_or("drag_beta_ns", 0.0), lam),
                 0.0);
    wf.segments.push_back(x);
    wf.duration_ns = x.end_ns();
    p.frame_mhz = {fdrive, fdrive};
    p.offsets = {-lam, delta - lam};
    break;
  }
  case GateKind::SQISWAP_ONRES: {
    const double ys = r.get("y_sign");
    auto x = seg(d, fd, drive(r.get("flat_ns"), r.get("omega_mhz"), 0.0, false), 0.0);
    wf.segments.push_back(x);
    wf.duration_ns = x.end_ns();
    wf.rotations.push_back({d, 0.0, kPi / 2, ys * kPi / 2});
    wf.rotations.push_back({d, wf.duration_ns, kPi / 2, -ys * kPi / 2});
    p.wrap_pre = rxy(kPi / 2, ys * kPi / 2);
    p.wrap_post = rxy(kPi / 2, -ys * kPi / 2);
    p.frame_mhz = {fd, fd};
    p.offsets = {0.0, delta};
    break;
  }
  case GateKind::B: {
    const double ys = r.get("y_sign");
    auto x1 = seg(d, fd, drive(r.get("flat_ns"), r.get("omega_mhz"), 0.0, false), 0.0);
    auto x2 = seg(d, fd, drive(r.get("flat2_ns"), r.get("omega2_mhz"), kPi, false), x1.end_ns());
    wf.segments = {x1, x2};
    wf.duration_ns = x2.end_ns();
    wf.rotations.push_back({d, 0.0, kPi / 2, ys * kPi / 2});
    wf.rotations.push_back({d, wf.duration_ns, kPi / 2, -ys * kPi / 2});
    p.wrap_pre = rxy(kPi / 2, ys * kPi / 2);
    p.wrap_post = rxy(kPi / 2, -ys * kPi / 2);
    p.frame_mhz = {fd, fd};
    p.offsets = {0.0, delta};
    break;
  }
  case GateKind::CZ_ECHOED_CR: {
    // driven = CR control, idle = CR target. Pulses and frames sit at the dressed
    // frequencies, so the exchange shift does not dephase the echo.
    const auto [dd, di] = device::dressed_frequencies(dev, d, i);
    const double cr = r.get("cr_omega_mhz"), ph = r.get("cr_phase_rad");
    const double flat = r.get("cr_flat_ns"), rot = r.get_or("rotary_mhz", 0.0);
    double t = 0.0;
    wf.segments.push_back(pulse_1q(i, di, kPi / 2, kPi / 2, t));
    t += 64.0;
    wf.segments.push_back(pulse_1q(d, dd, kPi, 3 * kPi / 4, t));
    wf.segments.push_back(pulse_1q(i, di, kPi / 2, 0.0, t));
    t += 64.0;
    for (int half = 0; half < 2; ++half) {
      const double sgn = half == 0 ? 0.0 : kPi;
      auto c = seg(d, di, drive(flat, cr, ph + sgn, true), t);
      wf.segments.push_back(c);
      if (rot != 0.0)
        wf.segments.push_back(
            seg(i, di, drive(flat, std::abs(rot), (rot < 0 ? kPi : 0.0) + ph + sgn, true), t));
      t = c.end_ns();
      if (half == 0) {
        wf.segments.push_back(pulse_1q(d, dd, kPi, 0.0, t));
        t += 64.0;
      }
    }
    wf.segments.push_back(pulse_1q(i, di, -kPi / 2, kPi / 2, t));
    t += 64.0;
    wf.duration_ns = t;
    p.frame_mhz = {dd, di};
    p.offsets = {dd - fd, di - fi};
    break;
  }
  }
  return p;
}

Unitary4 canonical_unitary(const DeviceModel &dev, const PulseProgram &p) {
  return dynamics::frame_evolve(dev, p.qubits, p.waveform, p.frame_mhz);
}

Resonance solve_resonance(GateKind kind, const DeviceModel &dev, std::size_t driven,
                          std::size_t idle, double free_param) {
  const auto pp = device::pair_parameters(dev, driven, idle);
  const double fd = dev.qubit(driven).f01_mhz(), fi = dev.qubit(idle).f01_mhz();
  Resonance r;
  auto invert_shift = [](double ws, double lam) {
    // stark_shift(Omega, lam) = ws  ->  Omega = sqrt((ws + lam)^2 - lam^2)
    if (lam == 0.0)
      throw ValidationError("Stark detuning must be nonzero");
    if ((ws > 0) != (lam > 0) || ws == 0.0)
      throw NumericalError("required Stark shift has the wrong sign for this detuning");
    const double a = (ws + lam) * (ws + lam) - lam * lam;
    if (!(a > 0))
      throw NumericalError("no real drive amplitude reaches the required Stark shift");
    return std::sqrt(a);
  };
  switch (kind) {
  case GateKind::ISWAP_ONRES:
  case GateKind::SQISWAP_ONRES:
  case GateKind::B:
  case GateKind::SWAP:
    // SWAP adds the CR-induced shift on top; see synth_swap.
    r.omega_mhz = std::abs(pp.delta_mhz);
    r.drive_freq_mhz = fd;
    break;
  case GateKind::ISWAP_STARK:
  case GateKind::SQISWAP_STARK: {
    const double lam = free_param;
    r.lambda_mhz = lam;
    r.stark_shift_mhz = fi - fd;
    r.omega_mhz = invert_shift(r.stark_shift_mhz, lam);
    r.drive_freq_mhz = fd - lam;
    break;
  }
  case GateKind::BSWAP_STARK: {
    const double wd = free_param;
    r.drive_freq_mhz = wd;
    r.lambda_mhz = fd - wd;
    r.stark_shift_mhz = 2 * wd - fd - fi;
    r.omega_mhz = invert_shift(r.stark_shift_mhz, r.lambda_mhz);
    break;
  }
  case GateKind::CZ_ECHOED_CR:
    r.drive_freq_mhz = fi;
    break;
  }
  return r;
}

} // namespace framewright::forge
