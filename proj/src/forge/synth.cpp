#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "framewright/error.hpp"
#include "framewright/forge.hpp"

namespace framewright::forge {

using namespace linalg;
using device::kRampSigma;

namespace {

constexpr double kRampTotal = 4 * kRampSigma;

// Hermitian G with U = exp(-i G), eigenphases in (-pi, pi].
Mat4 log_unitary(const Unitary4 &u) {
  Eigen::ComplexSchur<Mat4> schur(u.matrix());
  const Mat4 &q = schur.matrixU();
  Mat4 d = Mat4::Zero();
  for (int k = 0; k < 4; ++k)
    d(k, k) = -std::arg(schur.matrixT()(k, k));
  return q * d * q.adjoint();
}

double pauli_coef(const Mat4 &g, const Mat2 &a, const Mat2 &b) {
  return (kron(a, b) * g).trace().real() / 4.0;
}

TuneResult tune(const DeviceModel &dev, const GateRecipe &r, std::vector<std::string> names) {
  TuneOptions to;
  to.names = std::move(names);
  for (const auto &n : to.names) {
    if (n.find("flat") != std::string::npos)
      to.steps[n] = 2.0;
    else if (n.find("omega") != std::string::npos)
      to.steps[n] = 0.5;
    else if (n == "drag_beta_ns")
      to.steps[n] = 0.5;
    else
      to.steps[n] = 0.05;
  }
  // A capped run restarts from its best point with fresh step sizes.
  GateRecipe start = r;
  for (int attempt = 0;; ++attempt) {
    try {
      return amplitude_fine_tune(dev, start, target_unitary(r.kind), to);
    } catch (const TuneCapError &e) {
      if (attempt == 3)
        throw;
      start = e.partial.recipe;
    }
  }
}

std::vector<std::string> without_durations(const std::vector<std::string> &names) {
  std::vector<std::string> out;
  for (const auto &n : names)
    if (n.find("flat") == std::string::npos)
      out.push_back(n);
  return out;
}

// Rounds every segment built from a flat value to a whole number of ns.
bool snap(GateRecipe &r) {
  bool changed = false;
  for (auto &[k, v] : r.params) {
    if (k == "cr_flat_ns" || k.find("flat") == std::string::npos)
      continue;
    const double snapped = std::max(std::round(v + kRampTotal), std::ceil(kRampTotal)) - kRampTotal;
    changed |= snapped != v;
    v = snapped;
  }
  return changed;
}

Synthesis finish(const DeviceModel &dev, GateRecipe r, const std::vector<std::string> &names,
                 const SynthOptions &opt) {
  // The counter-rotating part of the drive leaves local minima in flat_ns spaced by
  // 1/(2 Omega); start from neighbouring basins and keep the best.
  TuneResult best;
  NumericalError last_error("no basin converged", 1.0);
  const bool multi = std::find(names.begin(), names.end(), "flat_ns") != names.end() &&
                     r.params.count("omega_mhz") && r.get("omega_mhz") > 0;
  const double period = multi ? 1e3 / (2 * r.get("omega_mhz")) : 0.0;
  for (int k = multi ? -2 : 0; k <= (multi ? 2 : 0); ++k) {
    GateRecipe start = r;
    if (multi)
      start.params["flat_ns"] = std::max(0.0, r.get("flat_ns") + k * period);
    try {
      TuneResult t = tune(dev, start, names);
      if (t.infidelity < best.infidelity)
        best = t;
    } catch (const NumericalError &e) {
      if (!multi)
        throw;
      last_error = e;
    }
  }
  if (best.infidelity >= 1.0)
    throw last_error;
  r = best.recipe;
  if (opt.snap_duration && snap(r)) {
    auto rest = without_durations(names);
    if (!rest.empty())
      r = tune(dev, r, rest).recipe;
  }
  Synthesis s = realize(dev, r);
  if (s.infidelity > opt.max_infidelity)
    throw NumericalError(std::string(to_string(r.kind)) +
                             ": synthesized gate misses the infidelity target",
                         s.infidelity);
  return s;
}

double y_sign(const DeviceModel &dev, std::size_t driven, std::size_t idle) {
  return device::pair_parameters(dev, driven, idle).delta_mhz < 0 ? 1.0 : -1.0;
}

// Logical frames of both qubits, so the idle detuning does not wind the eigenphases.
std::array<double, 2> logical_frames(const DeviceModel &dev, const GateRecipe &r) {
  return {dev.qubit(r.driven).f01_mhz(), dev.qubit(r.idle).f01_mhz()};
}

// CR tone alone on the idle qubit, square envelope, no wrappers.
Unitary4 cr_square(const DeviceModel &dev, const GateRecipe &swap, double length) {
  const double fd = dev.qubit(swap.driven).f01_mhz();
  dynamics::Waveform wf;
  device::DriveSegment s;
  s.channel = swap.idle;
  s.drive_freq_mhz = fd;
  s.envelope = device::square(length, swap.get("cr_omega_mhz"), swap.get("cr_phase_rad"));
  wf.segments.push_back(s);
  wf.duration_ns = length;
  return dynamics::frame_evolve(dev, {swap.driven, swap.idle}, wf, logical_frames(dev, swap));
}

} // namespace

Synthesis realize(const DeviceModel &dev, const GateRecipe &r) {
  Synthesis s;
  s.recipe = r;
  s.program = build_program(dev, r);
  const Unitary4 v = canonical_unitary(dev, s.program);
  // CZ frames carry the small dressed-frequency offsets; for a diagonal gate they only
  // contribute a duration-dependent Z, folded in here.
  const Unitary4 scored =
      r.kind == GateKind::CZ_ECHOED_CR
          ? dynamics::frame_wrap(v, s.program.offsets, 0.0, s.program.total_duration())
          : v;
  const auto fit = phase_optimized_distance(scored, target_unitary(r.kind));
  s.infidelity = fit.infidelity;

  auto &in = s.instance;
  in.kind = r.kind;
  in.driven = r.driven;
  in.idle = r.idle;
  in.canonical = v;
  in.frame_offsets = s.program.offsets;
  in.duration_ns = s.program.total_duration();
  in.wrap_pre = s.program.wrap_pre;
  in.wrap_post = s.program.wrap_post;
  if (r.kind == GateKind::CZ_ECHOED_CR) {
    // Diagonal gate: pre and post Zs merge into one time-independent post correction.
    in.static_post = {wrap_angle(fit.phases[0] + fit.phases[2]),
                      wrap_angle(fit.phases[1] + fit.phases[3])};
  }
  return s;
}

Synthesis synth_iswap_onres(const DeviceModel &dev, std::size_t driven, std::size_t idle,
                            const SynthOptions &opt) {
  const auto res = solve_resonance(GateKind::ISWAP_ONRES, dev, driven, idle);
  const double j = device::pair_parameters(dev, driven, idle).j_mhz;
  GateRecipe r{GateKind::ISWAP_ONRES, driven, idle, {}};
  r.params = {{"omega_mhz", res.omega_mhz},
              {"flat_ns", 1e3 / (2 * j) - 34.0},
              {"y_sign", y_sign(dev, driven, idle)}};
  return finish(dev, r, {"omega_mhz", "flat_ns"}, opt);
}

double cr_xz_angle(const DeviceModel &dev, const GateRecipe &swap) {
  const auto p = build_program(dev, swap);
  dynamics::Waveform wf;
  for (const auto &s : p.waveform.segments)
    if (s.channel == swap.idle)
      wf.segments.push_back(s);
  wf.duration_ns = p.waveform.duration_ns;
  const Unitary4 u = dynamics::frame_evolve(dev, p.qubits, wf, logical_frames(dev, swap));
  // exp(-i theta/2 XZ): coefficient of XZ in G is theta/2.
  return 2.0 * pauli_coef(log_unitary(u), pauli::X(), pauli::Z());
}

double cr_stark_shift(const DeviceModel &dev, const GateRecipe &swap) {
  constexpr double len = 100.0;
  GateRecipe off = swap;
  off.params["cr_omega_mhz"] = 0.0;
  const double with = pauli_coef(log_unitary(cr_square(dev, swap, len)), pauli::I(), pauli::Z());
  const double without = pauli_coef(log_unitary(cr_square(dev, off, len)), pauli::I(), pauli::Z());
  // IZ coefficient of the generator is (f_idle - f_frame)/2 * 2pi * 1e-3 * len.
  return 2 * (with - without) / (kTwoPiMHz * len);
}

Synthesis synth_swap(const DeviceModel &dev, std::size_t driven, std::size_t idle,
                     const SynthOptions &opt) {
  const auto pp = device::pair_parameters(dev, driven, idle);
  SynthOptions loose;
  loose.snap_duration = false;
  loose.max_infidelity = 1.0;
  const Synthesis base = synth_iswap_onres(dev, driven, idle, loose);
  GateRecipe r = base.recipe;
  r.kind = GateKind::SWAP;
  r.params["cr_phase_rad"] = 0.0;
  r.params["cr_omega_mhz"] = 30.0;

  // Fixed point: CR amplitude for a pi/2 XZ angle, then the drive amplitude that is
  // resonant with the CR-shifted idle qubit.
  double omega = r.get("omega_mhz");
  for (int it = 0; it < 10; ++it) {
    auto angle = [&](double a) {
      GateRecipe t = r;
      t.params["cr_omega_mhz"] = a;
      return std::abs(cr_xz_angle(dev, t)) - kPi / 2;
    };
    double a0 = r.get("cr_omega_mhz"), a1 = a0 * 1.1;
    double g0 = angle(a0), g1 = angle(a1);
    for (int k = 0; k < 30 && std::abs(g1) > 1e-10; ++k) {
      const double a2 = a1 - g1 * (a1 - a0) / (g1 - g0);
      a0 = a1;
      g0 = g1;
      a1 = std::clamp(a2, 1.0, 200.0);
      g1 = angle(a1);
    }
    if (std::abs(g1) > 1e-6)
      throw NumericalError("SWAP: CR amplitude calibration did not converge", std::abs(g1));
    r.params["cr_omega_mhz"] = a1;
    const double shift = cr_stark_shift(dev, r);
    const double next = std::abs(pp.delta_mhz - shift);
    const bool done = std::abs(next - omega) < 1e-3;
    omega = next;
    r.params["omega_mhz"] = omega;
    if (done)
      break;
  }

  // cr_phase 0 is a symmetric saddle of the objective; seed just off it. The opposite CR
  // sign gives the same SWAP up to Z (x) Z, so one sign suffices.
  r.params["cr_phase_rad"] = 0.3;
  return finish(dev, r, {"omega_mhz", "flat_ns", "cr_omega_mhz", "cr_phase_rad"}, opt);
}

namespace {

Synthesis synth_stark(GateKind kind, const DeviceModel &dev, std::size_t driven,
                      std::size_t idle, const SynthOptions &opt) {
  Resonance res;
  if (kind == GateKind::BSWAP_STARK)
    res = solve_resonance(kind, dev, driven, idle,
                          opt.drive_freq_mhz.value_or(dev.qubit(driven).f01_mhz() - 44.0));
  else
    res = solve_resonance(kind, dev, driven, idle, opt.lambda_mhz.value_or(60.0));
  const auto pp = device::pair_parameters(dev, driven, idle);
  const double opr = std::hypot(res.omega_mhz, res.lambda_mhz);
  // Exchange rate J/4 * (1 + lambda/Omega') for XX+YY, J/4 * (1 - |lambda|/Omega') for XX-YY.
  const double rate = kind == GateKind::BSWAP_STARK
                          ? pp.j_mhz / 4 * (1 - std::abs(res.lambda_mhz) / opr)
                          : pp.j_mhz / 4 * (1 + std::abs(res.lambda_mhz) / opr);
  double t_eff = 1e3 / (8 * rate);
  if (kind == GateKind::SQISWAP_STARK)
    t_eff /= 2;
  GateRecipe r{kind, driven, idle, {}};
  r.params = {{"omega_mhz", res.omega_mhz},
              {"lambda_mhz", res.lambda_mhz},
              {"flat_ns", std::max(0.0, t_eff - 0.5 * kRampTotal)},
              {"drag_beta_ns", 0.0}};
  return finish(dev, r, {"omega_mhz", "flat_ns", "drag_beta_ns"}, opt);
}

} // namespace

Synthesis synth_stark_iswap(const DeviceModel &dev, std::size_t driven, std::size_t idle,
                            const SynthOptions &opt) {
  return synth_stark(GateKind::ISWAP_STARK, dev, driven, idle, opt);
}

Synthesis synth_stark_bswap(const DeviceModel &dev, std::size_t driven, std::size_t idle,
                            const SynthOptions &opt) {
  return synth_stark(GateKind::BSWAP_STARK, dev, driven, idle, opt);
}

Synthesis synth_sqiswap(GateKind variant, const DeviceModel &dev, std::size_t driven,
                        std::size_t idle, const SynthOptions &opt) {
  if (variant == GateKind::SQISWAP_STARK)
    return synth_stark(variant, dev, driven, idle, opt);
  if (variant != GateKind::SQISWAP_ONRES)
    throw ValidationError("synth_sqiswap: variant must be SQISWAP_ONRES or SQISWAP_STARK");
  const auto res = solve_resonance(variant, dev, driven, idle);
  const double j = device::pair_parameters(dev, driven, idle).j_mhz;
  GateRecipe r{variant, driven, idle, {}};
  r.params = {{"omega_mhz", res.omega_mhz},
              {"flat_ns", 1e3 / (4 * j) - 34.0},
              {"y_sign", y_sign(dev, driven, idle)}};
  return finish(dev, r, {"omega_mhz", "flat_ns"}, opt);
}

Synthesis synth_bgate(const DeviceModel &dev, std::size_t driven, std::size_t idle,
                      const SynthOptions &opt) {
  const auto res = solve_resonance(GateKind::B, dev, driven, idle);
  const double j = device::pair_parameters(dev, driven, idle).j_mhz;
  const double full = 1e3 / (2 * j);
  GateRecipe r{GateKind::B, driven, idle, {}};
  r.params = {{"omega_mhz", res.omega_mhz},
              {"omega2_mhz", res.omega_mhz},
              {"flat_ns", 0.75 * full - 34.0},
              {"flat2_ns", std::max(0.0, 0.25 * full - 34.0)},
              {"y_sign", y_sign(dev, driven, idle)}};
  return finish(dev, r, {"omega_mhz", "flat_ns", "omega2_mhz", "flat2_ns"}, opt);
}

Synthesis synth_cz_echoed_cr(const DeviceModel &dev, std::size_t control, std::size_t target,
                             const SynthOptions &opt) {
  const auto pp = device::pair_parameters(dev, control, target);
  // Two CR blocks fill 512 ns together with four 64 ns single-qubit layers.
  const double flat = 128.0 - kRampTotal;
  // ZX rate (J/2) sin(eta), tan(eta) = Omega / |Delta|; lifted ramps count as about half their length.
  const double t_eff = flat + 0.55 * kRampTotal;
  // pi/4 per block: (J/2) sin(eta) * 2pi * 1e-3 * t_eff = pi/8.
  const double s = std::min(0.95, 1e3 / (8 * pp.j_mhz * t_eff));
  const double cr0 = std::abs(pp.delta_mhz) * std::tan(std::asin(s));
  Synthesis best;
  for (double ph : {0.0, kPi}) {
    GateRecipe r{GateKind::CZ_ECHOED_CR, control, target, {}};
    r.params = {{"cr_omega_mhz", cr0},
                {"cr_phase_rad", ph},
                {"cr_flat_ns", flat},
                {"rotary_mhz", 0.0}};
    SynthOptions o = opt;
    o.max_infidelity = 1.0;
    Synthesis cand = finish(dev, r, {"cr_omega_mhz", "cr_phase_rad"}, o);
    if (best.infidelity > cand.infidelity)
      best = cand;
  }
  if (best.infidelity > opt.max_infidelity)
    throw NumericalError("CZ_ECHOED_CR: synthesized gate misses the infidelity target",
                         best.infidelity);
  return best;
}

std::array<std::string, 2> default_pair_labels(GateKind kind) {
  switch (kind) {
  case GateKind::BSWAP_STARK:
    return {"Q12", "Q8"};
  case GateKind::CZ_ECHOED_CR:
    return {"Q8", "Q12"};
  default:
    return {"Q8", "Q9"};
  }
}

Synthesis synthesize(const DeviceModel &dev, GateKind kind, std::size_t driven, std::size_t idle,
                     const SynthOptions &opt) {
  switch (kind) {
  case GateKind::ISWAP_ONRES:
    return synth_iswap_onres(dev, driven, idle, opt);
  case GateKind::SWAP:
    return synth_swap(dev, driven, idle, opt);
  case GateKind::ISWAP_STARK:
    return synth_stark_iswap(dev, driven, idle, opt);
  case GateKind::BSWAP_STARK:
    return synth_stark_bswap(dev, driven, idle, opt);
  case GateKind::SQISWAP_ONRES:
  case GateKind::SQISWAP_STARK:
    return synth_sqiswap(kind, dev, driven, idle, opt);
  case GateKind::B:
    return synth_bgate(dev, driven, idle, opt);
  case GateKind::CZ_ECHOED_CR:
    return synth_cz_echoed_cr(dev, driven, idle, opt);
  }
  throw ValidationError("unknown gate kind");
}

Unitary4 ideal_echoed_cr_cz() {
  const Mat2 i2 = pauli::I();
  auto zx = [](double theta) {
    return expm_hermitian(Hermitian4::from_matrix(kron(pauli::Z(), pauli::X()) * (theta / 2)), 1.0);
  };
  auto loc = [](const Mat2 &a, const Mat2 &b) { return Unitary4::project(kron(a, b)); };
  const Mat2 pi34 = rxy(kPi, 3 * kPi / 4);
  Unitary4 u = loc(i2, rxy(kPi / 2, kPi / 2));
  u = loc(pi34, rxy(kPi / 2, 0.0)) * u;
  u = zx(kPi / 4) * u;
  u = loc(rxy(kPi, 0.0), i2) * u;
  u = zx(-kPi / 4) * u;
  u = loc(i2, rxy(-kPi / 2, kPi / 2)) * u;
  return u;
}

} // namespace framewright::forge
