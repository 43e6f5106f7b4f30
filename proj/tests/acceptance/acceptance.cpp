// Acceptance checks. One PASS/FAIL line per criterion; `--criterion N` runs a single one.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "common.hpp"
#include "framewright/calib.hpp"
#include "framewright/error.hpp"
#include "framewright/rb.hpp"

using namespace framewright;
using namespace framewright::linalg;
using compiler::CircuitIR;
using dynamics::GateInstance;
using compiler::Op;
using fwtest::kQ12;
using fwtest::kQ8;
using fwtest::kQ9;

namespace {

// Tolerances.
constexpr double kIdentityTol = 1e-12;
constexpr double kResonanceTol = 1e-9;
constexpr double kGateFidelity = 0.999;
constexpr double kCompositeFidelity = 0.998;
constexpr double kOracleFidelity = 0.999;
constexpr double kUntrackedMedian = 0.99;
constexpr double kRatioTarget = 2.0, kRatioTol = 0.2;
constexpr double kTransferTol = 0.15;
constexpr double kPhaseTol = 1e-2;
constexpr double kEpcRelTol = 0.10;
constexpr double kNoiselessTol = 1e-6;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;
  void check(bool ok, std::string what) {
    if (!ok)
      pass = false;
    notes.push_back((ok ? "  ok   " : "  FAIL ") + std::move(what));
  }
};

bool same_gate(const Mat4 &a, const Mat4 &b, double tol) {
  const cplx ov = (a.adjoint() * b).trace() / 4.0;
  return (a * ov / std::abs(ov) - b).cwiseAbs().maxCoeff() < tol;
}

double fidelity_with_corrections(const forge::Synthesis &s, const GateInstance &in, double ts) {
  const auto &dev = fwtest::table1();
  const auto u = dynamics::reference_evolve(dev, s.program.qubits, s.program.waveform, ts);
  const auto c = compiler::gate_corrections(in, ts, ts + in.duration_ns);
  return average_gate_fidelity(Unitary4::from_matrix(zz_layer(c.post[0], c.post[1])) * u *
                                   Unitary4::from_matrix(zz_layer(c.pre[0], c.pre[1])),
                               target_unitary(in.kind));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1: commutation rules of virtual Z through each gate family.
Outcome criterion1() {
  Outcome o;
  const double a = 0.37, b = -1.21;
  for (GateKind k : kAllGateKinds) {
    const Mat4 g = target_unitary(k).matrix();
    switch (compiler::frame_rule(k).commutation) {
    case Commutation::SwapPhases:
      o.check(same_gate(g * zz_layer(a, b), zz_layer(b, a) * g, kIdentityTol),
              fmt::format("{}: Z(a)Z(b) -> Z(b)Z(a)", to_string(k)));
      break;
    case Commutation::SwapNegate:
      o.check(same_gate(g * zz_layer(a, b), zz_layer(-b, -a) * g, kIdentityTol),
              fmt::format("{}: Z(a)Z(b) -> Z(-b)Z(-a)", to_string(k)));
      break;
    case Commutation::Diagonal:
      o.check(same_gate(g * zz_layer(a, 0.0), zz_layer(a, 0.0) * g, kIdentityTol),
              fmt::format("{}: Z on control commutes", to_string(k)));
      break;
    case Commutation::Blocking:
      o.check(!same_gate(g * zz_layer(a, b), zz_layer(a, b) * g, 1e-3) &&
                  !same_gate(g * zz_layer(a, b), zz_layer(b, a) * g, 1e-3),
              fmt::format("{}: blocks Z (no commutation rule applies)", to_string(k)));
      break;
    }
  }
  const Mat4 xx = kron(pauli::X(), pauli::X()), yy = kron(pauli::Y(), pauli::Y());
  const Mat4 zi = kron(pauli::Z(), pauli::I()), iz = kron(pauli::I(), pauli::Z());
  const Mat4 zx = kron(pauli::Z(), pauli::X());
  o.check(((xx + yy) * (zi + iz) - (zi + iz) * (xx + yy)).cwiseAbs().maxCoeff() < kIdentityTol,
          "[XX+YY, ZI+IZ] = 0");
  o.check(((xx - yy) * (zi - iz) - (zi - iz) * (xx - yy)).cwiseAbs().maxCoeff() < kIdentityTol,
          "[XX-YY, ZI-IZ] = 0");
  o.check((zx * zi - zi * zx).cwiseAbs().maxCoeff() < kIdentityTol, "[ZX, ZI] = 0");
  return o;
}

// 2: resonance conditions.
Outcome criterion2() {
  Outcome o;
  const auto &dev = fwtest::table1();
  const auto on = forge::solve_resonance(GateKind::ISWAP_ONRES, dev, kQ8, kQ9);
  o.check(std::abs(on.omega_mhz - 54.0) < kResonanceTol, fmt::format("on-resonant Omega = {:.9f} MHz", on.omega_mhz));
  const auto st = forge::solve_resonance(GateKind::ISWAP_STARK, dev, kQ8, kQ9, 60.0);
  const double closure = 4726.0 + device::stark_shift(st.omega_mhz, st.lambda_mhz) - 4780.0;
  o.check(std::abs(closure) < kResonanceTol, fmt::format("Stark ISWAP Omega = {:.6f} MHz, closure {:.2e}",
                                                         st.omega_mhz, closure));
  o.check(std::abs(st.omega_mhz - std::sqrt(114.0 * 114.0 - 3600.0)) < kResonanceTol, "Stark ISWAP closed form");
  const auto bs = forge::solve_resonance(GateKind::BSWAP_STARK, dev, kQ12, kQ8, 4850.0 - 44.0);
  const double two_photon = 4850.0 + device::stark_shift(bs.omega_mhz, bs.lambda_mhz) + 4726.0 - 2 * bs.drive_freq_mhz;
  o.check(std::abs(bs.stark_shift_mhz - 36.0) < kResonanceTol && std::abs(two_photon) < kResonanceTol,
          fmt::format("BSWAP shift {:.6f} MHz, Omega = {:.6f} MHz, closure {:.2e}", bs.stark_shift_mhz,
                      bs.omega_mhz, two_photon));
  return o;
}

// 3: fresh synthesis and pulse-level Ramsey calibration of every gate.
Outcome criterion3() {
  Outcome o;
  const auto &dev = fwtest::table1();
  forge::GateLibrary lib;
  for (GateKind k : kAllGateKinds) {
    const auto labels = forge::default_pair_labels(k);
    auto s = forge::synthesize(dev, k, dev.index_of(labels[0]), dev.index_of(labels[1]));
    calib::calibrate_phases(s.instance, calib::pulse_action(dev, s));
    const double f = fidelity_with_corrections(s, s.instance, 128.0);
    o.check(f >= kGateFidelity, fmt::format("{} ({} ns): F = {:.6f}", to_string(k), s.instance.duration_ns, f));
    lib.put(std::move(s));
  }
  compiler::SimOptions sim;
  sim.model = compiler::SimOptions::Model::Pulse;
  sim.device = &dev;
  const std::pair<const char *, rb::Interleave> comps[] = {
      {"sqrt-ISWAP ONRES pair", {rb::Interleave::Kind::SqiswapPair, GateKind::SQISWAP_ONRES}},
      {"sqrt-ISWAP STARK pair", {rb::Interleave::Kind::SqiswapPair, GateKind::SQISWAP_STARK}},
      {"B pair", {rb::Interleave::Kind::BPair, GateKind::B}}};
  for (const auto &[name, il] : comps) {
    const CircuitIR c = rb::interleave_circuit(il);
    const auto sc = compiler::compile(c, lib);
    const double f = average_gate_fidelity(compiler::circuit_unitary(sc, lib, sim), targets::iswap());
    o.check(f >= kCompositeFidelity, fmt::format("{} vs ISWAP: F = {:.6f}", name, f));
  }
  return o;
}

// 4: frame-tracked model V against the absolute-time integrator.
Outcome criterion4() {
  Outcome o;
  const auto &dev = fwtest::table1();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ts(0.0, 10000.0);
  for (const auto &[k, s] : fwtest::bundled_library().gates()) {
    double worst = 1.0;
    for (int i = 0; i < 20; ++i) {
      const double t = std::round(ts(rng));
      const auto u = dynamics::reference_evolve(dev, s.program.qubits, s.program.waveform, t);
      worst = std::min(worst, average_gate_fidelity(u, dynamics::frame_wrap(s.instance, t, t + s.instance.duration_ns)));
    }
    o.check(worst >= kOracleFidelity, fmt::format("{}: worst F = {:.6f} over 20 start times", to_string(k), worst));
  }
  return o;
}

// 5: frame tracking on and off after prefixes of 64 ns pulses.
Outcome criterion5() {
  Outcome o;
  const auto &lib = fwtest::bundled_library();
  compiler::SimOptions sim;
  sim.model = compiler::SimOptions::Model::Pulse;
  sim.device = &fwtest::table1();
  compiler::CompileOptions off;
  off.frame_tracking = false;
  for (const auto &[k, s] : lib.gates()) {
    if (compiler::frame_rule(k).placement == Placement::None)
      continue; // no frame rotation to track
    double worst_on = 1.0;
    std::vector<double> untracked;
    for (int n = 1; n <= 9; ++n) {
      CircuitIR c;
      for (int i = 0; i < n; ++i)
        c.ops.push_back(Op::rxy(i % 2, kPi / 2, 0.3 * i));
      c.ops.push_back(Op::two_qubit(k));
      const auto ideal = compiler::ideal_unitary(c);
      worst_on = std::min(worst_on, average_gate_fidelity(compiler::circuit_unitary(compiler::compile(c, lib), lib, sim), ideal));
      untracked.push_back(
          average_gate_fidelity(compiler::circuit_unitary(compiler::compile(c, lib, off), lib, sim), ideal));
    }
    o.check(worst_on >= kGateFidelity, fmt::format("{}: tracked worst F = {:.6f}", to_string(k), worst_on));
    const double med = median(untracked);
    o.check(med < kUntrackedMedian, fmt::format("{}: untracked median F = {:.4f}", to_string(k), med));
  }
  return o;
}

// 6: chevron and FLICFORQ exchange rates on Q8/Q9.
Outcome criterion6() {
  Outcome o;
  const auto &dev = fwtest::table1();
  const double step = 2.0;
  std::vector<double> amps, durs;
  for (double a = 30; a <= 78 + 1e-9; a += step)
    amps.push_back(a);
  for (double t = 5; t <= 600; t += 5)
    durs.push_back(t);
  const auto ch = dynamics::chevron_sweep(dev, kQ8, kQ9, amps, durs);
  const double ridge = ch.ridge_amplitude();
  o.check(std::abs(ridge - 54.0) <= step, fmt::format("ridge at {:.1f} MHz (|Delta| = 54)", ridge));

  std::vector<double> dl;
  for (double t = 4; t <= 1600; t += 4)
    dl.push_back(t);
  const auto single = dynamics::chevron_sweep(dev, kQ8, kQ9, std::vector<double>{54.0}, dl);
  dynamics::SweepOptions dual;
  dual.dual_drive = true;
  const auto both = dynamics::chevron_sweep(dev, kQ8, kQ9, std::vector<double>{27.0}, dl, dual);
  const double fs = dynamics::oscillation_frequency(dl, single.p_transfer[0]);
  const double fd = dynamics::oscillation_frequency(dl, both.p_transfer[0]);
  o.check(std::abs(fs / fd - kRatioTarget) <= kRatioTol,
          fmt::format("single {:.4f} MHz, dual {:.4f} MHz, ratio {:.3f}", fs, fd, fs / fd));

  const auto &row = single.p_transfer[0];
  double t_full = -1;
  for (std::size_t i = 1; i + 1 < row.size(); ++i)
    if (row[i] > 0.9 && row[i] >= row[i - 1] && row[i] >= row[i + 1]) {
      t_full = dl[i];
      break;
    }
  const double mu = 2.0 / 54.0, expect = 1e3 / (2 * mu * 54.0);
  o.check(t_full > 0 && std::abs(t_full - expect) <= kTransferTol * expect,
          fmt::format("first full transfer {:.0f} ns vs 1/(2 mu Omega) = {:.0f} ns", t_full, expect));
  return o;
}

// Phase distance after removing pi shifts that leave the corrected ideal gate unchanged.
double gauge_distance(const GateInstance &in, const std::vector<double> &a, const std::vector<double> &b) {
  const std::size_t n = a.size();
  GateInstance ref = in;
  ref.canonical = target_unitary(in.kind);
  ref.calibrated_phases = b;
  const Unitary4 ub = compiler::corrected_gate(ref, 0.0, in.duration_ns);
  double best = 1e9;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    GateInstance t = ref;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i))
        t.calibrated_phases[i] += kPi;
    if (average_gate_fidelity(compiler::corrected_gate(t, 0.0, in.duration_ns), ub) < 1.0 - 1e-9)
      continue;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(wrap_angle(a[i] - t.calibrated_phases[i])));
    best = std::min(best, worst);
  }
  return best;
}

// 7: Ramsey calibration recovers the oracle phases.
Outcome criterion7() {
  Outcome o;
  for (const auto &[k, s] : fwtest::bundled_library().gates()) {
    if (traits(k).phase_count == 0)
      continue;
    GateInstance in = s.instance;
    in.calibrated_phases.clear();
    const auto oracle = compiler::oracle_phases(in);
    calib::calibrate_phases(in, calib::frame_wrap_action(in));
    const double d = gauge_distance(in, in.calibrated_phases, oracle);
    o.check(d < kPhaseTol, fmt::format("{}: max phase error {:.2e} rad", to_string(k), d));
  }
  return o;
}

// 8: RB decay rates.
Outcome criterion8() {
  Outcome o;
  const auto &lib = fwtest::bundled_library();
  const auto &dev = fwtest::table1();

  rb::RBConfig clean;
  clean.decoherence = false;
  clean.ideal_gates = true;
  const auto r0 = rb::rb_run(clean, lib, dev);
  o.check(std::abs(r0.fit.p - 1.0) <= kNoiselessTol, fmt::format("noiseless p = {:.9f}", r0.fit.p));

  rb::RBConfig dep = clean;
  dep.clifford_depolarizing = 0.01;
  const auto rd = rb::rb_run(dep, lib, dev);
  const double expect = 0.75 * 0.01;
  o.check(std::abs(rd.epc - expect) <= kEpcRelTol * expect,
          fmt::format("depolarizing EPC {:.4e} vs {:.4e}", rd.epc, expect));

  auto epg = [&](rb::Gateset g, GateKind k) {
    rb::RBConfig ref;
    ref.gateset = g;
    rb::RBConfig il = ref;
    il.interleave = rb::Interleave{rb::Interleave::Kind::Native, k};
    return rb::epg_estimate(rb::rb_run(ref, lib, dev), rb::rb_run(il, lib, dev));
  };
  const auto e_iswap = epg(rb::Gateset::ISWAP, GateKind::ISWAP_ONRES);
  const auto e_stark = epg(rb::Gateset::ISWAP, GateKind::ISWAP_STARK);
  const auto e_cz = epg(rb::Gateset::CZ, GateKind::CZ_ECHOED_CR);
  o.check(e_stark.epg < e_iswap.epg && e_iswap.epg < e_cz.epg,
          fmt::format("EPG Stark {:.2e} < ISWAP {:.2e} < CZ {:.2e}", e_stark.epg, e_iswap.epg, e_cz.epg));
  return o;
}

std::string slurp(const std::string &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9: schedules are reproducible.
Outcome criterion9() {
  Outcome o;
  const auto &lib = fwtest::bundled_library();
  for (const char *name : {"bell_iswap", "swap_chain", "bswap_cz", "sqiswap_pair", "b_pair", "empty"}) {
    const auto c = compiler::circuit_from_json(slurp(fwtest::data_path(std::string("circuits/") + name + ".json")));
    const std::string a = compiler::schedule_to_json(compiler::compile(c, lib));
    const std::string b = compiler::schedule_to_json(compiler::compile(c, lib));
    const std::string golden = slurp(fwtest::data_path(std::string("golden/") + name + ".schedule.json"));
    o.check(a == b && a == golden, fmt::format("{}: golden match and repeat identical", name));
  }
  return o;
}

const std::vector<std::pair<const char *, std::function<Outcome()>>> kCriteria{
    {"virtual-Z commutation identities", criterion1},
    {"resonance conditions", criterion2},
    {"synthesized and calibrated gate fidelities", criterion3},
    {"frame model vs absolute-time integration", criterion4},
    {"frame tracking on/off", criterion5},
    {"chevron ridge and FLICFORQ rate", criterion6},
    {"Ramsey phases vs oracle", criterion7},
    {"randomized benchmarking", criterion8},
    {"deterministic schedules", criterion9},
};

} // namespace

int main(int argc, char **argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      fmt::print(stderr, "usage: acceptance [--criterion N]\n");
      return 2;
    }
  }
  if (only < 0 || only > static_cast<int>(kCriteria.size())) {
    fmt::print(stderr, "criterion must be 1..{}\n", kCriteria.size());
    return 2;
  }
  bool all = true;
  for (std::size_t i = 0; i < kCriteria.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only)
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = kCriteria[i].second();
    } catch (const std::exception &e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto &n : out.notes)
      fmt::print("{}\n", n);
    fmt::print("criterion {}: {} - {} ({:.1f} s)\n", i + 1, out.pass ? "PASS" : "FAIL", kCriteria[i].first, secs);
    std::fflush(stdout);
    all = all && out.pass;
  }
  return all ? 0 : 1;
}
