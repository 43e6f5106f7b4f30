#include <cmath>
#include <functional>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "framewright/calib.hpp"
#include "framewright/error.hpp"

namespace framewright::calib {

using namespace linalg;
using compiler::GateCorrections;

namespace {

constexpr int D = 0, I = 1;

const Mat2 kX90 = rxy(kPi / 2, 0.0);
const Mat2 kXM90 = rxy(kPi / 2, kPi);
const Mat2 kY90 = rxy(kPi / 2, kPi / 2);
const Mat2 kX180 = rxy(kPi, 0.0);

// Builds a sequence from the correction rate terms at the scan's gate times and any
// phases measured earlier in the same calibration.
using Builder = std::function<RamseySequence(const GateCorrections &, const std::vector<double> &)>;

struct Runner {
  RamseyEnv real, ref;
  GateCorrections rate;
  const CalibOptions &opt;
  CalibrationReport &rep;

  // Scanned optimum relative to the sequence's response to the ideal gate.
  double operator()(const Builder &build, const std::vector<double> &known) {
    const RamseyScan s = run_ramsey(build(rate, known), opt.grid, real);
    const RamseyScan r = run_ramsey(build(GateCorrections{}, std::vector<double>(known.size(), 0.0)),
                                    opt.grid, ref);
    const double m = wrap_angle(s.fit.phi - r.fit.phi);
    rep.scans.push_back(s);
    rep.fit_residuals.push_back(s.fit.residual);
    rep.visibility.push_back(s.fit.visibility());
    rep.measured.push_back(m);
    return m;
  }
};

RamseySequence seq(std::string name, std::vector<Step> steps, int measured) {
  return {std::move(name), std::move(steps), measured};
}

// Pick the phase set whose corrected gate is closest to the target. Needed where phases
// come from halving sums and differences, which leaves a Z(pi) x Z(pi) ambiguity.
std::vector<double> best_branch(const GateInstance &in, const GateAction &gate, double ts,
                                const std::vector<std::vector<double>> &cands) {
  const Unitary4 g = gate(ts);
  const Unitary4 t = target_unitary(in.kind);
  double best = -1.0;
  std::vector<double> out;
  for (const auto &c : cands) {
    GateInstance trial = in;
    trial.calibrated_phases = c;
    const auto corr = compiler::gate_corrections(trial, ts, ts + in.duration_ns);
    const Unitary4 pre = Unitary4::from_matrix(zz_layer(corr.pre[0], corr.pre[1]));
    const Unitary4 post = Unitary4::from_matrix(zz_layer(corr.post[0], corr.post[1]));
    const double f = average_gate_fidelity(post * g * pre, t);
    if (f > best + 1e-12) {
      best = f;
      out = c;
    }
  }
  return out;
}

std::vector<double> swap_family(Runner &run, GateKind k) {
  // SWAP carries no i on the exchanged amplitude, so its analyzer is Y90.
  const Mat2 an = k == GateKind::SWAP ? kY90 : kXM90;
  const double p1 = run(
      [&](const GateCorrections &r, const std::vector<double> &) {
        return seq("phi1", {Step::gate(I, kY90), Step::under_test(), Step::scan(D, r.post[0]),
                            Step::gate(D, an)},
                   D);
      },
      {});
  const double p2 = run(
      [&](const GateCorrections &r, const std::vector<double> &) {
        return seq("phi2", {Step::gate(D, kY90), Step::under_test(), Step::scan(I, r.post[1]),
                            Step::gate(I, an)},
                   I);
      },
      {});
  return {p1, p2};
}

std::vector<double> sqiswap(Runner &run, const GateInstance &in, const GateAction &gate,
                            double ts) {
  // Single-excitation input: the pre correction acts through the exchange.
  const double p1 = run(
      [](const GateCorrections &r, const std::vector<double> &) {
        return seq("phi1",
                   {Step::gate(D, kX180), Step::gate(I, kX90), Step::scan(D, r.pre[0], -1.0),
                    Step::cnot(), Step::scan(D, r.pre[0], 1.0), Step::under_test()},
                   D);
      },
      {});
  const double md = run(
      [](const GateCorrections &r, const std::vector<double> &) {
        return seq("phi_d",
                   {Step::gate(D, kX180), Step::under_test(), Step::scan(D, r.post[0] - r.post[1]),
                    Step::cnot(), Step::gate(I, kXM90)},
                   I);
      },
      {});
  const double mt = run(
      [](const GateCorrections &r, const std::vector<double> &k) {
        const double pre = r.pre[0] + k[0];
        return seq("phi_t",
                   {Step::gate(I, kX90), Step::z(D, -pre), Step::cnot(), Step::z(D, pre),
                    Step::under_test(), Step::scan(D, r.post[0] + r.post[1]), Step::cnot(),
                    Step::gate(I, kX90)},
                   I);
      },
      {p1});
  const double p2 = 0.5 * (mt + md), p3 = 0.5 * (mt - md);
  return best_branch(in, gate, ts,
                     {{p1, wrap_angle(p2), wrap_angle(p3)},
                      {p1, wrap_angle(p2 + kPi), wrap_angle(p3 + kPi)}});
}

std::vector<double> bgate(Runner &run, const GateInstance &in, const GateAction &gate,
                          double ts) {
  const double pre_t = run(
      [](const GateCorrections &r, const std::vector<double> &) {
        const double b = r.pre[1] + r.pre[0];
        return seq("varphi_t", {Step::scan(I, b, -1.0), Step::gate(I, kXM90), Step::cnot(),
                                Step::scan(I, b, 1.0), Step::under_test()},
                   I);
      },
      {});
  const double pre_d = run(
      [](const GateCorrections &r, const std::vector<double> &) {
        const double b = r.pre[1] - r.pre[0];
        return seq("varphi_d", {Step::gate(D, kX180), Step::scan(I, b, -1.0), Step::gate(I, kXM90),
                                Step::cnot(), Step::scan(I, b, 1.0), Step::under_test()},
                   I);
      },
      {});
  const double post_t = run(
      [](const GateCorrections &r, const std::vector<double> &) {
        return seq("phi_t", {Step::under_test(), Step::scan(I, r.post[1] + r.post[0]), Step::cnot(),
                             Step::gate(I, kXM90)},
                   I);
      },
      {});
  const double post_d = run(
      [](const GateCorrections &r, const std::vector<double> &) {
        return seq("phi_d", {Step::gate(I, kX180), Step::under_test(),
                             Step::scan(I, r.post[1] - r.post[0]), Step::cnot(), Step::gate(I, kX90)},
                   I);
      },
      {});
  // pre_t = phi1 + phi3, pre_d = phi3 - phi1; post_t = phi2 + phi4, post_d = phi4 - phi2.
  const double p1 = 0.5 * (pre_t - pre_d), p3 = 0.5 * (pre_t + pre_d);
  const double p2 = 0.5 * (post_t - post_d), p4 = 0.5 * (post_t + post_d);
  std::vector<std::vector<double>> cands;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      cands.push_back({wrap_angle(p1 + a * kPi), wrap_angle(p2 + b * kPi),
                       wrap_angle(p3 + a * kPi), wrap_angle(p4 + b * kPi)});
  return best_branch(in, gate, ts, cands);
}

} // namespace

CalibrationReport calibrate_phases(GateInstance &in, const GateAction &gate,
                                   const CalibOptions &opt) {
  CalibrationReport rep;
  rep.gate = in.kind;
  const int n = traits(in.kind).phase_count;
  if (n == 0) {
    in.calibrated_phases.clear();
    return rep;
  }
  if (!gate)
    throw ValidationError("calibrate_phases: no gate action");
  const double ts = opt.t_start_ns;
  GateInstance zero = in;
  zero.calibrated_phases.assign(static_cast<std::size_t>(n), 0.0);
  const Unitary4 t = target_unitary(in.kind);
  Runner run{RamseyEnv{gate, ts, opt.cnot, opt.threads},
             RamseyEnv{[t](double) { return t; }, ts, opt.cnot, opt.threads},
             compiler::gate_corrections(zero, ts, ts + in.duration_ns), opt, rep};

  std::vector<double> phases;
  switch (compiler::frame_rule(in.kind).placement) {
  case Placement::BackOnly:
    phases = swap_family(run, in.kind);
    break;
  case Placement::FrontBackDriven:
    phases = sqiswap(run, in, gate, ts);
    break;
  case Placement::FrontBackIdle:
    phases = bgate(run, in, gate, ts);
    break;
  case Placement::None:
    break;
  }
  for (auto &p : phases)
    p = wrap_angle(p);
  in.calibrated_phases = phases;
  rep.phases = phases;
  return rep;
}

Unitary4 cz_based_cnot(const GateInstance &cz, const GateInstance &on_pair, double ts) {
  if (cz.kind != GateKind::CZ_ECHOED_CR)
    throw ValidationError("cz_based_cnot: instance is not a CZ");
  Unitary4 u = compiler::corrected_gate(cz, ts, ts + cz.duration_ns);
  if (cz.driven == on_pair.idle && cz.idle == on_pair.driven) {
    u = targets::swap() * u * targets::swap();
  } else if (!(cz.driven == on_pair.driven && cz.idle == on_pair.idle)) {
    throw ValidationError("cz_based_cnot: CZ is calibrated on a different pair");
  }
  Mat2 h;
  h << 1.0, 1.0, 1.0, -1.0;
  h /= std::sqrt(2.0);
  const Unitary4 hd = Unitary4::kron(h, Mat2::Identity());
  return hd * u * hd;
}

std::string report_to_json(const CalibrationReport &r) {
  nlohmann::json j;
  j["gate"] = std::string(to_string(r.gate));
  j["phases_rad"] = r.phases;
  j["fit_residuals"] = r.fit_residuals;
  j["visibility"] = r.visibility;
  j["measured_rad"] = r.measured;
  return j.dump(2) + "\n";
}

std::string scans_to_csv(const CalibrationReport &r) {
  std::ostringstream os;
  os << "gate,sequence,phi_rad,p1\n";
  for (const auto &s : r.scans)
    for (std::size_t i = 0; i < s.grid.size(); ++i)
      os << fmt::format("{},{},{:.12f},{:.12f}\n", to_string(r.gate), s.sequence, s.grid[i], s.p[i]);
  return os.str();
}

} // namespace framewright::calib
