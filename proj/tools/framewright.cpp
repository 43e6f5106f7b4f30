// framewright: synthesize, calibrate, sweep, compile and benchmark two-qubit gates.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "framewright/calib.hpp"
#include "framewright/compiler.hpp"
#include "framewright/error.hpp"
#include "framewright/forge.hpp"
#include "framewright/library.hpp"
#include "framewright/rb.hpp"

#ifndef FRAMEWRIGHT_VERSION
#define FRAMEWRIGHT_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace framewright;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0, kExitIo = 1, kExitValidation = 2, kExitNumerical = 3;

class IoError : public Error {
public:
  using Error::Error;
};

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t h) { return fmt::format("{:016x}", h); }

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Write to a sibling temporary then rename, so readers never see a partial file.
void write_atomic(const fs::path &path, const std::string &text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out.flush())
      throw IoError("short write on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec)
    throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

struct Common {
  std::string device = "data/table1.json";
  std::string library;
  std::string out;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

class Run {
public:
  Run(std::string command, const Common &c) : command_(std::move(command)), c_(c) {
    started_ = utc_now();
    std::string root = c.out;
    if (root.empty()) {
      const char *env = std::getenv("FRAMEWRIGHT_OUT");
      root = env && *env ? env : "out";
    }
    dir_ = root;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec)
      throw IoError("cannot create " + dir_.string() + ": " + ec.message());
  }

  const fs::path &dir() const { return dir_; }

  void input(const std::string &role, const std::string &path) {
    inputs_[role] = {{"path", path}, {"fnv1a", hex64(fnv1a(read_file(path)))}};
  }
  void param(const std::string &k, ordered_json v) { params_[k] = std::move(v); }

  void write(const std::string &name, const std::string &text) {
    write_atomic(dir_ / name, text);
    outputs_[name] = hex64(fnv1a(text));
  }

  // One manifest per output directory; a later run into the same directory replaces it.
  void finish() {
    ordered_json m;
    m["command"] = command_;
    m["tool_version"] = FRAMEWRIGHT_VERSION;
    m["seed"] = c_.seed;
    m["threads"] = c_.threads;
    m["inputs"] = inputs_;
    m["parameters"] = params_;
    m["outputs"] = outputs_;
    m["started_utc"] = started_;
    m["finished_utc"] = utc_now();
    write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
  }

private:
  std::string command_;
  Common c_;
  fs::path dir_;
  std::string started_;
  ordered_json inputs_ = ordered_json::object(), params_ = ordered_json::object(),
               outputs_ = ordered_json::object();
};

device::DeviceModel load_device(Run &run, const Common &c) {
  run.input("device", c.device);
  return device::load_device_file(c.device);
}

forge::GateLibrary load_library(Run &run, const Common &c, const device::DeviceModel &dev) {
  if (c.library.empty())
    throw ValidationError("--library is required");
  run.input("library", c.library);
  return forge::load_library_file(dev, c.library);
}

std::vector<GateKind> parse_gates(const std::vector<std::string> &names) {
  std::vector<GateKind> out;
  for (const auto &n : names) {
    if (n == "all")
      return {kAllGateKinds.begin(), kAllGateKinds.end()};
    out.push_back(gate_kind_from_string(n));
  }
  return out;
}

std::vector<std::string> gate_names(const std::vector<GateKind> &ks) {
  std::vector<std::string> v;
  for (auto k : ks)
    v.emplace_back(to_string(k));
  return v;
}

// ---- synth

struct SynthArgs {
  std::vector<std::string> gates{"all"};
  std::vector<std::string> pair;
  std::optional<double> lambda, drive_freq;
  double max_infidelity = 1e-3;
};

void cmd_synth(const Common &c, const SynthArgs &a) {
  Run run("synth", c);
  const auto dev = load_device(run, c);
  const auto kinds = parse_gates(a.gates);
  if (!a.pair.empty() && a.pair.size() != 2)
    throw ValidationError("--pair takes two qubit labels");
  forge::GateLibrary lib;
  if (!c.library.empty()) {
    run.input("library", c.library);
    lib = forge::load_library_file(dev, c.library);
  }
  forge::SynthOptions so;
  so.lambda_mhz = a.lambda;
  so.drive_freq_mhz = a.drive_freq;
  so.max_infidelity = a.max_infidelity;
  ordered_json summary = ordered_json::array();
  for (GateKind k : kinds) {
    const auto labels = a.pair.empty() ? forge::default_pair_labels(k)
                                       : std::array<std::string, 2>{a.pair[0], a.pair[1]};
    auto s = forge::synthesize(dev, k, dev.index_of(labels[0]), dev.index_of(labels[1]), so);
    std::cerr << fmt::format("{:<14} {}/{}  {:.0f} ns  infidelity {:.2e}\n", to_string(k),
                             labels[0], labels[1], s.instance.duration_ns, s.infidelity);
    summary.push_back({{"gate", std::string(to_string(k))},
                       {"driven", labels[0]},
                       {"idle", labels[1]},
                       {"duration_ns", s.instance.duration_ns},
                       {"infidelity", s.infidelity}});
    lib.put(std::move(s));
  }
  run.param("gates", gate_names(kinds));
  run.write("library.json", forge::library_to_json(dev, lib));
  run.write("synth_summary.json", summary.dump(2) + "\n");
  run.finish();
}

// ---- calibrate

struct CalibArgs {
  std::vector<std::string> gates{"all"};
  bool pulse = false;
  bool cz_cnot = false;
  int grid = 64;
  double t_start = 128.0;
};

void cmd_calibrate(const Common &c, const CalibArgs &a) {
  Run run("calibrate", c);
  const auto dev = load_device(run, c);
  auto lib = load_library(run, c, dev);
  std::vector<GateKind> kinds;
  for (GateKind k : parse_gates(a.gates))
    if (lib.contains(k))
      kinds.push_back(k);
    else if (a.gates != std::vector<std::string>{"all"})
      throw ValidationError(std::string("library has no ") + std::string(to_string(k)));
  calib::CalibOptions opt;
  opt.grid = calib::default_grid(a.grid);
  opt.t_start_ns = a.t_start;
  opt.threads = c.threads;
  if (a.cz_cnot && !lib.contains(GateKind::CZ_ECHOED_CR))
    throw ValidationError("--cz-cnot needs a CZ_ECHOED_CR entry in the library");

  ordered_json summary = ordered_json::array();
  for (GateKind k : kinds) {
    auto &s = lib.at(k);
    const auto action = a.pulse ? calib::pulse_action(dev, s) : calib::frame_wrap_action(s.instance);
    calib::CalibOptions o = opt;
    if (a.cz_cnot && traits(k).phase_count > 0) {
      const auto &cz = lib.instance(GateKind::CZ_ECHOED_CR);
      if (k != GateKind::CZ_ECHOED_CR)
        o.cnot = calib::cz_based_cnot(cz, s.instance, a.t_start);
    }
    const auto rep = calib::calibrate_phases(s.instance, action, o);
    const double f = linalg::average_gate_fidelity(
        compiler::corrected_gate(s.instance, a.t_start, a.t_start + s.instance.duration_ns),
        target_unitary(k));
    std::cerr << fmt::format("{:<14} phases [{}]  corrected fidelity {:.6f}\n", to_string(k),
                             fmt::join(rep.phases, ", "), f);
    const std::string stem = std::string(to_string(k));
    if (!rep.scans.empty()) {
      run.write("calibration_" + stem + ".json", calib::report_to_json(rep));
      run.write("scans_" + stem + ".csv", calib::scans_to_csv(rep));
    }
    summary.push_back({{"gate", stem}, {"phases_rad", rep.phases}, {"fidelity", f}});
  }
  run.param("gates", gate_names(kinds));
  run.param("model", a.pulse ? "pulse" : "frame_wrap");
  run.param("helper_cnot", a.cz_cnot ? "cz_based" : "ideal");
  run.param("grid", a.grid);
  run.param("t_start_ns", a.t_start);
  run.write("library.json", forge::library_to_json(dev, lib));
  run.write("calibration_summary.json", summary.dump(2) + "\n");
  run.finish();
}

// ---- sweep

struct SweepArgs {
  std::vector<std::string> pair{"Q8", "Q9"};
  double amp_min = 40, amp_max = 70, amp_step = 1;
  double t_max = 600, t_step = 5;
  bool dual = false;
};

std::vector<double> range(double lo, double hi, double step, const char *what) {
  if (!(step > 0) || hi < lo)
    throw ValidationError(std::string("bad ") + what + " grid");
  std::vector<double> v;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i)
    v.push_back(lo + static_cast<double>(i) * step);
  return v;
}

void cmd_sweep(const Common &c, const SweepArgs &a) {
  Run run("sweep", c);
  const auto dev = load_device(run, c);
  if (a.pair.size() != 2)
    throw ValidationError("--pair takes two qubit labels");
  const auto amps = range(a.amp_min, a.amp_max, a.amp_step, "amplitude");
  const auto durs = range(a.t_step, a.t_max, a.t_step, "duration");
  dynamics::SweepOptions so;
  so.dual_drive = a.dual;
  so.threads = c.threads;
  const auto t = dynamics::chevron_sweep(dev, dev.index_of(a.pair[0]), dev.index_of(a.pair[1]),
                                         amps, durs, so);
  std::cerr << fmt::format("ridge at {:.3f} MHz\n", t.ridge_amplitude());
  run.param("pair", a.pair);
  run.param("amplitude_mhz", {a.amp_min, a.amp_max, a.amp_step});
  run.param("duration_ns", {a.t_step, a.t_max, a.t_step});
  run.param("dual_drive", a.dual);
  run.write("chevron.csv", t.to_csv());
  ordered_json s;
  s["ridge_amplitude_mhz"] = t.ridge_amplitude();
  run.write("chevron_summary.json", s.dump(2) + "\n");
  run.finish();
}

// ---- compile

struct CompileArgs {
  std::string circuit;
  bool no_tracking = false;
};

void cmd_compile(const Common &c, const CompileArgs &a) {
  Run run("compile", c);
  run.input("circuit", a.circuit);
  const auto circ = compiler::circuit_from_json(read_file(a.circuit));
  bool needs_lib = false;
  for (const auto &op : circ.ops)
    needs_lib |= op.kind == compiler::OpKind::TwoQubit;
  forge::GateLibrary lib;
  if (needs_lib || !c.library.empty()) {
    const auto dev = load_device(run, c);
    lib = load_library(run, c, dev);
  }
  compiler::CompileOptions opt;
  opt.frame_tracking = !a.no_tracking;
  const auto sc = compiler::compile(circ, lib, opt);
  run.param("frame_tracking", opt.frame_tracking);
  run.write("schedule.json", compiler::schedule_to_json(sc));
  run.finish();
}

// ---- rb

struct RbArgs {
  std::string gateset = "iswap";
  std::string interleave;
  std::string composite;
  std::vector<int> lengths{1, 5, 10, 20, 40, 80};
  int realizations = 20;
  bool no_decoherence = false, ideal_gates = false, match_hardware = false;
  double depolarizing = 0.0;
};

ordered_json fit_json(const rb::RBResult &r) {
  return ordered_json::parse(rb::result_to_json(r));
}

void cmd_rb(const Common &c, const RbArgs &a) {
  Run run("rb", c);
  const auto dev = load_device(run, c);
  const auto lib = load_library(run, c, dev);
  rb::RBConfig cfg;
  if (a.gateset == "iswap")
    cfg.gateset = rb::Gateset::ISWAP;
  else if (a.gateset == "cz")
    cfg.gateset = rb::Gateset::CZ;
  else
    throw ValidationError("--gateset must be iswap or cz");
  cfg.lengths = a.lengths;
  cfg.realizations = a.realizations;
  cfg.decoherence = !a.no_decoherence;
  cfg.ideal_gates = a.ideal_gates;
  cfg.match_hardware = a.match_hardware;
  cfg.clifford_depolarizing = a.depolarizing;
  cfg.seed = c.seed;
  cfg.threads = c.threads;

  const rb::RBResult ref = rb::rb_run(cfg, lib, dev);
  run.write("rb_reference.csv", rb::result_to_csv(ref));
  ordered_json summary;
  summary["reference"] = fit_json(ref);
  std::cerr << fmt::format("reference  p = {:.6f} +- {:.1e}  EPC = {:.3e}\n", ref.fit.p,
                           ref.fit.p_err, ref.epc);

  if (!a.interleave.empty()) {
    rb::Interleave il;
    il.gate = gate_kind_from_string(a.interleave);
    if (a.composite.empty())
      il.kind = rb::Interleave::Kind::Native;
    else if (a.composite == "sqiswap-pair")
      il.kind = rb::Interleave::Kind::SqiswapPair;
    else if (a.composite == "b-pair")
      il.kind = rb::Interleave::Kind::BPair;
    else
      throw ValidationError("--composite must be sqiswap-pair or b-pair");
    cfg.interleave = il;
    const rb::RBResult inter = rb::rb_run(cfg, lib, dev);
    const auto e = rb::epg_estimate(ref, inter);
    run.write("rb_interleaved.csv", rb::result_to_csv(inter));
    summary["interleaved"] = fit_json(inter);
    summary["epg"] = {{"gate", a.interleave}, {"composite", inter.composite}, {"value", e.epg},
                      {"err", e.err}, {"unphysical", e.unphysical}};
    std::cerr << fmt::format("interleaved p = {:.6f} +- {:.1e}  EPG({}) = {:.3e} +- {:.1e}\n",
                             inter.fit.p, inter.fit.p_err, a.interleave, e.epg, e.err);
    if (e.unphysical)
      std::cerr << "warning: " << e.warning << "\n";
  }
  run.param("gateset", a.gateset);
  run.param("interleave", a.interleave);
  run.param("composite", a.composite);
  run.param("lengths", a.lengths);
  run.param("realizations", a.realizations);
  run.param("decoherence", cfg.decoherence);
  run.param("ideal_gates", cfg.ideal_gates);
  run.param("match_hardware", cfg.match_hardware);
  run.param("clifford_depolarizing", cfg.clifford_depolarizing);
  run.write("rb_fit.json", summary.dump(2) + "\n");
  run.finish();
}

void add_common(CLI::App *sub, Common &c, bool library) {
  sub->add_option("--device", c.device, "Device description JSON")->capture_default_str();
  if (library)
    sub->add_option("--library", c.library, "Gate library JSON");
  sub->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
  sub->add_option("--out", c.out, "Output directory (default $FRAMEWRIGHT_OUT or ./out)");
  sub->add_option("--threads", c.threads, "Worker threads")
      ->check(CLI::Range(1u, 256u))
      ->capture_default_str();
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"framewright: two-qubit pulse simulator and frame-tracking compiler"};
  app.set_version_flag("--version", FRAMEWRIGHT_VERSION);
  app.require_subcommand(1);
  Common common;

  SynthArgs sa;
  auto *synth = app.add_subcommand("synth", "Synthesize gates into a library file");
  add_common(synth, common, true);
  synth->add_option("--gate", sa.gates, "Gate kinds, or 'all'")->capture_default_str();
  synth->add_option("--pair", sa.pair, "Driven and idle qubit labels")->expected(2);
  synth->add_option("--lambda", sa.lambda, "Stark detuning (MHz)");
  synth->add_option("--drive-freq", sa.drive_freq, "BSWAP drive frequency (MHz)");
  synth->add_option("--max-infidelity", sa.max_infidelity, "Acceptance threshold")
      ->capture_default_str();

  CalibArgs ca;
  auto *cal = app.add_subcommand("calibrate", "Run Ramsey phase calibration on a library");
  add_common(cal, common, true);
  cal->add_option("--gate", ca.gates, "Gate kinds, or 'all'")->capture_default_str();
  cal->add_flag("--pulse", ca.pulse, "Simulate the gate from its pulse program");
  cal->add_flag("--cz-cnot", ca.cz_cnot, "Use the library CZ for helper CNOTs");
  cal->add_option("--grid", ca.grid, "Scan points")->check(CLI::Range(16, 4096))->capture_default_str();
  cal->add_option("--t-start", ca.t_start, "Gate start time (ns)")->capture_default_str();

  SweepArgs wa;
  auto *sweep = app.add_subcommand("sweep", "Chevron sweep of an on-resonant drive");
  add_common(sweep, common, false);
  sweep->add_option("--pair", wa.pair, "Driven and idle qubit labels")->expected(2)->capture_default_str();
  sweep->add_option("--amp-min", wa.amp_min, "MHz")->capture_default_str();
  sweep->add_option("--amp-max", wa.amp_max, "MHz")->capture_default_str();
  sweep->add_option("--amp-step", wa.amp_step, "MHz")->capture_default_str();
  sweep->add_option("--t-max", wa.t_max, "ns")->capture_default_str();
  sweep->add_option("--t-step", wa.t_step, "ns")->capture_default_str();
  sweep->add_flag("--dual", wa.dual, "Drive both qubits (FLICFORQ)");

  CompileArgs pa;
  auto *comp = app.add_subcommand("compile", "Compile a circuit into a schedule");
  add_common(comp, common, true);
  comp->add_option("circuit", pa.circuit, "Circuit JSON")->required()->check(CLI::ExistingFile);
  comp->add_flag("--no-frame-tracking", pa.no_tracking, "Drop time-dependent corrections");

  RbArgs ra;
  auto *rbc = app.add_subcommand("rb", "Randomized benchmarking, optionally interleaved");
  add_common(rbc, common, true);
  rbc->add_option("--gateset", ra.gateset, "iswap or cz")->capture_default_str();
  rbc->add_option("--interleave", ra.interleave, "Gate kind to interleave");
  rbc->add_option("--composite", ra.composite, "sqiswap-pair or b-pair");
  rbc->add_option("--lengths", ra.lengths, "Sequence lengths")->capture_default_str();
  rbc->add_option("--realizations", ra.realizations, "Realizations per length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rbc->add_flag("--no-decoherence", ra.no_decoherence, "Disable T1/T2 channels");
  rbc->add_flag("--ideal-gates", ra.ideal_gates, "Replace gates by their targets");
  rbc->add_flag("--match-hardware", ra.match_hardware, "1Q depolarizing from device rb_epc");
  rbc->add_option("--depolarizing", ra.depolarizing, "Two-qubit depolarizing per Clifford")
      ->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*synth)
      cmd_synth(common, sa);
    else if (*cal)
      cmd_calibrate(common, ca);
    else if (*sweep)
      cmd_sweep(common, wa);
    else if (*comp)
      cmd_compile(common, pa);
    else if (*rbc)
      cmd_rb(common, ra);
  } catch (const ParseError &e) {
    std::cerr << "error: " << e.what() << " (at " << e.field() << ")\n";
    return kExitValidation;
  } catch (const ValidationError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError &e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const IoError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::out_of_range &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
