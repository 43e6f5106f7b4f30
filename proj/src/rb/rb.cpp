#include <algorithm>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "framewright/error.hpp"
#include "framewright/rb.hpp"

namespace framewright::rb {

using namespace linalg;
using compiler::Op;
using compiler::OpKind;

namespace {

struct Noise {
  std::array<const device::Qubit *, 2> qubits{}; // circuit qubit -> device qubit
  std::array<std::vector<Mat2>, 2> pulse_depol;  // per 64 ns pulse, empty when off
};

std::array<std::size_t, 2> pair_of(const dynamics::GateInstance &in) {
  return {std::min(in.driven, in.idle), std::max(in.driven, in.idle)};
}

void check_pair(const GateLibrary &lib, GateKind k, const std::array<std::size_t, 2> &pair) {
  if (!lib.contains(k))
    throw ValidationError(std::string("rb_run: library has no ") + std::string(to_string(k)));
  if (pair_of(lib.instance(k)) != pair)
    throw ValidationError(std::string("rb_run: ") + std::string(to_string(k)) +
                          " is calibrated on a different pair than the reference gateset");
}

Mat4 on_qubit(const Mat2 &m, int q) {
  return q == 0 ? kron(m, Mat2::Identity()) : kron(Mat2::Identity(), m);
}

DensityMatrix4 apply_single(const DensityMatrix4 &rho, const std::vector<Mat2> &k, int q) {
  if (k.empty())
    return rho;
  std::vector<Mat4> ops;
  ops.reserve(k.size());
  for (const auto &m : k)
    ops.push_back(on_qubit(m, q));
  return apply_channel(rho, KrausChannel::from_operators(std::move(ops), 1e-8));
}

int pulses(const Op &op) {
  if (op.kind == OpKind::Rxy)
    return 1;
  if (op.kind == OpKind::U && !op.elided)
    return 2;
  return 0;
}

// P00 after running the scheduled sequence from |00>.
double simulate(const compiler::ScheduledCircuit &sc, const GateLibrary &lib,
                const RBConfig &cfg, const Noise &nz) {
  DensityMatrix4 rho = DensityMatrix4::basis(0);
  std::array<long, 2> t{0, 0};
  const KrausChannel depol = depolarizing_channel(cfg.clifford_depolarizing);
  auto idle_until = [&](int q, long until) {
    if (cfg.decoherence && until > t[q])
      rho = apply_single(rho,
                         qubit_decoherence(nz.qubits[q]->t1_us, nz.qubits[q]->t2_us,
                                           static_cast<double>(until - t[q])),
                         q);
    t[q] = std::max(t[q], until);
  };
  for (const Op &op : sc.ops) {
    if (op.kind == OpKind::Measure)
      continue;
    if (op.kind == OpKind::Barrier) {
      for (int q = 0; q < 2; ++q)
        idle_until(q, op.start_ns);
      if (cfg.clifford_depolarizing > 0.0)
        rho = apply_channel(rho, depol);
      continue;
    }
    for (int q : op.qubits)
      idle_until(q, op.start_ns);
    rho = rho.evolved(compiler::op_unitary(op, lib));
    for (int q : op.qubits) {
      idle_until(q, op.end_ns);
      for (int k = 0; k < pulses(op); ++k)
        rho = apply_single(rho, nz.pulse_depol[q], q);
    }
  }
  for (int q = 0; q < 2; ++q)
    idle_until(q, sc.duration_ns);
  return std::clamp(rho.population(0), 0.0, 1.0);
}

// Cliffords separated by barriers; the interleaved element follows each random Clifford.
CircuitIR sequence(int m, std::mt19937_64 &rng, const RBConfig &cfg) {
  const CliffordGroup &grp = CliffordGroup::get();
  CircuitIR c;
  Clifford2Q net = grp.identity();
  auto append = [&](const CircuitIR &part) {
    c.ops.insert(c.ops.end(), part.ops.begin(), part.ops.end());
    c.ops.push_back(Op::barrier());
  };
  std::optional<CircuitIR> il;
  std::optional<Clifford2Q> il_c;
  if (cfg.interleave) {
    il = interleave_circuit(*cfg.interleave);
    il_c = interleave_clifford(*cfg.interleave);
  }
  for (int i = 0; i < m; ++i) {
    const Clifford2Q r = clifford_sample(rng);
    append(clifford_compile(r, cfg.gateset));
    net = grp.compose(r, net);
    if (il) {
      append(*il);
      net = grp.compose(*il_c, net);
    }
  }
  append(clifford_compile(grp.inverse(net), cfg.gateset));
  return c;
}

} // namespace

RBResult rb_run(const RBConfig &cfg, const GateLibrary &lib, const device::DeviceModel &dev) {
  if (cfg.lengths.empty())
    throw ValidationError("rb_run: no sequence lengths");
  for (int m : cfg.lengths)
    if (m < 1)
      throw ValidationError("rb_run: sequence lengths must be >= 1");
  if (cfg.realizations < 1)
    throw ValidationError("rb_run: realizations must be >= 1");
  if (cfg.clifford_depolarizing < 0.0 || cfg.clifford_depolarizing > 1.0)
    throw ValidationError("rb_run: clifford_depolarizing must be in [0, 1]");

  const GateKind ent = entangler(cfg.gateset);
  if (!lib.contains(ent))
    throw ValidationError(std::string("rb_run: library has no ") + std::string(to_string(ent)));
  const auto pair = pair_of(lib.instance(ent));
  if (cfg.interleave)
    check_pair(lib, cfg.interleave->gate, pair);

  Noise nz;
  for (int q = 0; q < 2; ++q) {
    nz.qubits[q] = &dev.qubit(pair[q]);
    if (cfg.match_hardware)
      nz.pulse_depol[q] = qubit_depolarizing(2.0 * nz.qubits[q]->rb_epc);
  }
  const GateLibrary sim_lib = cfg.ideal_gates ? compiler::ideal_library(lib) : lib;

  RBResult res;
  res.lengths = cfg.lengths;
  res.composite = cfg.interleave && interleave_is_composite(*cfg.interleave);
  const std::size_t nl = cfg.lengths.size(), nr = static_cast<std::size_t>(cfg.realizations);
  res.p00.assign(nl, std::vector<double>(nr, 0.0));

  auto realization = [&](std::size_t r) {
    std::mt19937_64 rng(cfg.seed ^ static_cast<std::uint64_t>(r));
    for (std::size_t li = 0; li < nl; ++li) {
      const CircuitIR c = sequence(cfg.lengths[li], rng, cfg);
      const auto sc = compiler::compile(c, sim_lib);
      res.p00[li][r] = simulate(sc, sim_lib, cfg, nz);
    }
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(nr)));
  if (nt == 1) {
    for (std::size_t r = 0; r < nr; ++r)
      realization(r);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nt);
    for (unsigned w = 0; w < nt; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = w; r < nr; r += nt)
            realization(r);
        } catch (...) {
          errs[w] = std::current_exception();
        }
      });
    for (auto &th : pool)
      th.join();
    for (auto &e : errs)
      if (e)
        std::rethrow_exception(e);
  }

  for (const auto &row : res.p00) {
    double s = 0.0;
    for (double v : row)
      s += v;
    const double mean = s / static_cast<double>(nr);
    double ss = 0.0;
    for (double v : row)
      ss += (v - mean) * (v - mean);
    res.mean_p00.push_back(mean);
    res.sem_p00.push_back(nr > 1 ? std::sqrt(ss / static_cast<double>(nr - 1) / static_cast<double>(nr))
                                 : 0.0);
  }
  res.fit = fit_decay(res.lengths, res.mean_p00);
  res.epc = 0.75 * (1.0 - res.fit.p);
  res.epc_err = 0.75 * res.fit.p_err;
  return res;
}

EpgEstimate epg_estimate(double p_ref, double p_ref_err, double p_int, double p_int_err,
                         bool composite) {
  if (!(p_ref > 0.0))
    throw ValidationError("epg_estimate: reference decay must be positive");
  EpgEstimate e;
  e.epg = 0.75 * (1.0 - p_int / p_ref);
  e.err = 0.75 * std::hypot(p_int_err / p_ref, p_int * p_ref_err / (p_ref * p_ref));
  if (p_int > p_ref + std::hypot(p_ref_err, p_int_err)) {
    e.unphysical = true;
    e.warning = "interleaved decay exceeds reference decay beyond uncertainty";
  }
  if (composite) {
    e.epg /= 2.0;
    e.err /= 2.0;
  }
  return e;
}

EpgEstimate epg_estimate(const RBResult &ref, const RBResult &interleaved) {
  return epg_estimate(ref.fit.p, ref.fit.p_err, interleaved.fit.p, interleaved.fit.p_err,
                      interleaved.composite);
}

std::string result_to_json(const RBResult &r) {
  nlohmann::ordered_json j;
  j["lengths"] = r.lengths;
  j["mean_p00"] = r.mean_p00;
  j["sem_p00"] = r.sem_p00;
  j["fit"] = {{"A", r.fit.a},         {"p", r.fit.p},         {"B", r.fit.b},
              {"A_err", r.fit.a_err}, {"p_err", r.fit.p_err}, {"B_err", r.fit.b_err},
              {"degenerate", r.fit.degenerate}};
  j["epc"] = r.epc;
  j["epc_err"] = r.epc_err;
  j["composite"] = r.composite;
  return j.dump(2) + "\n";
}

} // namespace framewright::rb
