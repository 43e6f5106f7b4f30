#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "framewright/compiler.hpp"
#include "framewright/device.hpp"

namespace framewright::rb {

using compiler::CircuitIR;
using forge::GateLibrary;

enum class Gateset { CZ, ISWAP };

// Element of the two-qubit Clifford group, by index into the enumerated group.
struct Clifford2Q {
  std::uint32_t index = 0;
  bool operator==(const Clifford2Q &) const = default;
};

class CliffordGroup {
public:
  static const CliffordGroup &get();

  std::size_t size() const { return mats_.size(); }
  const Mat4 &unitary(Clifford2Q c) const { return mats_.at(c.index); }
  Clifford2Q identity() const { return {0}; }
  // Throws ValidationError if u is not a Clifford (up to global phase).
  Clifford2Q find(const Mat4 &u) const;
  std::optional<Clifford2Q> try_find(const Mat4 &u) const;
  // a applied after b.
  Clifford2Q compose(Clifford2Q a, Clifford2Q b) const;
  Clifford2Q inverse(Clifford2Q c) const;
  // Minimal number of entangling gates of the given kind.
  int entangling_count(Clifford2Q c, Gateset g) const;

private:
  CliffordGroup();
  friend CircuitIR clifford_compile(Clifford2Q c, Gateset g);

  // Shortest path from the identity, entangler edges weighted 1 and local edges 0.
  struct Path {
    std::vector<int> depth;
    std::vector<std::uint32_t> parent;
    std::vector<std::int8_t> via; // generator index into the gateset's list
  };
  std::vector<Mat4> mats_;
  std::vector<Path> paths_; // indexed by Gateset
  std::unordered_map<std::string, std::uint32_t> keys_;
};

Clifford2Q clifford_sample(std::mt19937_64 &rng);
Clifford2Q clifford_invert(Clifford2Q c);
// Minimal entangling-layer decomposition; 1Q fills are U gates.
CircuitIR clifford_compile(Clifford2Q c, Gateset g);
GateKind entangler(Gateset g);

struct Interleave {
  enum class Kind { Native, SqiswapPair, BPair };
  Kind kind = Kind::Native;
  GateKind gate = GateKind::ISWAP_ONRES;
};

// Ops of the interleaved element and the Clifford it implements ideally.
CircuitIR interleave_circuit(const Interleave &il);
Clifford2Q interleave_clifford(const Interleave &il);
bool interleave_is_composite(const Interleave &il);

struct RBConfig {
  std::vector<int> lengths{1, 5, 10, 20, 40, 80};
  int realizations = 20;
  std::optional<Interleave> interleave;
  Gateset gateset = Gateset::ISWAP;
  bool decoherence = true;
  bool ideal_gates = false;
  // Single-qubit depolarizing per 64 ns pulse from each qubit's RB error per Clifford.
  bool match_hardware = false;
  // rho -> (1 - p) rho + p I/4 after every Clifford and interleaved element.
  double clifford_depolarizing = 0.0;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct DecayFit {
  double a = 0, p = 0, b = 0;
  double a_err = 0, p_err = 0, b_err = 0;
  bool degenerate = false; // flat data: p undetermined, reported as 1
};

struct RBResult {
  std::vector<int> lengths;
  std::vector<double> mean_p00, sem_p00;
  std::vector<std::vector<double>> p00; // [length][realization]
  DecayFit fit;
  double epc = 0, epc_err = 0;
  bool composite = false;
};

RBResult rb_run(const RBConfig &cfg, const GateLibrary &lib, const device::DeviceModel &dev);

// A p^m + B. sigma (optional) weights each length; empty or non-positive means unweighted.
DecayFit fit_decay(std::span<const int> lengths, std::span<const double> means,
                   std::span<const double> sigma = {});

struct EpgEstimate {
  double epg = 0, err = 0;
  bool unphysical = false; // p_int > p_ref beyond the combined uncertainty
  std::string warning;
};

EpgEstimate epg_estimate(const RBResult &ref, const RBResult &interleaved);
EpgEstimate epg_estimate(double p_ref, double p_ref_err, double p_int, double p_int_err,
                         bool composite = false);

std::string result_to_json(const RBResult &r);
// length,realization,p00
std::string result_to_csv(const RBResult &r);

} // namespace framewright::rb
