#include "framewright/device.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "framewright/error.hpp"
#include "framewright/linalg.hpp"

namespace framewright::device {

using nlohmann::json;

DeviceModel::DeviceModel(std::vector<Qubit> qubits, std::vector<Coupling> pairs)
    : qubits_(std::move(qubits)), pairs_(std::move(pairs)) {
  for (std::size_t i = 0; i < qubits_.size(); ++i) {
    const auto &q = qubits_[i];
    const std::string at = "qubits[" + std::to_string(i) + "]";
    if (!(q.f01_ghz > 0))
      throw ParseError(at + ".f01_ghz must be positive", at + ".f01_ghz");
    if (!(q.t1_us > 0))
      throw ParseError(at + ".t1_us must be positive", at + ".t1_us");
    if (!(q.t2_us > 0))
      throw ParseError(at + ".t2_us must be positive", at + ".t2_us");
    if (q.t2_us > 2.0 * q.t1_us)
      throw ParseError(at + ".t2_us exceeds 2*t1_us", at + ".t2_us");
    for (std::size_t k = 0; k < i; ++k)
      if (qubits_[k].label == q.label)
        throw ParseError(at + ".label duplicates an earlier qubit", at + ".label");
  }
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto &p = pairs_[i];
    const std::string at = "pairs[" + std::to_string(i) + "]";
    if (p.a >= qubits_.size())
      throw ParseError(at + ".a references an unknown qubit", at + ".a");
    if (p.b >= qubits_.size() || p.b == p.a)
      throw ParseError(at + ".b references an unknown qubit", at + ".b");
    if (!(p.j_mhz > 0))
      throw ParseError(at + ".j_mhz must be positive", at + ".j_mhz");
  }
}

const Qubit &DeviceModel::qubit(std::size_t i) const {
  if (i >= qubits_.size())
    throw ValidationError("qubit index " + std::to_string(i) + " out of range");
  return qubits_[i];
}

std::size_t DeviceModel::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < qubits_.size(); ++i)
    if (qubits_[i].label == label)
      return i;
  throw ValidationError("unknown qubit label '" + std::string(label) + "'");
}

std::optional<double> DeviceModel::coupling(std::size_t a, std::size_t b) const {
  for (const auto &p : pairs_)
    if ((p.a == a && p.b == b) || (p.a == b && p.b == a))
      return p.j_mhz;
  return std::nullopt;
}

namespace {

double number_field(const json &obj, const char *key, const std::string &at, bool required,
                    double fallback = 0.0) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required)
      throw ParseError(at + "." + key + " is missing", at + "." + key);
    return fallback;
  }
  if (!it->is_number())
    throw ParseError(at + "." + key + " must be a number", at + "." + key);
  return it->get<double>();
}

std::size_t qubit_ref(const json &v, const std::vector<Qubit> &qs, const std::string &at) {
  if (v.is_number_unsigned())
    return v.get<std::size_t>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    for (std::size_t i = 0; i < qs.size(); ++i)
      if (qs[i].label == s)
        return i;
    throw ParseError(at + " names unknown qubit '" + s + "'", at);
  }
  throw ParseError(at + " must be a qubit index or label", at);
}

} // namespace

DeviceModel load_device(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    // byte offset -> line number
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
      if (text[i] == '\n')
        ++line;
    throw ParseError("device config line " + std::to_string(line) + ": " + e.what(), "");
  }
  if (!doc.is_object())
    throw ParseError("device config must be a JSON object", "");
  auto qit = doc.find("qubits");
  if (qit == doc.end() || !qit->is_array())
    throw ParseError("qubits must be an array", "qubits");

  std::vector<Qubit> qubits;
  for (std::size_t i = 0; i < qit->size(); ++i) {
    const json &q = (*qit)[i];
    const std::string at = "qubits[" + std::to_string(i) + "]";
    if (!q.is_object())
      throw ParseError(at + " must be an object", at);
    Qubit out;
    auto lab = q.find("label");
    if (lab == q.end() || !lab->is_string())
      throw ParseError(at + ".label must be a string", at + ".label");
    out.label = lab->get<std::string>();
    out.f01_ghz = number_field(q, "f01_ghz", at, true);
    out.alpha_mhz = number_field(q, "alpha_mhz", at, false);
    out.t1_us = number_field(q, "t1_us", at, true);
    out.t2_us = number_field(q, "t2_us", at, true);
    out.rb_epc = number_field(q, "rb_epc", at, false);
    qubits.push_back(out);
  }

  std::vector<Coupling> pairs;
  if (auto pit = doc.find("pairs"); pit != doc.end()) {
    if (!pit->is_array())
      throw ParseError("pairs must be an array", "pairs");
    for (std::size_t i = 0; i < pit->size(); ++i) {
      const json &p = (*pit)[i];
      const std::string at = "pairs[" + std::to_string(i) + "]";
      if (!p.is_object() || !p.contains("a") || !p.contains("b"))
        throw ParseError(at + " needs fields a and b", at);
      Coupling c;
      c.a = qubit_ref(p["a"], qubits, at + ".a");
      c.b = qubit_ref(p["b"], qubits, at + ".b");
      c.j_mhz = number_field(p, "j_mhz", at, true);
      pairs.push_back(c);
    }
  }
  return DeviceModel(std::move(qubits), std::move(pairs));
}

DeviceModel load_device_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open device file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_device(ss.str());
}

std::string device_to_json(const DeviceModel &dev) {
  json doc;
  doc["qubits"] = json::array();
  for (const auto &q : dev.qubits())
    doc["qubits"].push_back({{"label", q.label},
                             {"f01_ghz", q.f01_ghz},
                             {"alpha_mhz", q.alpha_mhz},
                             {"t1_us", q.t1_us},
                             {"t2_us", q.t2_us},
                             {"rb_epc", q.rb_epc}});
  doc["pairs"] = json::array();
  for (const auto &p : dev.pairs())
    doc["pairs"].push_back({{"a", dev.qubit(p.a).label}, {"b", dev.qubit(p.b).label},
                            {"j_mhz", p.j_mhz}});
  return doc.dump(2);
}

double stark_shift(double omega, double lambda) {
  const double s = lambda < 0 ? -1.0 : 1.0;
  const double r = std::hypot(omega, lambda);
  // s*r - lambda loses precision when Omega << |lambda|.
  if (r == 0)
    return 0.0;
  return s * omega * omega / (r + std::abs(lambda));
}

namespace {
const double kPed = std::exp(-2.0);

struct Ramp {
  double g, dg;
};

// Normalized truncated Gaussian value and slope at offset x from the peak.
Ramp ramp(double x, double sigma, bool lifted) {
  const double g = std::exp(-x * x / (2 * sigma * sigma));
  const double dg = -x / (sigma * sigma) * g;
  if (!lifted)
    return {g, dg};
  return {(g - kPed) / (1 - kPed), dg / (1 - kPed)};
}

double ramp_area(double sigma, bool lifted) {
  const double a = sigma * std::sqrt(2 * kPi) * std::erf(std::sqrt(2.0));
  if (!lifted)
    return a;
  return (a - 4 * sigma * kPed) / (1 - kPed);
}
} // namespace

double PulseEnvelope::duration() const {
  switch (shape) {
  case Shape::Gaussian:
    return 4 * sigma_ns;
  case Shape::FlatTopGaussian:
    return 4 * sigma_ns + flat_ns;
  case Shape::Square:
    return flat_ns;
  }
  return 0;
}

double PulseEnvelope::flat_start() const {
  switch (shape) {
  case Shape::Gaussian:
    return 2 * sigma_ns;
  case Shape::FlatTopGaussian:
    return 2 * sigma_ns;
  case Shape::Square:
    return 0;
  }
  return 0;
}

double PulseEnvelope::flat_end() const {
  switch (shape) {
  case Shape::Gaussian:
    return 2 * sigma_ns;
  case Shape::FlatTopGaussian:
    return 2 * sigma_ns + flat_ns;
  case Shape::Square:
    return flat_ns;
  }
  return 0;
}

PulseEnvelope gaussian(double sigma_ns, double amplitude_mhz, double phase_rad) {
  PulseEnvelope e;
  e.shape = Shape::Gaussian;
  e.sigma_ns = sigma_ns;
  e.amplitude_mhz = amplitude_mhz;
  e.phase_rad = phase_rad;
  return e;
}

PulseEnvelope flat_top(double sigma_ns, double flat_ns, double amplitude_mhz, double phase_rad) {
  PulseEnvelope e;
  e.shape = Shape::FlatTopGaussian;
  e.sigma_ns = sigma_ns;
  e.flat_ns = flat_ns;
  e.amplitude_mhz = amplitude_mhz;
  e.phase_rad = phase_rad;
  return e;
}

PulseEnvelope square(double duration_ns, double amplitude_mhz, double phase_rad) {
  PulseEnvelope e;
  e.shape = Shape::Square;
  e.sigma_ns = 0;
  e.flat_ns = duration_ns;
  e.amplitude_mhz = amplitude_mhz;
  e.phase_rad = phase_rad;
  return e;
}

std::complex<double> envelope_sample(const PulseEnvelope &env, double t) {
  const double T = env.duration();
  constexpr double eps = 1e-9;
  if (!(t >= -eps && t <= T + eps))
    throw ValidationError("envelope_sample: t outside pulse support");
  if (env.shape == Shape::Square)
    return {env.amplitude_mhz, 0.0};
  const double a = env.flat_start(), b = env.flat_end();
  Ramp r{1.0, 0.0};
  if (t < a)
    r = ramp(t - a, env.sigma_ns, env.lifted);
  else if (t > b)
    r = ramp(t - b, env.sigma_ns, env.lifted);
  return {env.amplitude_mhz * r.g, env.drag_beta * env.amplitude_mhz * r.dg};
}

double envelope_area(const PulseEnvelope &env) {
  if (env.shape == Shape::Square)
    return env.amplitude_mhz * env.flat_ns;
  const double flat = env.shape == Shape::FlatTopGaussian ? env.flat_ns : 0.0;
  return env.amplitude_mhz * (flat + ramp_area(env.sigma_ns, env.lifted));
}

PairParameters pair_parameters(const DeviceModel &dev, std::size_t driven, std::size_t idle) {
  auto j = dev.coupling(driven, idle);
  if (!j)
    throw ValidationError("qubits " + dev.qubit(driven).label + " and " +
                          dev.qubit(idle).label + " are not coupled");
  PairParameters p;
  p.delta_mhz = dev.qubit(driven).f01_mhz() - dev.qubit(idle).f01_mhz();
  p.j_mhz = *j;
  p.mu = *j / p.delta_mhz;
  return p;
}

std::array<double, 2> dressed_frequencies(const DeviceModel &dev, std::size_t a, std::size_t b) {
  const auto pp = pair_parameters(dev, a, b);
  const double fa = dev.qubit(a).f01_mhz(), fb = dev.qubit(b).f01_mhz();
  const double half = std::sqrt(pp.delta_mhz * pp.delta_mhz / 4 + pp.j_mhz * pp.j_mhz);
  const double da = 0.5 * (fa + fb) + (pp.delta_mhz < 0 ? -half : half);
  return {da, fa + fb - da};
}

double gaussian_amplitude_for(double theta, double sigma_ns) {
  return theta / (kTwoPiMHz * ramp_area(sigma_ns, false));
}

} // namespace framewright::device
