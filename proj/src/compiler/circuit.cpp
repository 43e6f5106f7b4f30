#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "framewright/compiler.hpp"
#include "framewright/error.hpp"

namespace framewright::compiler {

using namespace linalg;
using json = nlohmann::json;

Op Op::rxy(int q, double theta, double phi) {
  Op o;
  o.kind = OpKind::Rxy;
  o.qubits = {q};
  o.theta = theta;
  o.phi = phi;
  return o;
}

Op Op::u(int q, double theta, double phi, double lambda) {
  Op o;
  o.kind = OpKind::U;
  o.qubits = {q};
  o.theta = theta;
  o.phi = phi;
  o.lambda = lambda;
  return o;
}

Op Op::z(int q, double theta) {
  Op o;
  o.kind = OpKind::VirtualZ;
  o.qubits = {q};
  o.theta = theta;
  return o;
}

Op Op::physical(int q, const Mat2 &m) {
  Op o;
  o.kind = OpKind::Physical;
  o.qubits = {q};
  o.matrix = m;
  return o;
}

Op Op::two_qubit(GateKind k, int a, int b) {
  Op o;
  o.kind = OpKind::TwoQubit;
  o.gate = k;
  o.qubits = {a, b};
  return o;
}

Op Op::barrier(std::vector<int> qs) {
  Op o;
  o.kind = OpKind::Barrier;
  o.qubits = std::move(qs);
  return o;
}

Op Op::measure(int q) {
  Op o;
  o.kind = OpKind::Measure;
  o.qubits = {q};
  return o;
}

bool Op::acts_on(int q) const {
  if (kind == OpKind::Barrier && qubits.empty())
    return true;
  return std::find(qubits.begin(), qubits.end(), q) != qubits.end();
}

Mat2 u_matrix(double theta, double phi, double lambda) {
  return rz(phi) * ry(theta) * rz(lambda);
}

std::array<double, 3> u_params(const Mat2 &m) {
  const cplx det = m.determinant();
  const Mat2 n = m / std::sqrt(det);
  const double c = std::abs(n(0, 0)), s = std::abs(n(1, 0));
  const double theta = 2.0 * std::atan2(s, c);
  double phi = 0.0, lambda = 0.0;
  // n = [[e^{-i(p+l)/2} c, -e^{-i(p-l)/2} s], [e^{i(p-l)/2} s, e^{i(p+l)/2} c]]
  if (s < 1e-12) {
    phi = 2.0 * std::arg(n(1, 1));
  } else if (c < 1e-12) {
    phi = 2.0 * std::arg(n(1, 0));
  } else {
    const double sum = 2.0 * std::arg(n(1, 1)), diff = 2.0 * std::arg(n(1, 0));
    phi = 0.5 * (sum + diff);
    lambda = 0.5 * (sum - diff);
  }
  return {theta, wrap_angle(phi), wrap_angle(lambda)};
}

Mat2 op_matrix(const Op &op) {
  switch (op.kind) {
  case OpKind::Rxy:
    return rxy(op.theta, op.phi);
  case OpKind::U:
    return op.elided ? Mat2::Identity() : u_matrix(op.theta, op.phi, op.lambda);
  case OpKind::VirtualZ:
    return rz(op.theta);
  case OpKind::Physical:
    return op.matrix;
  default:
    throw ValidationError("op_matrix: not a single-qubit op");
  }
}

namespace {

Unitary4 on_qubit(const Mat2 &m, int q) {
  return q == 0 ? Unitary4::kron(m, Mat2::Identity()) : Unitary4::kron(Mat2::Identity(), m);
}

struct Named {
  const char *name;
  double theta, phi;
};
constexpr Named kNamed[] = {
    {"X90", kPi / 2, 0.0},     {"XM90", kPi / 2, kPi},     {"Y90", kPi / 2, kPi / 2},
    {"YM90", kPi / 2, -kPi / 2}, {"X180", kPi, 0.0},        {"Y180", kPi, kPi / 2},
};

std::vector<double> params_of(const json &e, std::size_t n, const std::string &field) {
  std::vector<double> p;
  if (e.contains("params"))
    p = e.at("params").get<std::vector<double>>();
  if (p.size() != n)
    throw ParseError("expected " + std::to_string(n) + " params", field + ".params");
  return p;
}

double round10(double x) {
  const double r = std::round(x * 1e10) / 1e10;
  return r == 0.0 ? 0.0 : r; // no negative zero
}

} // namespace

Unitary4 ideal_unitary(const CircuitIR &c) {
  Unitary4 acc;
  for (const auto &op : c.ops) {
    switch (op.kind) {
    case OpKind::Rxy:
    case OpKind::U:
    case OpKind::VirtualZ:
    case OpKind::Physical:
      acc = on_qubit(op_matrix(op), op.qubits[0]) * acc;
      break;
    case OpKind::TwoQubit:
      // All native targets are symmetric under qubit exchange.
      acc = target_unitary(op.gate) * acc;
      break;
    case OpKind::Barrier:
    case OpKind::Measure:
      break;
    }
  }
  return acc;
}

CircuitIR circuit_from_json(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("circuit: ") + e.what(), "");
  }
  CircuitIR c;
  const json *ops = &doc;
  if (doc.is_object()) {
    c.num_qubits = doc.value("qubits", 2);
    if (!doc.contains("ops"))
      throw ParseError("circuit: missing ops", "ops");
    ops = &doc["ops"];
  }
  if (!ops->is_array())
    throw ParseError("circuit: ops must be an array", "ops");
  if (c.num_qubits != 2)
    throw ParseError("circuit: only two-qubit circuits are supported", "qubits");

  for (std::size_t i = 0; i < ops->size(); ++i) {
    const json &e = (*ops)[i];
    const std::string field = "ops[" + std::to_string(i) + "]";
    try {
      const std::string name = e.at("name").get<std::string>();
      std::vector<int> qs = e.value("qubits", std::vector<int>{});
      for (int q : qs)
        if (q < 0 || q >= c.num_qubits)
          throw ParseError("qubit index out of range", field + ".qubits");
      auto need = [&](std::size_t n) {
        if (qs.size() != n)
          throw ParseError(name + " takes " + std::to_string(n) + " qubit(s)", field + ".qubits");
      };
      Op op;
      auto named = std::find_if(std::begin(kNamed), std::end(kNamed),
                                [&](const Named &n) { return name == n.name; });
      if (named != std::end(kNamed)) {
        need(1);
        op = Op::rxy(qs[0], named->theta, named->phi);
      } else if (name == "RXY") {
        need(1);
        auto p = params_of(e, 2, field);
        op = Op::rxy(qs[0], p[0], p[1]);
      } else if (name == "U") {
        need(1);
        auto p = params_of(e, 3, field);
        op = Op::u(qs[0], p[0], p[1], p[2]);
        op.slot = e.value("slot", false);
        op.elided = e.value("elided", false);
      } else if (name == "RZ" || name == "Z") {
        need(1);
        op = Op::z(qs[0], params_of(e, 1, field)[0]);
      } else if (name == "barrier") {
        op = Op::barrier(qs);
      } else if (name == "measure") {
        need(1);
        op = Op::measure(qs[0]);
      } else {
        GateKind k;
        try {
          k = gate_kind_from_string(name);
        } catch (const ValidationError &) {
          throw ParseError("unknown gate '" + name + "'", field + ".name");
        }
        need(2);
        if (qs[0] == qs[1])
          throw ParseError("two-qubit gate on a single qubit", field + ".qubits");
        op = Op::two_qubit(k, qs[0], qs[1]);
        op.corrected = e.value("corrected", false);
      }
      c.ops.push_back(std::move(op));
    } catch (const json::exception &ex) {
      throw ParseError(std::string("circuit: ") + ex.what(), field);
    }
  }
  return c;
}

namespace {

json op_to_json(const Op &op, bool timed) {
  json e;
  auto qs = op.qubits;
  switch (op.kind) {
  case OpKind::Rxy:
    e["name"] = "RXY";
    e["params"] = {round10(op.theta), round10(op.phi)};
    break;
  case OpKind::U:
    e["name"] = "U";
    e["params"] = {round10(op.theta), round10(op.phi), round10(op.lambda)};
    if (op.slot)
      e["slot"] = true;
    if (op.elided)
      e["elided"] = true;
    break;
  case OpKind::VirtualZ:
    e["name"] = "RZ";
    e["params"] = {round10(op.theta)};
    break;
  case OpKind::Physical:
    throw ValidationError("cannot serialize a pending physical correction");
  case OpKind::TwoQubit:
    e["name"] = std::string(to_string(op.gate));
    if (op.corrected)
      e["corrected"] = true;
    break;
  case OpKind::Barrier:
    e["name"] = "barrier";
    break;
  case OpKind::Measure:
    e["name"] = "measure";
    break;
  }
  e["qubits"] = qs;
  if (timed) {
    e["start_ns"] = op.start_ns;
    e["end_ns"] = op.end_ns;
  }
  return e;
}

} // namespace

std::string circuit_to_json(const CircuitIR &c) {
  json doc;
  doc["qubits"] = c.num_qubits;
  doc["ops"] = json::array();
  for (const auto &op : c.ops)
    doc["ops"].push_back(op_to_json(op, false));
  return doc.dump(2) + "\n";
}

std::string schedule_to_json(const ScheduledCircuit &sc) {
  json doc;
  doc["format"] = "framewright-schedule/1";
  doc["qubits"] = sc.num_qubits;
  doc["duration_ns"] = sc.duration_ns;
  doc["ops"] = json::array();
  for (const auto &op : sc.ops)
    doc["ops"].push_back(op_to_json(op, true));
  return doc.dump(2) + "\n";
}

} // namespace framewright::compiler
