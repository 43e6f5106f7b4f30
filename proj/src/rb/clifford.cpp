#include <cmath>
#include <deque>
#include <limits>

#include "framewright/error.hpp"
#include "framewright/rb.hpp"

namespace framewright::rb {

using namespace linalg;
using compiler::Op;

namespace {

constexpr std::size_t kGroupOrder = 11520;

Mat2 hadamard() {
  Mat2 h;
  h << 1.0, 1.0, 1.0, -1.0;
  return h / std::sqrt(2.0);
}

Mat2 phase_s() {
  Mat2 s = Mat2::Identity();
  s(1, 1) = cplx(0.0, 1.0);
  return s;
}

// Local generators: H0, H1, S0, S1.
struct Local {
  int qubit;
  Mat2 m;
};
const std::array<Local, 4> &locals() {
  static const std::array<Local, 4> g{
      Local{0, hadamard()}, Local{1, hadamard()}, Local{0, phase_s()}, Local{1, phase_s()}};
  return g;
}

Mat4 local_matrix(const Local &l) {
  return l.qubit == 0 ? kron(l.m, Mat2::Identity()) : kron(Mat2::Identity(), l.m);
}

// Global phase fixed by the first entry (column-major) of magnitude > 0.1.
std::string key_of(const Mat4 &u) {
  const cplx *d = u.data();
  cplx ref = 1.0;
  for (int i = 0; i < 16; ++i)
    if (std::abs(d[i]) > 0.1) {
      ref = std::abs(d[i]) / d[i];
      break;
    }
  std::string k;
  k.reserve(32 * sizeof(long long));
  for (int i = 0; i < 16; ++i) {
    const cplx z = d[i] * ref;
    for (double x : {z.real(), z.imag()}) {
      const long long v = std::llround(x * 1e6);
      k.append(reinterpret_cast<const char *>(&v), sizeof v);
    }
  }
  return k;
}

bool is_phase_identity(const Mat2 &m) {
  return std::abs(std::abs(m.trace()) / 2.0 - 1.0) < 1e-9;
}

} // namespace

GateKind entangler(Gateset g) {
  return g == Gateset::CZ ? GateKind::CZ_ECHOED_CR : GateKind::ISWAP_ONRES;
}

CliffordGroup::CliffordGroup() {
  const Mat4 cz = targets::cz().matrix();
  std::vector<Mat4> gens;
  for (const auto &l : locals())
    gens.push_back(local_matrix(l));
  gens.push_back(cz);

  mats_.push_back(Mat4::Identity());
  keys_.emplace(key_of(mats_[0]), 0);
  for (std::size_t i = 0; i < mats_.size(); ++i)
    for (const auto &g : gens) {
      Mat4 n = g * mats_[i];
      auto [it, fresh] = keys_.emplace(key_of(n), static_cast<std::uint32_t>(mats_.size()));
      if (fresh)
        mats_.push_back(std::move(n));
    }
  if (mats_.size() != kGroupOrder)
    throw NumericalError("CliffordGroup: enumeration produced " + std::to_string(mats_.size()) +
                         " elements");

  for (Gateset gs : {Gateset::CZ, Gateset::ISWAP}) {
    std::vector<Mat4> edges(gens.begin(), gens.begin() + 4);
    edges.push_back(target_unitary(entangler(gs)).matrix());
    if (!try_find(edges.back()))
      throw ValidationError("CliffordGroup: entangler is not a Clifford");
    Path p;
    const int inf = std::numeric_limits<int>::max();
    p.depth.assign(mats_.size(), inf);
    p.parent.assign(mats_.size(), 0);
    p.via.assign(mats_.size(), -1);
    std::deque<std::uint32_t> q{0};
    p.depth[0] = 0;
    while (!q.empty()) {
      const std::uint32_t e = q.front();
      q.pop_front();
      for (std::size_t gi = 0; gi < edges.size(); ++gi) {
        const int w = gi == 4 ? 1 : 0;
        const std::uint32_t n = keys_.at(key_of(edges[gi] * mats_[e]));
        if (p.depth[e] + w < p.depth[n]) {
          p.depth[n] = p.depth[e] + w;
          p.parent[n] = e;
          p.via[n] = static_cast<std::int8_t>(gi);
          if (w == 0)
            q.push_front(n);
          else
            q.push_back(n);
        }
      }
    }
    paths_.push_back(std::move(p));
  }
}

const CliffordGroup &CliffordGroup::get() {
  static const CliffordGroup g;
  return g;
}

std::optional<Clifford2Q> CliffordGroup::try_find(const Mat4 &u) const {
  const auto it = keys_.find(key_of(u));
  if (it == keys_.end())
    return std::nullopt;
  return Clifford2Q{it->second};
}

Clifford2Q CliffordGroup::find(const Mat4 &u) const {
  if (auto c = try_find(u))
    return *c;
  throw ValidationError("CliffordGroup: unitary is not a two-qubit Clifford");
}

Clifford2Q CliffordGroup::compose(Clifford2Q a, Clifford2Q b) const {
  return find(unitary(a) * unitary(b));
}

Clifford2Q CliffordGroup::inverse(Clifford2Q c) const { return find(unitary(c).adjoint()); }

int CliffordGroup::entangling_count(Clifford2Q c, Gateset g) const {
  return paths_.at(static_cast<std::size_t>(g)).depth.at(c.index);
}

Clifford2Q clifford_sample(std::mt19937_64 &rng) {
  // Rejection keeps the draw independent of the standard library's distributions.
  constexpr std::uint64_t n = kGroupOrder;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do
    x = rng();
  while (x >= limit);
  return Clifford2Q{static_cast<std::uint32_t>(x % n)};
}

Clifford2Q clifford_invert(Clifford2Q c) { return CliffordGroup::get().inverse(c); }

CircuitIR clifford_compile(Clifford2Q c, Gateset g) {
  const CliffordGroup &grp = CliffordGroup::get();
  const auto &p = grp.paths_.at(static_cast<std::size_t>(g));
  if (c.index >= grp.size())
    throw ValidationError("clifford_compile: index out of range");
  std::vector<int> seq;
  for (std::uint32_t e = c.index; e != 0; e = p.parent[e])
    seq.push_back(p.via[e]);

  CircuitIR out;
  std::array<Mat2, 2> acc{Mat2::Identity(), Mat2::Identity()};
  auto flush = [&] {
    for (int q = 0; q < 2; ++q) {
      if (!is_phase_identity(acc[q])) {
        const auto u = compiler::u_params(acc[q]);
        out.ops.push_back(Op::u(q, u[0], u[1], u[2]));
      }
      acc[q] = Mat2::Identity();
    }
  };
  for (auto it = seq.rbegin(); it != seq.rend(); ++it) {
    if (*it == 4) {
      flush();
      out.ops.push_back(Op::two_qubit(entangler(g), 0, 1));
    } else {
      const Local &l = locals()[static_cast<std::size_t>(*it)];
      acc[l.qubit] = l.m * acc[l.qubit];
    }
  }
  flush();
  return out;
}

CircuitIR interleave_circuit(const Interleave &il) {
  CircuitIR c;
  switch (il.kind) {
  case Interleave::Kind::Native:
    c.ops.push_back(Op::two_qubit(il.gate, 0, 1));
    break;
  case Interleave::Kind::SqiswapPair:
    if (il.gate != GateKind::SQISWAP_ONRES && il.gate != GateKind::SQISWAP_STARK)
      throw ValidationError("interleave: sqiswap pair needs a sqrt-ISWAP gate");
    c.ops.push_back(Op::two_qubit(il.gate, 0, 1));
    c.ops.push_back(Op::two_qubit(il.gate, 0, 1));
    break;
  case Interleave::Kind::BPair:
    if (il.gate != GateKind::B)
      throw ValidationError("interleave: B pair needs the B gate");
    // ISWAP = Y(-90)_1 B Y(90)_1 B Y(-90)_1
    c.ops.push_back(Op::rxy(1, kPi / 2, -kPi / 2));
    c.ops.push_back(Op::two_qubit(GateKind::B, 0, 1));
    c.ops.push_back(Op::rxy(1, kPi / 2, kPi / 2));
    c.ops.push_back(Op::two_qubit(GateKind::B, 0, 1));
    c.ops.push_back(Op::rxy(1, kPi / 2, -kPi / 2));
    break;
  }
  return c;
}

Clifford2Q interleave_clifford(const Interleave &il) {
  const auto c = CliffordGroup::get().try_find(compiler::ideal_unitary(interleave_circuit(il)).matrix());
  if (!c)
    throw ValidationError(std::string("interleave: ") + std::string(to_string(il.gate)) +
                          " element is not a Clifford");
  return *c;
}

bool interleave_is_composite(const Interleave &il) { return il.kind != Interleave::Kind::Native; }

} // namespace framewright::rb
