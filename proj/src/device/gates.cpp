#include "framewright/gates.hpp"

#include <cmath>

#include "framewright/error.hpp"

namespace framewright {

using linalg::Unitary4;

namespace {
constexpr GateTraits kTraits[] = {
    {"ISWAP_ONRES", 2, Placement::BackOnly, Commutation::SwapPhases},
    {"SWAP", 2, Placement::BackOnly, Commutation::SwapPhases},
    {"ISWAP_STARK", 2, Placement::BackOnly, Commutation::SwapPhases},
    {"BSWAP_STARK", 2, Placement::BackOnly, Commutation::SwapNegate},
    {"SQISWAP_ONRES", 3, Placement::FrontBackDriven, Commutation::Blocking},
    {"SQISWAP_STARK", 3, Placement::FrontBackDriven, Commutation::Blocking},
    {"B", 4, Placement::FrontBackIdle, Commutation::Blocking},
    {"CZ_ECHOED_CR", 0, Placement::None, Commutation::Diagonal},
};
} // namespace

const GateTraits &traits(GateKind k) { return kTraits[static_cast<int>(k)]; }

std::string_view to_string(GateKind k) { return traits(k).name; }

GateKind gate_kind_from_string(std::string_view s) {
  for (GateKind k : kAllGateKinds)
    if (traits(k).name == s)
      return k;
  throw ValidationError("unknown gate kind '" + std::string(s) + "'");
}

namespace targets {

namespace {
Unitary4 exp_i(double cxx, double cyy, double czz) {
  using namespace linalg;
  // exp(i (cxx XX + cyy YY + czz ZZ))
  std::array<std::array<double, 4>, 4> c{};
  c[1][1] = -cxx;
  c[2][2] = -cyy;
  c[3][3] = -czz;
  return expm_hermitian(from_paulis(c), 1.0);
}
} // namespace

Unitary4 iswap() {
  Mat4 m = Mat4::Zero();
  m(0, 0) = 1;
  m(1, 2) = cplx(0, 1);
  m(2, 1) = cplx(0, 1);
  m(3, 3) = 1;
  return Unitary4::from_matrix(m);
}

Unitary4 swap() {
  Mat4 m = Mat4::Zero();
  m(0, 0) = 1;
  m(1, 2) = 1;
  m(2, 1) = 1;
  m(3, 3) = 1;
  return Unitary4::from_matrix(m);
}

Unitary4 bswap() {
  Mat4 m = Mat4::Zero();
  m(0, 3) = cplx(0, 1);
  m(1, 1) = 1;
  m(2, 2) = 1;
  m(3, 0) = cplx(0, 1);
  return Unitary4::from_matrix(m);
}

Unitary4 sqiswap() {
  const double r = 1.0 / std::sqrt(2.0);
  Mat4 m = Mat4::Zero();
  m(0, 0) = 1;
  m(1, 1) = r;
  m(1, 2) = cplx(0, r);
  m(2, 1) = cplx(0, r);
  m(2, 2) = r;
  m(3, 3) = 1;
  return Unitary4::from_matrix(m);
}

Unitary4 bgate() { return exp_i(kPi / 4, kPi / 8, 0.0); }

Unitary4 cz() {
  Mat4 m = Mat4::Identity();
  m(3, 3) = -1;
  return Unitary4::from_matrix(m);
}

Unitary4 cnot() {
  Mat4 m = Mat4::Zero();
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return Unitary4::from_matrix(m);
}

} // namespace targets

Unitary4 target_unitary(GateKind k) {
  switch (k) {
  case GateKind::ISWAP_ONRES:
  case GateKind::ISWAP_STARK:
    return targets::iswap();
  case GateKind::SWAP:
    return targets::swap();
  case GateKind::BSWAP_STARK:
    return targets::bswap();
  case GateKind::SQISWAP_ONRES:
  case GateKind::SQISWAP_STARK:
    return targets::sqiswap();
  case GateKind::B:
    return targets::bgate();
  case GateKind::CZ_ECHOED_CR:
    return targets::cz();
  }
  throw ValidationError("unknown gate kind");
}

} // namespace framewright
