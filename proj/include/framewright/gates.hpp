#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "framewright/linalg.hpp"

namespace framewright {

enum class GateKind {
  ISWAP_ONRES,
  SWAP,
  ISWAP_STARK,
  BSWAP_STARK,
  SQISWAP_ONRES,
  SQISWAP_STARK,
  B,
  CZ_ECHOED_CR,
};

inline constexpr std::array<GateKind, 8> kAllGateKinds = {
    GateKind::ISWAP_ONRES,   GateKind::SWAP,          GateKind::ISWAP_STARK,
    GateKind::BSWAP_STARK,   GateKind::SQISWAP_ONRES, GateKind::SQISWAP_STARK,
    GateKind::B,             GateKind::CZ_ECHOED_CR};

// Where the time-dependent corrections land and how virtual Zs cross the gate.
enum class Placement { BackOnly, FrontBackDriven, FrontBackIdle, None };
enum class Commutation { SwapPhases, SwapNegate, Diagonal, Blocking };

struct GateTraits {
  std::string_view name;
  int phase_count;
  Placement placement;
  Commutation commutation;
};

const GateTraits &traits(GateKind k);
std::string_view to_string(GateKind k);
GateKind gate_kind_from_string(std::string_view s);

namespace targets {
linalg::Unitary4 iswap();
linalg::Unitary4 swap();
linalg::Unitary4 bswap();
linalg::Unitary4 sqiswap();
linalg::Unitary4 bgate();
linalg::Unitary4 cz();
linalg::Unitary4 cnot(); // control = qubit 0
} // namespace targets

linalg::Unitary4 target_unitary(GateKind k);

} // namespace framewright
