#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "common.hpp"
#include "framewright/compiler.hpp"
#include "framewright/error.hpp"
#include "framewright/forge.hpp"
#include "framewright/library.hpp"

using namespace framewright;
using namespace framewright::forge;
using namespace framewright::linalg;
using fwtest::kQ12;
using fwtest::kQ8;
using fwtest::kQ9;

TEST(GateTraits, PhaseCountsAndNames) {
  const std::map<GateKind, int> counts{
      {GateKind::ISWAP_ONRES, 2}, {GateKind::SWAP, 2},          {GateKind::ISWAP_STARK, 2},
      {GateKind::BSWAP_STARK, 2}, {GateKind::SQISWAP_ONRES, 3}, {GateKind::SQISWAP_STARK, 3},
      {GateKind::B, 4},           {GateKind::CZ_ECHOED_CR, 0}};
  for (GateKind k : kAllGateKinds) {
    EXPECT_EQ(traits(k).phase_count, counts.at(k));
    EXPECT_EQ(gate_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(gate_kind_from_string("CNOT"), ValidationError);
}

TEST(Targets, Relations) {
  EXPECT_NEAR(average_gate_fidelity(targets::sqiswap() * targets::sqiswap(), targets::iswap()), 1.0, 1e-14);
  // BSWAP swaps |00> and |11> with a factor i, leaves the odd-parity block alone.
  EXPECT_NEAR(std::abs(targets::bswap()(3, 0) - cplx(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(targets::bswap()(1, 1) - 1.0), 0.0, 1e-15);
  for (GateKind k : kAllGateKinds)
    EXPECT_TRUE(is_unitary(target_unitary(k).matrix()));
  // CNOT = (I x H) CZ (I x H)
  Mat2 h;
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  const Mat4 ih = kron(pauli::I(), h);
  EXPECT_LT((ih * targets::cz().matrix() * ih - targets::cnot().matrix()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Resonance, OnResonantMatchesDetuning) {
  const auto r = solve_resonance(GateKind::ISWAP_ONRES, fwtest::table1(), kQ8, kQ9);
  EXPECT_NEAR(r.omega_mhz, 54.0, 1e-9);
  EXPECT_NEAR(r.drive_freq_mhz, 4726.0, 1e-9);
}

TEST(Resonance, StarkIswap) {
  const auto &dev = fwtest::table1();
  const auto r = solve_resonance(GateKind::ISWAP_STARK, dev, kQ8, kQ9, 60.0);
  EXPECT_NEAR(r.omega_mhz, std::sqrt(114.0 * 114.0 - 60.0 * 60.0), 1e-9);
  EXPECT_NEAR(r.omega_mhz, 96.933, 1e-3);
  EXPECT_NEAR(r.drive_freq_mhz, 4726.0 - 60.0, 1e-9);
  // The shifted driven qubit lands on the idle qubit.
  EXPECT_NEAR(4726.0 + device::stark_shift(r.omega_mhz, r.lambda_mhz), 4780.0, 1e-9);
  EXPECT_THROW(solve_resonance(GateKind::ISWAP_STARK, dev, kQ8, kQ9, -60.0), NumericalError);
  EXPECT_THROW(solve_resonance(GateKind::ISWAP_STARK, dev, kQ8, kQ9, 0.0), ValidationError);
}

TEST(Resonance, StarkBswap) {
  const auto r = solve_resonance(GateKind::BSWAP_STARK, fwtest::table1(), kQ12, kQ8, 4850.0 - 44.0);
  EXPECT_NEAR(r.lambda_mhz, 44.0, 1e-9);
  EXPECT_NEAR(r.stark_shift_mhz, 36.0, 1e-9);
  EXPECT_NEAR(r.omega_mhz, std::sqrt(80.0 * 80.0 - 44.0 * 44.0), 1e-9);
  // Two-photon condition: shifted f12 + f8 = 2 f_drive.
  EXPECT_NEAR(4850.0 + device::stark_shift(r.omega_mhz, r.lambda_mhz) + 4726.0, 2 * r.drive_freq_mhz, 1e-9);
}

TEST(DefaultPairs, Labels) {
  EXPECT_EQ(default_pair_labels(GateKind::BSWAP_STARK), (std::array<std::string, 2>{"Q12", "Q8"}));
  EXPECT_EQ(default_pair_labels(GateKind::CZ_ECHOED_CR), (std::array<std::string, 2>{"Q8", "Q12"}));
  EXPECT_EQ(default_pair_labels(GateKind::SWAP), (std::array<std::string, 2>{"Q8", "Q9"}));
}

TEST(BundledLibrary, AllGatesWithinTarget) {
  const auto &lib = fwtest::bundled_library();
  const std::map<GateKind, double> durations{
      {GateKind::ISWAP_ONRES, 406}, {GateKind::SWAP, 413},          {GateKind::ISWAP_STARK, 207},
      {GateKind::BSWAP_STARK, 588}, {GateKind::SQISWAP_ONRES, 166}, {GateKind::SQISWAP_STARK, 127},
      {GateKind::B, 314},           {GateKind::CZ_ECHOED_CR, 512}};
  for (GateKind k : kAllGateKinds) {
    ASSERT_TRUE(lib.contains(k)) << to_string(k);
    const auto &s = lib.at(k);
    EXPECT_LT(s.infidelity, 1e-3) << to_string(k);
    EXPECT_DOUBLE_EQ(s.instance.duration_ns, durations.at(k)) << to_string(k);
    EXPECT_TRUE(s.instance.calibrated()) << to_string(k);
    EXPECT_EQ(static_cast<int>(s.instance.calibrated_phases.size()), traits(k).phase_count);
    const auto fit = phase_optimized_distance(s.instance.canonical, target_unitary(k));
    EXPECT_NEAR(fit.infidelity, s.infidelity, 1e-9) << to_string(k);
  }
}

TEST(BundledLibrary, RealizeReproducesCanonical) {
  const auto &dev = fwtest::table1();
  for (const auto &[k, s] : fwtest::bundled_library().gates()) {
    const auto again = realize(dev, s.recipe);
    EXPECT_NEAR(average_gate_fidelity(again.instance.canonical, s.instance.canonical), 1.0, 1e-12)
        << to_string(k);
    EXPECT_NEAR(average_gate_fidelity(canonical_unitary(dev, again.program), s.instance.canonical), 1.0,
                1e-12);
  }
}

TEST(BundledLibrary, JsonRoundTripIsByteStable) {
  const auto &dev = fwtest::table1();
  const std::string text = library_to_json(dev, fwtest::bundled_library());
  EXPECT_EQ(library_to_json(dev, library_from_json(dev, text)), text);
  EXPECT_THROW(library_from_json(dev, "{\"gates\": 5}"), ValidationError);
  EXPECT_THROW(library_from_json(dev, "nope"), ValidationError);
}

TEST(Compositions, SqrtIswapSquared) {
  const auto &in = fwtest::bundled_library().instance(GateKind::SQISWAP_ONRES);
  compiler::CircuitIR c;
  c.ops = {compiler::Op::two_qubit(GateKind::SQISWAP_ONRES), compiler::Op::two_qubit(GateKind::SQISWAP_ONRES)};
  EXPECT_NEAR(average_gate_fidelity(compiler::ideal_unitary(c), targets::iswap()), 1.0, 1e-12);
  const auto sc = compiler::compile(c, fwtest::bundled_library());
  EXPECT_GE(average_gate_fidelity(compiler::circuit_unitary(sc, fwtest::bundled_library()), targets::iswap()),
            0.998);
  EXPECT_GT(in.duration_ns, 0.0);
}

TEST(Compositions, IdealEchoedCrIsCz) {
  const auto fit = phase_optimized_distance(ideal_echoed_cr_cz(), targets::cz());
  EXPECT_LT(fit.infidelity, 1e-12);
}

TEST(Synthesis, FreshStarkIswapMatchesBundled) {
  const auto &dev = fwtest::table1();
  const auto s = synthesize(dev, GateKind::ISWAP_STARK, kQ8, kQ9);
  EXPECT_LT(s.infidelity, 1e-3);
  const auto &b = fwtest::bundled_library().at(GateKind::ISWAP_STARK);
  EXPECT_DOUBLE_EQ(s.instance.duration_ns, b.instance.duration_ns);
  EXPECT_NEAR(s.recipe.get("omega_mhz"), b.recipe.get("omega_mhz"), 1e-6);
  EXPECT_FALSE(s.instance.calibrated());
}

TEST(Synthesis, RejectsUncoupledPairAndTightTarget) {
  const auto &dev = fwtest::table1();
  EXPECT_THROW(synthesize(dev, GateKind::ISWAP_ONRES, kQ9, kQ12), ValidationError);
  SynthOptions o;
  o.max_infidelity = 1e-12;
  EXPECT_THROW(synthesize(dev, GateKind::SQISWAP_STARK, kQ8, kQ9, o), NumericalError);
}

TEST(Recipe, MissingKeyThrows) {
  GateRecipe r;
  r.params["omega_mhz"] = 3.0;
  EXPECT_DOUBLE_EQ(r.get("omega_mhz"), 3.0);
  EXPECT_DOUBLE_EQ(r.get_or("flat_ns", 7.0), 7.0);
  EXPECT_THROW(r.get("flat_ns"), ValidationError);
}
