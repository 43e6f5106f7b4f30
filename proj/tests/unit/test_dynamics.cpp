#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "common.hpp"
#include "framewright/dynamics.hpp"
#include "framewright/error.hpp"
#include "framewright/library.hpp"

using namespace framewright;
using namespace framewright::dynamics;
using namespace framewright::linalg;
using fwtest::kQ12;
using fwtest::kQ8;
using fwtest::kQ9;

namespace {
constexpr int I = 0, X = 1, Y = 2, Z = 3;
double coeff_mhz(const Hermitian4 &h, int a, int b) { return h.pauli_coefficient(a, b) / kTwoPiMHz; }
} // namespace

TEST(EffectiveModel, OnResonantCoefficients) {
  const auto m = effective_hamiltonian_onres(fwtest::table1(), kQ8, kQ9, 54.0);
  const double mu = 2.0 / -54.0;
  EXPECT_NEAR(coeff_mhz(m.hamiltonian, X, I), 27.0, 1e-12);
  EXPECT_NEAR(coeff_mhz(m.hamiltonian, Z, X), 27.0 * mu, 1e-12);
  EXPECT_NEAR(coeff_mhz(m.hamiltonian, I, Z), 27.0, 1e-12);
  EXPECT_NEAR(coeff_mhz(m.hamiltonian, Z, Z), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.frame_offsets.driven_mhz, 0.0);
  EXPECT_NEAR(m.frame_offsets.idle_mhz, -54.0, 1e-9);
  // DRAG quadrature enters as Y terms.
  const auto hq = m.at(54.0, 3.0);
  EXPECT_NEAR(coeff_mhz(hq, Y, I), 1.5, 1e-12);
  EXPECT_NEAR(coeff_mhz(hq, Z, Y), 1.5 * mu, 1e-12);
}

TEST(EffectiveModel, StarkCoefficients) {
  const double om = 80.0, lam = 60.0; // Omega' = 100
  const auto m = effective_hamiltonian_stark(fwtest::table1(), kQ8, kQ9, om, lam);
  const double mu = 2.0 / -54.0;
  EXPECT_NEAR(coeff_mhz(m.hamiltonian, Z, I), 50.0, 1e-12);
  EXPECT_NEAR(coeff_mhz(m.hamiltonian, I, Z), -0.5 * (-54.0 - 60.0), 1e-12);
  EXPECT_NEAR(coeff_mhz(m.hamiltonian, X, X), -mu * om * lam / 200.0, 1e-12);
  EXPECT_NEAR(coeff_mhz(m.hamiltonian, Z, X), mu * om * om / 200.0, 1e-12);
  EXPECT_NEAR(m.frame_offsets.driven_mhz, -60.0, 1e-12);
  EXPECT_NEAR(m.frame_offsets.idle_mhz, -114.0, 1e-9);
  EXPECT_THROW(effective_hamiltonian_stark(fwtest::table1(), kQ8, kQ9, om, 0.0), ValidationError);
}

TEST(EffectiveModel, UncoupledPairRejected) {
  EXPECT_THROW(effective_hamiltonian_onres(fwtest::table1(), kQ9, kQ12, 10.0), ValidationError);
}

TEST(EffectiveModel, SquareEnvelopeIsExactExponential) {
  const auto m = effective_hamiltonian_onres(fwtest::table1(), kQ8, kQ9, 54.0);
  const auto u = evolve_effective(m, device::square(123.0, 54.0));
  EXPECT_LT((u.matrix() - expm_hermitian(m.hamiltonian, 123.0).matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EffectiveModel, StepRefinementConverges) {
  const auto m = effective_hamiltonian_onres(fwtest::table1(), kQ8, kQ9, 54.0);
  const auto env = device::flat_top(device::kRampSigma, 150.0, 54.0);
  const auto a = evolve_effective(m, env, 0.05), b = evolve_effective(m, env, 0.005);
  EXPECT_GT(average_gate_fidelity(a, b), 1.0 - 1e-10);
  EXPECT_THROW(evolve_effective(m, env, 0.0), ValidationError);
}

TEST(FrameWrap, ZeroOffsetsLeaveVUnchanged) {
  const Unitary4 v = targets::sqiswap();
  const auto w = frame_wrap(v, FrameOffsets{}, 17.0, 300.0);
  EXPECT_LT((w.matrix() - v.matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FrameWrap, ExplicitForm) {
  const FrameOffsets off{1.3, -0.4};
  const double t0 = 250.0, t1 = 520.0;
  const Unitary4 v = targets::bgate();
  const Mat4 expect = zz_layer(2 * kPi * 1e-3 * 1.3 * t1, 2 * kPi * 1e-3 * -0.4 * t1) * v.matrix() *
                      zz_layer(2 * kPi * 1e-3 * 1.3 * t0, 2 * kPi * 1e-3 * -0.4 * t0).adjoint();
  EXPECT_LT((frame_wrap(v, off, t0, t1).matrix() - expect).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((frame_operator(off, t1) - zz_layer(2 * kPi * 1e-3 * 1.3 * t1, 2 * kPi * 1e-3 * -0.4 * t1))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(FrameWrap, DiagonalGateWithEqualRatesIsPeriodicInvariant) {
  // A diagonal V commutes with the frame, so only the elapsed time matters.
  const FrameOffsets off{0.9, 2.1};
  const Unitary4 v = targets::cz();
  const auto a = frame_wrap(v, off, 0.0, 100.0), b = frame_wrap(v, off, 1234.0, 1334.0);
  EXPECT_NEAR(average_gate_fidelity(a, b), 1.0, 1e-12);
}

TEST(FrameWrap, InstanceChecksWindow) {
  const auto &in = fwtest::bundled_library().instance(GateKind::ISWAP_ONRES);
  EXPECT_THROW(frame_wrap(in, 0.0, in.duration_ns + 5.0), ValidationError);
  EXPECT_NO_THROW(frame_wrap(in, 64.0, 64.0 + in.duration_ns));
}

TEST(ReferenceEvolve, TrajectoryEndpointMatchesPropagator) {
  const auto &s = fwtest::bundled_library().at(GateKind::ISWAP_ONRES);
  const auto &dev = fwtest::table1();
  const auto u = reference_evolve(dev, s.program.qubits, s.program.waveform, 40.0);
  Vec4 psi = Vec4::Zero();
  psi(1) = 1.0;
  const std::vector<double> cps{s.program.waveform.duration_ns};
  const auto traj = reference_trajectory(dev, s.program.qubits, s.program.waveform, psi, cps, 40.0);
  ASSERT_EQ(traj.size(), 1u);
  EXPECT_LT((traj[0] - u.matrix() * psi).norm(), 1e-8);
}

// Ground truth integrated at absolute time against the frame-tracked model V.
class OracleAgreement : public ::testing::TestWithParam<GateKind> {};

TEST_P(OracleAgreement, RandomStartTimes) {
  const auto &s = fwtest::bundled_library().at(GetParam());
  const auto &dev = fwtest::table1();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ts(0.0, 5000.0);
  for (int i = 0; i < 4; ++i) {
    const double t = std::round(ts(rng));
    const auto u = reference_evolve(dev, s.program.qubits, s.program.waveform, t);
    const auto w = frame_wrap(s.instance, t, t + s.instance.duration_ns);
    EXPECT_GE(average_gate_fidelity(u, w), 0.999) << "t_start " << t;
  }
}

INSTANTIATE_TEST_SUITE_P(TrackedGates, OracleAgreement,
                         ::testing::Values(GateKind::ISWAP_ONRES, GateKind::ISWAP_STARK,
                                           GateKind::BSWAP_STARK, GateKind::SQISWAP_STARK,
                                           GateKind::B),
                         [](const auto &info) { return std::string(to_string(info.param)); });

TEST(Chevron, RidgeAtDetuning) {
  std::vector<double> amps{50.0, 52.0, 54.0, 56.0, 58.0};
  std::vector<double> durs;
  for (double t = 10; t <= 400; t += 10)
    durs.push_back(t);
  const auto ch = chevron_sweep(fwtest::table1(), kQ8, kQ9, amps, durs);
  EXPECT_DOUBLE_EQ(ch.ridge_amplitude(), 54.0);
  const auto &row = ch.p_transfer[2];
  EXPECT_GT(*std::max_element(row.begin(), row.end()), 0.99);
  const auto csv = ch.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "amplitude_mhz,duration_ns,p_transfer");
}

TEST(Chevron, OffResonantAmplitudeDoesNotTransfer) {
  std::vector<double> amps{30.0};
  std::vector<double> durs;
  for (double t = 10; t <= 600; t += 10)
    durs.push_back(t);
  const auto ch = chevron_sweep(fwtest::table1(), kQ8, kQ9, amps, durs);
  EXPECT_LT(*std::max_element(ch.p_transfer[0].begin(), ch.p_transfer[0].end()), 0.1);
}

TEST(OscillationFrequency, SyntheticCosine) {
  std::vector<double> t, p;
  for (double x = 0; x <= 2000; x += 4) {
    t.push_back(x);
    p.push_back(0.5 - 0.5 * std::cos(2 * kPi * 1.7e-3 * x));
  }
  EXPECT_NEAR(oscillation_frequency(t, p), 1.7, 1e-3);
  EXPECT_THROW(oscillation_frequency(std::vector<double>{1, 2}, std::vector<double>{0, 1}), ValidationError);
}
