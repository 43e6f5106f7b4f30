#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "framewright/error.hpp"
#include "framewright/gates.hpp"
#include "framewright/linalg.hpp"

using namespace framewright;
using namespace framewright::linalg;

namespace {

const cplx I1(0.0, 1.0);

Mat4 random_unitary(std::mt19937_64 &rng) {
  std::normal_distribution<double> n;
  Mat4 g;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      g(r, c) = cplx(n(rng), n(rng));
  Eigen::HouseholderQR<Mat4> qr(g);
  return qr.householderQ() * Mat4::Identity();
}

Vec4 random_state(std::mt19937_64 &rng) {
  std::normal_distribution<double> n;
  Vec4 v;
  for (int i = 0; i < 4; ++i)
    v(i) = cplx(n(rng), n(rng));
  return v.normalized();
}

double max_abs(const Mat4 &m) { return m.cwiseAbs().maxCoeff(); }

} // namespace

TEST(Kron, IdentityAndPauliProducts) {
  EXPECT_LT(max_abs(kron(pauli::I(), pauli::I()) - Mat4::Identity()), 1e-15);
  Mat4 zz = Mat4::Zero();
  zz.diagonal() << 1.0, -1.0, -1.0, 1.0;
  EXPECT_LT(max_abs(kron(pauli::Z(), pauli::Z()) - zz), 1e-15);
  Mat4 xx = Mat4::Zero();
  for (int i = 0; i < 4; ++i)
    xx(i, 3 - i) = 1.0;
  EXPECT_LT(max_abs(kron(pauli::X(), pauli::X()) - xx), 1e-15);
}

TEST(Kron, QubitZeroIsLeftFactor) {
  // X on qubit 0 maps |00> to |10>, which is index 2 with the right digit as qubit 1.
  const Mat4 x0 = kron(pauli::X(), pauli::I());
  EXPECT_NEAR(std::abs(x0(2, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(x0(1, 0)), 0.0, 1e-15);
}

TEST(Rotations, Conventions) {
  EXPECT_LT((rz(0.7) - Mat2(Eigen::Vector2cd(std::exp(-0.35 * I1), std::exp(0.35 * I1)).asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
  // rxy(pi, pi/2) = -iY
  EXPECT_LT((rxy(kPi, kPi / 2) + I1 * pauli::Y()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((ry(0.4) - rxy(0.4, kPi / 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Unitary4, CheckedConstruction) {
  Mat4 bad = Mat4::Identity();
  bad(0, 0) = 1.1;
  EXPECT_THROW(Unitary4::from_matrix(bad), ValidationError);
  EXPECT_NO_THROW(Unitary4::from_matrix(targets::iswap().matrix()));
}

TEST(Unitary4, ProductsStayUnitary) {
  std::mt19937_64 rng(11);
  Unitary4 acc;
  for (int i = 0; i < 200; ++i)
    acc = Unitary4::from_matrix(random_unitary(rng), 1e-12) * acc;
  EXPECT_TRUE(is_unitary(acc.matrix(), 1e-12));
}

TEST(Hermitian4, RejectsNonHermitian) {
  Mat4 m = Mat4::Zero();
  m(0, 1) = 1.0;
  EXPECT_THROW(Hermitian4::from_matrix(m), ValidationError);
}

TEST(Hermitian4, PauliCoefficientsRoundTrip) {
  std::array<std::array<double, 4>, 4> c{};
  c[1][1] = 0.3;
  c[3][0] = -1.2;
  c[2][3] = 0.05;
  const Hermitian4 h = from_paulis(c);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      EXPECT_NEAR(h.pauli_coefficient(a, b), c[a][b], 1e-15);
}

TEST(Expm, ZeroHamiltonianIsIdentity) {
  EXPECT_LT(max_abs(expm_hermitian(Hermitian4::zero(), 123.0).matrix() - Mat4::Identity()), 1e-15);
}

TEST(Expm, ExchangeGeneratesIswap) {
  // exp(+i pi/4 (XX+YY)) = ISWAP; as exp(-i H t): H = -(pi/4)(XX+YY), t = 1.
  std::array<std::array<double, 4>, 4> c{};
  c[1][1] = -kPi / 4;
  c[2][2] = -kPi / 4;
  const Unitary4 u = expm_hermitian(from_paulis(c), 1.0);
  EXPECT_NEAR(average_gate_fidelity(u, targets::iswap()), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(u(1, 2) - I1), 0.0, 1e-14);
}

TEST(Expm, RejectsNegativeTime) {
  EXPECT_THROW(expm_hermitian(Hermitian4::zero(), -1.0), ValidationError);
}

TEST(Expm, SemigroupProperty) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    std::array<std::array<double, 4>, 4> c{};
    for (auto &row : c)
      for (auto &x : row)
        x = 0.05 * n(rng);
    const Hermitian4 h = from_paulis(c);
    const double t1 = 3.7, t2 = 11.2;
    const Mat4 lhs = (expm_hermitian(h, t1) * expm_hermitian(h, t2)).matrix();
    EXPECT_LT(max_abs(lhs - expm_hermitian(h, t1 + t2).matrix()), 1e-10);
    Unitary4 steps;
    const int nsteps = 50;
    for (int k = 0; k < nsteps; ++k)
      steps = expm_hermitian(h, t2 / nsteps) * steps;
    EXPECT_LT(max_abs(steps.matrix() - expm_hermitian(h, t2).matrix()), 1e-10);
  }
}

TEST(Fidelity, FrozenValues) {
  // |Tr(ISWAP^dag SWAP)| = |1 + (-i) + (-i) + 1| = sqrt(8): F = (8 + 4) / 20.
  EXPECT_NEAR(average_gate_fidelity(targets::iswap(), targets::swap()), 0.6, 1e-14);
  // Tr(ISWAP) = 2.
  EXPECT_NEAR(average_gate_fidelity(Unitary4::identity(), targets::iswap()), 0.4, 1e-14);
}

TEST(Fidelity, GlobalPhaseAndSymmetry) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Unitary4 u = Unitary4::from_matrix(random_unitary(rng));
    const Unitary4 v = Unitary4::from_matrix(random_unitary(rng));
    const Unitary4 up = Unitary4::from_matrix(u.matrix() * std::exp(I1 * (0.37 * i)));
    EXPECT_NEAR(average_gate_fidelity(u, up), 1.0, 1e-12);
    EXPECT_NEAR(average_gate_fidelity(u, v), average_gate_fidelity(v, u), 1e-14);
    const double f = average_gate_fidelity(u, v);
    EXPECT_GE(f, 0.2 - 1e-12);
    EXPECT_LE(f, 1.0 + 1e-12);
  }
}

TEST(PhaseOptimizedDistance, IdentityCase) {
  const auto fit = phase_optimized_distance(targets::iswap(), targets::iswap());
  EXPECT_LT(fit.infidelity, 1e-12);
  const Unitary4 corrected =
      Unitary4::from_matrix(zz_layer(fit.phases[0], fit.phases[1])) * targets::iswap() *
      Unitary4::from_matrix(zz_layer(fit.phases[2], fit.phases[3]));
  EXPECT_NEAR(average_gate_fidelity(corrected, targets::iswap()), 1.0, 1e-12);
}

TEST(PhaseOptimizedDistance, RecoversConstructedPhases) {
  const Unitary4 u = Unitary4::from_matrix(zz_layer(0.3, -0.7)) * targets::iswap();
  const auto fit = phase_optimized_distance(u, targets::iswap());
  EXPECT_LT(fit.infidelity, 1e-12);
  const Unitary4 corrected = Unitary4::from_matrix(zz_layer(fit.phases[0], fit.phases[1])) * u *
                             Unitary4::from_matrix(zz_layer(fit.phases[2], fit.phases[3]));
  EXPECT_NEAR(average_gate_fidelity(corrected, targets::iswap()), 1.0, 1e-12);
}

TEST(PhaseOptimizedDistance, NeverWorseThanUnoptimized) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 10; ++i) {
    const Unitary4 u = Unitary4::from_matrix(random_unitary(rng));
    for (GateKind k : {GateKind::ISWAP_ONRES, GateKind::B, GateKind::CZ_ECHOED_CR}) {
      const auto fit = phase_optimized_distance(u, target_unitary(k));
      EXPECT_LE(fit.infidelity, 1.0 - average_gate_fidelity(u, target_unitary(k)) + 1e-12);
    }
  }
}

TEST(Decoherence, ZeroDurationIsIdentity) {
  std::mt19937_64 rng(1);
  const auto ch = decoherence_channel(277, 53, 0.0);
  const auto rho = DensityMatrix4::pure(random_state(rng));
  EXPECT_LT(max_abs(apply_channel(rho, ch).matrix() - rho.matrix()), 1e-14);
}

TEST(Decoherence, RejectsUnphysicalT2) {
  EXPECT_THROW(decoherence_channel(10, 25, 100), ValidationError);
  EXPECT_NO_THROW(decoherence_channel(10, 20, 100));
}

TEST(Decoherence, PureDephasingWhenT1Infinite) {
  const double inf = std::numeric_limits<double>::infinity();
  Vec4 plus = Vec4::Constant(0.5);
  const auto out = apply_channel(DensityMatrix4::pure(plus), decoherence_channel(inf, 40, 1000));
  for (int k = 0; k < 4; ++k)
    EXPECT_NEAR(out.population(k), 0.25, 1e-14);
  // Single-excitation coherence |00><01| decays as exp(-t/T2).
  EXPECT_NEAR(std::abs(out.matrix()(0, 1)), 0.25 * std::exp(-1.0 / 40), 1e-12);
}

TEST(Decoherence, ClosedFormDampingQ8Values) {
  // T1 = 277 us, T2 = 53 us, 398 ns.
  const auto ch = decoherence_channel(277, 53, 398);
  const auto out = apply_channel(DensityMatrix4::basis(3), ch);
  const double s = std::exp(-0.398 / 277);
  EXPECT_NEAR(out.population(3), s * s, 1e-12);
  EXPECT_NEAR(out.population(1), s * (1 - s), 1e-12);
  EXPECT_NEAR(out.population(0), (1 - s) * (1 - s), 1e-12);
  // |1> population of one qubit.
  EXPECT_NEAR(out.population(2) + out.population(3), s, 1e-9);

  Vec4 plus = Vec4::Zero();
  plus(0) = plus(1) = 1.0 / std::sqrt(2.0);
  const auto coh = apply_channel(DensityMatrix4::pure(plus), ch);
  EXPECT_NEAR(std::abs(coh.matrix()(0, 1)), 0.5 * std::exp(-0.398 / 53), 1e-12);
}

TEST(Decoherence, TracePreservationOnRandomStates) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(1.0, 400.0), d(0.0, 2000.0);
  for (int i = 0; i < 10000; ++i) {
    const double t1a = u(rng), t1b = u(rng);
    std::uniform_real_distribution<double> ua(1.0, 2 * t1a), ub(1.0, 2 * t1b);
    const auto ch = decoherence_channel(t1a, ua(rng), d(rng), t1b, ub(rng), d(rng));
    const auto out = apply_channel(DensityMatrix4::pure(random_state(rng)), ch);
    ASSERT_NEAR(out.matrix().trace().real(), 1.0, 1e-10);
  }
}

TEST(Channels, IdentityAndFullDepolarizing) {
  std::mt19937_64 rng(2);
  const auto rho = DensityMatrix4::pure(random_state(rng));
  EXPECT_LT(max_abs(apply_channel(rho, KrausChannel::identity()).matrix() - rho.matrix()), 1e-15);
  const auto mixed = apply_channel(rho, depolarizing_channel(1.0));
  EXPECT_LT(max_abs(mixed.matrix() - 0.25 * Mat4::Identity()), 1e-14);
  EXPECT_THROW(depolarizing_channel(1.5), ValidationError);
}

TEST(Channels, KrausCompletenessChecked) {
  EXPECT_THROW(KrausChannel::from_operators({Mat4(0.5 * Mat4::Identity())}), ValidationError);
  EXPECT_THROW(KrausChannel::from_operators({}), ValidationError);
}

TEST(DensityMatrix4, Invariants) {
  Mat4 m = Mat4::Zero();
  m(0, 0) = 0.5;
  EXPECT_THROW(DensityMatrix4::from_matrix(m), ValidationError);
  m(0, 0) = 1.5;
  m(1, 1) = -0.5;
  EXPECT_THROW(DensityMatrix4::from_matrix(m), ValidationError);
  EXPECT_THROW(DensityMatrix4::basis(4), ValidationError);
}

TEST(WrapAngle, Range) {
  for (double x : {-10.0, -kPi, -1.0, 0.0, 2.0, kPi, 7.5, 100.0}) {
    const double w = wrap_angle(x);
    EXPECT_GT(w, -kPi - 1e-12);
    EXPECT_LE(w, kPi + 1e-12);
    EXPECT_NEAR(std::remainder(w - x, 2 * kPi), 0.0, 1e-12);
  }
}
