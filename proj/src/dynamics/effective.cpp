#include <algorithm>
#include <cmath>

#include "framewright/error.hpp"
#include "pair_hamiltonian.hpp"

namespace framewright::dynamics {

using namespace linalg;

namespace {
Mat4 pp(int a, int b) {
  static const Mat2 p[4] = {pauli::I(), pauli::X(), pauli::Y(), pauli::Z()};
  return kron(p[a], p[b]);
}
constexpr int I = 0, X = 1, Y = 2, Z = 3;
} // namespace

Hermitian4 EffectiveModel::at(double omega, double quad) const {
  Mat4 h = Mat4::Zero();
  if (kind == Kind::OnResonant) {
    h += 0.5 * omega * (pp(X, I) + mu * pp(Z, X));
    h += 0.5 * quad * (pp(Y, I) + mu * pp(Z, Y));
    h += -0.5 * delta_mhz * pp(I, Z);
    h += crosstalk.ix_mhz * pp(I, X) + crosstalk.zz_mhz * pp(Z, Z);
  } else {
    const double op = std::hypot(omega, lambda_mhz);
    const double s = lambda_mhz < 0 ? -1.0 : 1.0;
    h += 0.5 * s * op * pp(Z, I);
    h += -0.5 * (delta_mhz - lambda_mhz) * pp(I, Z);
    if (op > 0) {
      h += -mu * omega * lambda_mhz / (2 * op) * pp(X, X);
      h += mu * omega * omega / (2 * op) * pp(Z, X);
    }
  }
  return Hermitian4::from_matrix(kTwoPiMHz * h);
}

EffectiveModel effective_hamiltonian_onres(const DeviceModel &dev, std::size_t driven,
                                           std::size_t idle, double omega, Crosstalk xt) {
  const auto pp_ = device::pair_parameters(dev, driven, idle);
  EffectiveModel m;
  m.kind = EffectiveModel::Kind::OnResonant;
  m.omega_mhz = omega;
  m.delta_mhz = pp_.delta_mhz;
  m.mu = pp_.mu;
  m.crosstalk = xt;
  m.frame_offsets = {0.0, pp_.delta_mhz};
  m.hamiltonian = m.at(omega);
  return m;
}

EffectiveModel effective_hamiltonian_stark(const DeviceModel &dev, std::size_t driven,
                                           std::size_t idle, double omega, double lambda) {
  if (lambda == 0.0)
    throw ValidationError("Stark model needs a nonzero detuning; use the on-resonant model");
  const auto pp_ = device::pair_parameters(dev, driven, idle);
  EffectiveModel m;
  m.kind = EffectiveModel::Kind::Stark;
  m.omega_mhz = omega;
  m.lambda_mhz = lambda;
  m.delta_mhz = pp_.delta_mhz;
  m.mu = pp_.mu;
  m.frame_offsets = {-lambda, pp_.delta_mhz - lambda};
  m.hamiltonian = m.at(omega);
  return m;
}

Unitary4 evolve_effective(const EffectiveModel &model, const PulseEnvelope &env, double dt) {
  if (!(dt > 0))
    throw ValidationError("time step must be positive");
  const double T = env.duration();
  const double peak = env.amplitude_mhz;
  auto h_at = [&](double t) -> Mat4 {
    cplx e = peak > 0 ? device::envelope_sample(env, t) / peak : cplx(0.0);
    e *= std::polar(1.0, env.phase_rad);
    if (model.kind == EffectiveModel::Kind::OnResonant)
      return model.at(model.omega_mhz * e.real(), model.omega_mhz * e.imag()).matrix();
    return model.at(model.omega_mhz * e.real()).matrix();
  };
  static const double c = std::sqrt(3.0) / 6.0;
  std::vector<double> bp{0.0, env.flat_start(), env.flat_end(), T};
  std::sort(bp.begin(), bp.end());
  Mat4 u = Mat4::Identity();
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double a = bp[i], b = bp[i + 1];
    if (b - a <= 1e-12)
      continue;
    const bool flat = env.shape == device::Shape::Square ||
                      (a >= env.flat_start() - 1e-12 && b <= env.flat_end() + 1e-12);
    if (flat) {
      u = detail::expm_i(h_at(0.5 * (a + b)) * (b - a)) * u;
      continue;
    }
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / dt - 1e-9)));
    const double step = (b - a) / n;
    for (int k = 0; k < n; ++k) {
      const double t = a + k * step;
      const Mat4 h1 = h_at(t + (0.5 - c) * step), h2 = h_at(t + (0.5 + c) * step);
      const Mat4 om = 0.5 * step * (h1 + h2) -
                      cplx(0, std::sqrt(3.0) / 12.0) * step * step * (h2 * h1 - h1 * h2);
      u = detail::expm_i(om) * u;
    }
  }
  return Unitary4::project(u);
}

} // namespace framewright::dynamics
