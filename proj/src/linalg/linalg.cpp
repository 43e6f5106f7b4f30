#include "framewright/linalg.hpp"

#include <cmath>
#include <limits>

#include "framewright/error.hpp"

namespace framewright::linalg {

namespace pauli {
Mat2 I() { return Mat2::Identity(); }
Mat2 X() {
  Mat2 m;
  m << 0, 1, 1, 0;
  return m;
}
Mat2 Y() {
  Mat2 m;
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
Mat2 Z() {
  Mat2 m;
  m << 1, 0, 0, -1;
  return m;
}
} // namespace pauli

Mat4 kron(const Mat2 &a, const Mat2 &b) {
  Mat4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Mat2 rz(double theta) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = std::polar(1.0, -theta / 2);
  m(1, 1) = std::polar(1.0, theta / 2);
  return m;
}

Mat2 rxy(double theta, double phi) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Mat2 m;
  m(0, 0) = c;
  m(1, 1) = c;
  m(0, 1) = cplx(0, -s) * std::polar(1.0, -phi);
  m(1, 0) = cplx(0, -s) * std::polar(1.0, phi);
  return m;
}

Mat2 rx(double theta) { return rxy(theta, 0.0); }
Mat2 ry(double theta) { return rxy(theta, kPi / 2); }

bool is_unitary(const Mat2 &m, double tol) {
  return ((m.adjoint() * m - Mat2::Identity()).cwiseAbs().maxCoeff() <= tol);
}

bool is_unitary(const Mat4 &m, double tol) {
  return ((m.adjoint() * m - Mat4::Identity()).cwiseAbs().maxCoeff() <= tol);
}

Mat4 zz_layer(double a, double b) {
  Mat4 m = Mat4::Zero();
  const cplx za[2] = {std::polar(1.0, -a / 2), std::polar(1.0, a / 2)};
  const cplx zb[2] = {std::polar(1.0, -b / 2), std::polar(1.0, b / 2)};
  for (int i = 0; i < 4; ++i)
    m(i, i) = za[i >> 1] * zb[i & 1];
  return m;
}

Unitary4 Unitary4::from_matrix(const Mat4 &m, double tol) {
  if (!m.allFinite() || !is_unitary(m, tol))
    throw ValidationError("matrix is not unitary");
  return Unitary4(m);
}

Unitary4 Unitary4::project(const Mat4 &m, double tol) {
  if (!m.allFinite() || !is_unitary(m, tol))
    throw NumericalError("integrated propagator drifted from unitarity");
  Eigen::JacobiSVD<Mat4> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return Unitary4(svd.matrixU() * svd.matrixV().adjoint());
}

Unitary4 Unitary4::kron(const Mat2 &a, const Mat2 &b) {
  return from_matrix(linalg::kron(a, b));
}

Unitary4 Unitary4::adjoint() const { return Unitary4(m_.adjoint()); }

Unitary4 Unitary4::operator*(const Unitary4 &o) const { return Unitary4(m_ * o.m_); }

Hermitian4 Hermitian4::from_matrix(const Mat4 &m, double tol) {
  if (!m.allFinite() || (m - m.adjoint()).cwiseAbs().maxCoeff() > tol)
    throw ValidationError("matrix is not Hermitian");
  return Hermitian4(0.5 * (m + m.adjoint()));
}

Hermitian4 Hermitian4::operator+(const Hermitian4 &o) const { return Hermitian4(m_ + o.m_); }

Hermitian4 Hermitian4::operator*(double s) const { return Hermitian4(m_ * s); }

namespace {
const Mat2 &pauli_at(int k) {
  static const Mat2 p[4] = {pauli::I(), pauli::X(), pauli::Y(), pauli::Z()};
  return p[k];
}
} // namespace

double Hermitian4::pauli_coefficient(int a, int b) const {
  return (kron(pauli_at(a), pauli_at(b)) * m_).trace().real() / 4.0;
}

Hermitian4 from_paulis(const std::array<std::array<double, 4>, 4> &c) {
  Mat4 m = Mat4::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if (c[a][b] != 0.0)
        m += c[a][b] * kron(pauli_at(a), pauli_at(b));
  return Hermitian4::from_matrix(m);
}

DensityMatrix4::DensityMatrix4() : m_(Mat4::Zero()) { m_(0, 0) = 1.0; }

DensityMatrix4 DensityMatrix4::from_matrix(const Mat4 &m, double tol) {
  if (!m.allFinite())
    throw ValidationError("density matrix has non-finite entries");
  if (std::abs(m.trace() - cplx(1.0)) > tol)
    throw ValidationError("density matrix trace differs from 1");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol)
    throw ValidationError("density matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol)
    throw ValidationError("density matrix has negative eigenvalue");
  return DensityMatrix4(m);
}

DensityMatrix4 DensityMatrix4::pure(const Vec4 &psi) {
  const double n = psi.norm();
  if (!(n > 0))
    throw ValidationError("zero state vector");
  const Vec4 v = psi / n;
  return DensityMatrix4(v * v.adjoint());
}

DensityMatrix4 DensityMatrix4::basis(int k) {
  if (k < 0 || k > 3)
    throw ValidationError("basis index out of range");
  Mat4 m = Mat4::Zero();
  m(k, k) = 1.0;
  return DensityMatrix4(m);
}

DensityMatrix4 DensityMatrix4::evolved(const Unitary4 &u) const {
  return DensityMatrix4(u.matrix() * m_ * u.matrix().adjoint());
}

KrausChannel KrausChannel::from_operators(std::vector<Mat4> ops, double tol) {
  if (ops.empty())
    throw ValidationError("channel needs at least one Kraus operator");
  Mat4 s = Mat4::Zero();
  for (const auto &k : ops)
    s += k.adjoint() * k;
  if ((s - Mat4::Identity()).cwiseAbs().maxCoeff() > tol)
    throw ValidationError("Kraus operators are not trace preserving");
  return KrausChannel(std::move(ops));
}

KrausChannel KrausChannel::identity() { return KrausChannel({Mat4::Identity()}); }

KrausChannel KrausChannel::tensor(const std::vector<Mat2> &k0, const std::vector<Mat2> &k1) {
  std::vector<Mat4> ops;
  ops.reserve(k0.size() * k1.size());
  for (const auto &a : k0)
    for (const auto &b : k1)
      ops.push_back(kron(a, b));
  return from_operators(std::move(ops));
}

Unitary4 expm_hermitian(const Hermitian4 &h, double t) {
  if (!(t >= 0.0))
    throw ValidationError("expm_hermitian: negative duration");
  Eigen::SelfAdjointEigenSolver<Mat4> es(h.matrix());
  const auto &w = es.eigenvalues();
  const auto &v = es.eigenvectors();
  Eigen::Vector4cd ph;
  for (int i = 0; i < 4; ++i)
    ph(i) = std::polar(1.0, -w(i) * t);
  return Unitary4::project(v * ph.asDiagonal() * v.adjoint(), 1e-10);
}

double average_gate_fidelity(const Unitary4 &u, const Unitary4 &v) {
  const double tr = std::norm((u.matrix().adjoint() * v.matrix()).trace());
  return (tr + 4.0) / 20.0;
}

double wrap_angle(double x) {
  double y = std::fmod(x + kPi, 2 * kPi);
  if (y < 0)
    y += 2 * kPi;
  return y - kPi;
}

namespace {

// Tr(T^dag D(a,b) U D(c,d)) = sum_jk W_jk p_j q_k with W = conj(T) .* U.
struct TraceForm {
  Mat4 w;
  static cplx phase(double a, double b, int j) {
    const double sa = (j >> 1) ? 0.5 : -0.5;
    const double sb = (j & 1) ? 0.5 : -0.5;
    return std::polar(1.0, sa * a + sb * b);
  }
  cplx value(const std::array<double, 4> &x) const {
    cplx s = 0.0;
    for (int j = 0; j < 4; ++j) {
      const cplx pj = phase(x[0], x[1], j);
      for (int k = 0; k < 4; ++k)
        s += w(j, k) * pj * phase(x[2], x[3], k);
    }
    return s;
  }
};

double fid_from_trace(cplx tr) { return (std::norm(tr) + 4.0) / 20.0; }

} // namespace

PhaseFit phase_optimized_distance(const Unitary4 &u, const Unitary4 &target,
                                  const PhaseSearchOptions &opt) {
  TraceForm f{target.matrix().conjugate().cwiseProduct(u.matrix())};
  std::array<double, 4> x{};
  if (opt.warm_start) {
    x = *opt.warm_start;
  } else {
    const int n = std::max(opt.grid, 4);
    // Precompute per-axis phase tables; the sum factorizes over (a,b) and (c,d).
    std::vector<std::array<cplx, 4>> tab(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < 4; ++j)
          tab[static_cast<size_t>(i) * n + k][j] =
              TraceForm::phase(2 * kPi * i / n, 2 * kPi * k / n, j);
    double best = -1.0;
    size_t bl = 0, br = 0;
    for (size_t l = 0; l < tab.size(); ++l) {
      cplx row[4];
      for (int k = 0; k < 4; ++k) {
        row[k] = 0.0;
        for (int j = 0; j < 4; ++j)
          row[k] += tab[l][j] * f.w(j, k);
      }
      for (size_t r = 0; r < tab.size(); ++r) {
        const cplx s = row[0] * tab[r][0] + row[1] * tab[r][1] + row[2] * tab[r][2] +
                       row[3] * tab[r][3];
        const double v = std::norm(s);
        if (v > best) {
          best = v;
          bl = l;
          br = r;
        }
      }
    }
    x = {2 * kPi * static_cast<double>(bl / n) / n, 2 * kPi * static_cast<double>(bl % n) / n,
         2 * kPi * static_cast<double>(br / n) / n, 2 * kPi * static_cast<double>(br % n) / n};
  }

  // Each phase enters as alpha e^{-i x/2} + beta e^{i x/2}; maximize |.| in closed form.
  double prev = std::norm(f.value(x));
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    for (int axis = 0; axis < 4; ++axis) {
      std::array<double, 4> y = x;
      y[axis] = 0.0;
      const cplx v0 = f.value(y);
      y[axis] = kPi;
      const cplx vpi = f.value(y);
      // v(0) = alpha + beta, v(pi) = -i alpha + i beta
      const cplx alpha = 0.5 * (v0 + cplx(0, 1) * vpi);
      const cplx beta = 0.5 * (v0 - cplx(0, 1) * vpi);
      x[axis] = std::arg(alpha * std::conj(beta));
      // |alpha e^{-ix/2} + beta e^{ix/2}|^2 = |a|^2+|b|^2 + 2 Re(a conj(b) e^{-ix})
    }
    const double cur = std::norm(f.value(x));
    if (std::abs(cur - prev) <= opt.tol * 16.0) {
      prev = cur;
      break;
    }
    prev = cur;
  }
  PhaseFit out;
  out.infidelity = std::max(0.0, 1.0 - fid_from_trace(f.value(x)));
  for (int i = 0; i < 4; ++i)
    out.phases[i] = wrap_angle(x[i]);
  return out;
}

std::vector<Mat2> qubit_decoherence(double t1_us, double t2_us, double duration_ns) {
  if (!(t1_us > 0) || !(t2_us > 0))
    throw ValidationError("coherence times must be positive");
  if (!(duration_ns >= 0))
    throw ValidationError("negative channel duration");
  if (!std::isinf(t1_us) && t2_us > 2.0 * t1_us * (1 + 1e-12))
    throw ValidationError("unphysical coherence: T2 exceeds 2*T1");
  const double t = duration_ns * 1e-3;
  const double gamma = std::isinf(t1_us) ? 0.0 : 1.0 - std::exp(-t / t1_us);
  double inv_tphi = (std::isinf(t2_us) ? 0.0 : 1.0 / t2_us) -
                    (std::isinf(t1_us) ? 0.0 : 0.5 / t1_us);
  inv_tphi = std::max(inv_tphi, 0.0);
  const double lam = std::exp(-t * inv_tphi);

  Mat2 a0 = Mat2::Zero(), a1 = Mat2::Zero();
  a0(0, 0) = 1.0;
  a0(1, 1) = std::sqrt(1.0 - gamma);
  a1(0, 1) = std::sqrt(gamma);
  const double pi_ = std::sqrt((1.0 + lam) / 2.0), pz = std::sqrt((1.0 - lam) / 2.0);
  std::vector<Mat2> ops;
  for (const Mat2 &a : {a0, a1}) {
    for (const auto &[w, p] : {std::pair{pi_, pauli::I()}, std::pair{pz, pauli::Z()}}) {
      Mat2 k = w * p * a;
      if (k.cwiseAbs().maxCoeff() > 0)
        ops.push_back(k);
    }
  }
  return ops;
}

KrausChannel decoherence_channel(double t1_us, double t2_us, double duration_ns) {
  return decoherence_channel(t1_us, t2_us, duration_ns, t1_us, t2_us, duration_ns);
}

KrausChannel decoherence_channel(double t1_q0, double t2_q0, double dur_q0, double t1_q1,
                                 double t2_q1, double dur_q1) {
  return KrausChannel::tensor(qubit_decoherence(t1_q0, t2_q0, dur_q0),
                              qubit_decoherence(t1_q1, t2_q1, dur_q1));
}

KrausChannel depolarizing_channel(double p) {
  if (!(p >= 0.0 && p <= 16.0 / 15.0))
    throw ValidationError("depolarizing parameter out of range");
  std::vector<Mat4> ops;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double w = (a == 0 && b == 0) ? std::sqrt(1.0 - 15.0 * p / 16.0) : std::sqrt(p / 16.0);
      if (w > 0)
        ops.push_back(w * kron(pauli_at(a), pauli_at(b)));
    }
  return KrausChannel::from_operators(std::move(ops));
}

std::vector<Mat2> qubit_depolarizing(double p) {
  if (!(p >= 0.0 && p <= 4.0 / 3.0))
    throw ValidationError("depolarizing parameter out of range");
  std::vector<Mat2> ops{std::sqrt(1.0 - 3.0 * p / 4.0) * pauli::I()};
  if (p > 0)
    for (int k = 1; k < 4; ++k)
      ops.push_back(std::sqrt(p / 4.0) * pauli_at(k));
  return ops;
}

DensityMatrix4 apply_channel(const DensityMatrix4 &rho, const KrausChannel &ch) {
  Mat4 out = Mat4::Zero();
  for (const auto &k : ch.operators())
    out.noalias() += k * rho.matrix() * k.adjoint();
  return DensityMatrix4(out);
}

} // namespace framewright::linalg
