#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace framewright {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;

inline constexpr double kPi = 3.14159265358979323846;
// MHz -> rad/ns.
inline constexpr double kTwoPiMHz = 2.0 * kPi * 1e-3;

namespace linalg {

namespace pauli {
Mat2 I();
Mat2 X();
Mat2 Y();
Mat2 Z();
} // namespace pauli

Mat4 kron(const Mat2 &a, const Mat2 &b);

// exp(-i theta P / 2)
Mat2 rz(double theta);
Mat2 rx(double theta);
Mat2 ry(double theta);
// Rotation by theta about the equatorial axis cos(phi) X + sin(phi) Y.
Mat2 rxy(double theta, double phi);

bool is_unitary(const Mat2 &m, double tol = 1e-12);
bool is_unitary(const Mat4 &m, double tol = 1e-12);

// (Z(a) (x) Z(b))
Mat4 zz_layer(double a, double b);

class Unitary4 {
public:
  Unitary4() : m_(Mat4::Identity()) {}

  static Unitary4 identity() { return Unitary4(); }
  // Throws ValidationError if m is not unitary within tol.
  static Unitary4 from_matrix(const Mat4 &m, double tol = 1e-12);
  // Result of long numerical integrations: checked loosely, then polar-projected
  // back onto the unitary group.
  static Unitary4 project(const Mat4 &m, double tol = 1e-7);
  static Unitary4 kron(const Mat2 &a, const Mat2 &b);

  const Mat4 &matrix() const noexcept { return m_; }
  cplx operator()(int r, int c) const { return m_(r, c); }

  Unitary4 adjoint() const;
  Unitary4 operator*(const Unitary4 &o) const;

private:
  explicit Unitary4(const Mat4 &m) : m_(m) {}
  Mat4 m_;
};

class Hermitian4 {
public:
  Hermitian4() : m_(Mat4::Zero()) {}
  static Hermitian4 from_matrix(const Mat4 &m, double tol = 1e-12);
  static Hermitian4 zero() { return Hermitian4(); }

  const Mat4 &matrix() const noexcept { return m_; }

  Hermitian4 operator+(const Hermitian4 &o) const;
  Hermitian4 operator*(double s) const;

  // Real coefficient of the Pauli product P_a (x) P_b, a,b in {0:I,1:X,2:Y,3:Z}.
  double pauli_coefficient(int a, int b) const;

private:
  explicit Hermitian4(const Mat4 &m) : m_(m) {}
  Mat4 m_;
};

// Sum_{ab} c[a][b] P_a (x) P_b.
Hermitian4 from_paulis(const std::array<std::array<double, 4>, 4> &c);

class KrausChannel;

class DensityMatrix4 {
public:
  DensityMatrix4();
  static DensityMatrix4 from_matrix(const Mat4 &m, double tol = 1e-10);
  static DensityMatrix4 pure(const Vec4 &psi);
  static DensityMatrix4 basis(int k);

  const Mat4 &matrix() const noexcept { return m_; }
  double population(int k) const { return m_(k, k).real(); }

  DensityMatrix4 evolved(const Unitary4 &u) const;

private:
  explicit DensityMatrix4(const Mat4 &m) : m_(m) {}
  friend DensityMatrix4 apply_channel(const DensityMatrix4 &, const KrausChannel &);
  Mat4 m_;
};

class KrausChannel {
public:
  static KrausChannel from_operators(std::vector<Mat4> ops, double tol = 1e-10);
  static KrausChannel identity();
  // Product channel from single-qubit Kraus sets (qubit 0 left).
  static KrausChannel tensor(const std::vector<Mat2> &k0, const std::vector<Mat2> &k1);

  const std::vector<Mat4> &operators() const noexcept { return ops_; }

private:
  explicit KrausChannel(std::vector<Mat4> ops) : ops_(std::move(ops)) {}
  std::vector<Mat4> ops_;
};

// exp(-i h t). h in rad/ns, t in ns.
Unitary4 expm_hermitian(const Hermitian4 &h, double t);

double average_gate_fidelity(const Unitary4 &u, const Unitary4 &v);

struct PhaseFit {
  double infidelity = 1.0;
  // (a, b, c, d) such that (Z(a) (x) Z(b)) u (Z(c) (x) Z(d)) ~ target.
  std::array<double, 4> phases{};
};

struct PhaseSearchOptions {
  int grid = 32;
  double tol = 1e-12;
  int max_sweeps = 500;
  // Skips the coarse grid; used by optimizers that call this repeatedly.
  std::optional<std::array<double, 4>> warm_start;
};

PhaseFit phase_optimized_distance(const Unitary4 &u, const Unitary4 &target,
                                  const PhaseSearchOptions &opt = {});

// Single-qubit T1/T2 channel (amplitude damping then pure dephasing).
std::vector<Mat2> qubit_decoherence(double t1_us, double t2_us, double duration_ns);

KrausChannel decoherence_channel(double t1_us, double t2_us, double duration_ns);
KrausChannel decoherence_channel(double t1_q0, double t2_q0, double dur_q0,
                                 double t1_q1, double t2_q1, double dur_q1);

// rho -> (1 - p) rho + p I/4
KrausChannel depolarizing_channel(double p);
// Single-qubit depolarizing set, rho -> (1 - p) rho + p I/2.
std::vector<Mat2> qubit_depolarizing(double p);

DensityMatrix4 apply_channel(const DensityMatrix4 &rho, const KrausChannel &ch);

double wrap_angle(double x);

} // namespace linalg
} // namespace framewright
