#include <cmath>
#include <thread>

#include "framewright/calib.hpp"
#include "framewright/error.hpp"

namespace framewright::calib {

using namespace linalg;

Step Step::gate(int q, const Mat2 &m) {
  Step s;
  s.kind = Kind::Gate;
  s.qubit = q;
  s.m = m;
  return s;
}

Step Step::z(int q, double theta) { return gate(q, rz(theta)); }

Step Step::scan(int q, double base, double sign) {
  Step s;
  s.kind = Kind::ScanZ;
  s.qubit = q;
  s.base = base;
  s.sign = sign;
  return s;
}

Step Step::cnot() {
  Step s;
  s.kind = Kind::Cnot;
  return s;
}

Step Step::under_test() {
  Step s;
  s.kind = Kind::UnderTest;
  return s;
}

GateAction frame_wrap_action(const GateInstance &in) {
  return [in](double ts) { return dynamics::frame_wrap(in, ts, ts + in.duration_ns); };
}

GateAction pulse_action(const device::DeviceModel &dev, const forge::Synthesis &s) {
  return [&dev, s](double ts) {
    return dynamics::reference_evolve(dev, s.program.qubits, s.program.waveform, ts);
  };
}

std::vector<double> default_grid(int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] = 2.0 * kPi * i / n;
  return g;
}

namespace {

Unitary4 ideal_cnot() {
  // |driven idle>; flips driven when idle is |1>.
  Mat2 p0 = Mat2::Zero(), p1 = Mat2::Zero();
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  return Unitary4::from_matrix(kron(Mat2::Identity(), p0) + kron(pauli::X(), p1));
}

Mat4 on_qubit(const Mat2 &m, int q) {
  return q == 0 ? kron(m, Mat2::Identity()) : kron(Mat2::Identity(), m);
}

double population_one(const Vec4 &psi, int q) {
  // index = 2 * driven_bit + idle_bit
  return q == 0 ? std::norm(psi(2)) + std::norm(psi(3)) : std::norm(psi(1)) + std::norm(psi(3));
}

} // namespace

RamseyScan run_ramsey(const RamseySequence &seq, std::span<const double> grid,
                      const RamseyEnv &env) {
  if (grid.size() < 16)
    throw ValidationError("run_ramsey: scan grid needs at least 16 points");
  if (seq.measured != 0 && seq.measured != 1)
    throw ValidationError("run_ramsey: measured qubit must be 0 or 1");
  int tests = 0;
  for (const auto &s : seq.steps) {
    if ((s.kind == Step::Kind::Gate || s.kind == Step::Kind::ScanZ) &&
        (s.qubit < 0 || s.qubit > 1))
      throw ValidationError("run_ramsey: step qubit out of range in " + seq.name);
    tests += s.kind == Step::Kind::UnderTest;
  }
  if (tests > 0 && !env.gate)
    throw ValidationError("run_ramsey: sequence " + seq.name + " needs a gate under test");

  const Mat4 cx = env.cnot ? env.cnot->matrix() : ideal_cnot().matrix();
  const Mat4 g = tests > 0 ? env.gate(env.t_start_ns).matrix() : Mat4::Identity();

  RamseyScan scan;
  scan.sequence = seq.name;
  scan.grid.assign(grid.begin(), grid.end());
  scan.p.assign(grid.size(), 0.0);
  auto point = [&](std::size_t i) {
    Vec4 psi = Vec4::Zero();
    psi(0) = 1.0;
    for (const auto &s : seq.steps) {
      switch (s.kind) {
      case Step::Kind::Gate:
        psi = on_qubit(s.m, s.qubit) * psi;
        break;
      case Step::Kind::ScanZ:
        psi = on_qubit(rz(s.sign * (s.base + grid[i])), s.qubit) * psi;
        break;
      case Step::Kind::Cnot:
        psi = cx * psi;
        break;
      case Step::Kind::UnderTest:
        psi = g * psi;
        break;
      }
    }
    scan.p[i] = std::clamp(population_one(psi, seq.measured), 0.0, 1.0);
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(env.threads, static_cast<unsigned>(grid.size())));
  if (nt == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i)
      point(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < grid.size(); i += nt)
          point(i);
      });
    for (auto &th : pool)
      th.join();
  }
  scan.fit = fit_cosine(scan.grid, scan.p);
  return scan;
}

CosineFit fit_cosine(std::span<const double> grid, std::span<const double> p) {
  if (grid.size() != p.size())
    throw ValidationError("fit_cosine: grid and data sizes differ");
  if (grid.size() < 16)
    throw ValidationError("fit_cosine: needs at least 16 points");
  Eigen::MatrixXd a(grid.size(), 3);
  Eigen::VectorXd y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    a(r, 0) = 1.0;
    a(r, 1) = std::cos(grid[i]);
    a(r, 2) = std::sin(grid[i]);
    y(r) = p[i];
  }
  const Eigen::Vector3d x = a.colPivHouseholderQr().solve(y);
  CosineFit f;
  f.offset = x(0);
  f.amplitude = std::hypot(x(1), x(2));
  f.phi = std::atan2(x(2), x(1));
  f.residual = std::sqrt((a * x - y).squaredNorm() / static_cast<double>(grid.size()));
  if (f.amplitude < 0.05)
    throw NumericalError("fit_cosine: no contrast", f.amplitude);
  return f;
}

CosineFit fit_cosine(const RamseyScan &scan) { return fit_cosine(scan.grid, scan.p); }

} // namespace framewright::calib
