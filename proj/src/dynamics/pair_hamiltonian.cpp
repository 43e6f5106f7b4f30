#include "pair_hamiltonian.hpp"

#include <algorithm>
#include <cmath>

#include "framewright/error.hpp"

namespace framewright::dynamics::detail {

using namespace linalg;

PairHamiltonian::PairHamiltonian(const DeviceModel &dev, std::array<std::size_t, 2> qubits,
                                 const Waveform &wf, std::array<double, 2> frame_mhz,
                                 double t_offset)
    : wf_(wf), qubits_(qubits), frame_(frame_mhz), t_offset_(t_offset) {
  if (qubits[0] == qubits[1])
    throw ValidationError("pair needs two distinct qubits");
  for (int k = 0; k < 2; ++k)
    fq_[k] = dev.qubit(qubits[k]).f01_mhz();
  j_ = dev.coupling(qubits[0], qubits[1]).value_or(0.0);
  for (const auto &s : wf_.segments) {
    seg_slot_.push_back(slot(s.channel));
    if (s.end_ns() > wf_.duration_ns + 1e-9)
      wf_.duration_ns = s.end_ns();
  }
  for (const auto &r : wf_.rotations) {
    slot(r.channel);
    if (r.time_ns > wf_.duration_ns + 1e-9 || r.time_ns < -1e-9)
      throw ValidationError("ideal rotation outside the waveform window");
  }
  h_static_ = Mat4::Zero();
  h_static_ += 0.5 * kTwoPiMHz * (fq_[0] - frame_[0]) * kron(pauli::Z(), pauli::I());
  h_static_ += 0.5 * kTwoPiMHz * (fq_[1] - frame_[1]) * kron(pauli::I(), pauli::Z());
}

int PairHamiltonian::slot(std::size_t channel) const {
  if (channel == qubits_[0])
    return 0;
  if (channel == qubits_[1])
    return 1;
  throw ValidationError("drive channel " + std::to_string(channel) + " not in the simulated pair");
}

Mat4 PairHamiltonian::at(double t) const {
  Mat4 h = h_static_;
  const double ta = t_offset_ + t;
  if (j_ != 0.0) {
    const cplx e = kTwoPiMHz * j_ * std::polar(1.0, kTwoPiMHz * (frame_[0] - frame_[1]) * ta);
    h(1, 2) += e;
    h(2, 1) += std::conj(e);
  }
  for (std::size_t i = 0; i < wf_.segments.size(); ++i) {
    const auto &s = wf_.segments[i];
    if (t < s.start_ns || t > s.end_ns())
      continue;
    const int k = seg_slot_[i];
    const double phi =
        s.envelope.phase_rad - kTwoPiMHz * (frame_[k] - s.drive_freq_mhz) * ta;
    // Omega/2 (Re E X + Im E Y) = Omega/2 [[0, conj(E)], [E, 0]]
    const cplx e = 0.5 * kTwoPiMHz * device::envelope_sample(s.envelope, t - s.start_ns) *
                   std::polar(1.0, phi);
    if (k == 0) {
      h(0, 2) += std::conj(e);
      h(1, 3) += std::conj(e);
      h(2, 0) += e;
      h(3, 1) += e;
    } else {
      h(0, 1) += std::conj(e);
      h(2, 3) += std::conj(e);
      h(1, 0) += e;
      h(3, 2) += e;
    }
  }
  return h;
}

std::vector<double> PairHamiltonian::breakpoints() const {
  std::vector<double> b{0.0, wf_.duration_ns};
  for (const auto &s : wf_.segments) {
    b.push_back(s.start_ns);
    b.push_back(s.end_ns());
    b.push_back(s.start_ns + s.envelope.flat_start());
    b.push_back(s.start_ns + s.envelope.flat_end());
  }
  for (const auto &r : wf_.rotations)
    b.push_back(r.time_ns);
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double x : b) {
    x = std::clamp(x, 0.0, wf_.duration_ns);
    if (out.empty() || x - out.back() > 1e-9)
      out.push_back(x);
  }
  return out;
}

bool PairHamiltonian::constant_on(double a, double b) const {
  if (j_ != 0.0 && frame_[0] != frame_[1])
    return false;
  for (std::size_t i = 0; i < wf_.segments.size(); ++i) {
    const auto &s = wf_.segments[i];
    if (b <= s.start_ns + 1e-9 || a >= s.end_ns() - 1e-9)
      continue;
    if (frame_[seg_slot_[i]] != s.drive_freq_mhz)
      return false;
    if (s.envelope.shape == device::Shape::Square)
      continue;
    const double fs = s.start_ns + s.envelope.flat_start();
    const double fe = s.start_ns + s.envelope.flat_end();
    if (a < fs - 1e-9 || b > fe + 1e-9)
      return false;
  }
  return true;
}

Mat4 PairHamiltonian::rotation(const IdealRotation &r) const {
  const int k = slot(r.channel);
  // F(t)^dag R F(t) with F = Z(2 pi o t): shifts the rotation axis by -2 pi o t.
  const double off = frame_[k] - fq_[k];
  const Mat2 rr = rxy(r.theta, r.phi - kTwoPiMHz * off * (t_offset_ + r.time_ns));
  return k == 0 ? kron(rr, pauli::I()) : kron(pauli::I(), rr);
}

Mat4 expm_i(const Mat4 &h) {
  // Scaling and squaring around a Taylor series of -i h.
  const double n = h.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  if (n > 0.125)
    s = static_cast<int>(std::ceil(std::log2(n / 0.125)));
  const Mat4 a = h * cplx(0, -std::ldexp(1.0, -s));
  Mat4 term = Mat4::Identity();
  Mat4 sum = Mat4::Identity();
  for (int k = 1; k <= 12; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i)
    sum = sum * sum;
  return sum;
}

Mat4 magnus_step(const PairHamiltonian &h, double t, double dt) {
  static const double c = std::sqrt(3.0) / 6.0;
  const Mat4 h1 = h.at(t + (0.5 - c) * dt);
  const Mat4 h2 = h.at(t + (0.5 + c) * dt);
  const Mat4 om = 0.5 * dt * (h1 + h2) -
                  cplx(0, std::sqrt(3.0) / 12.0) * dt * dt * (h2 * h1 - h1 * h2);
  return expm_i(om);
}

} // namespace framewright::dynamics::detail
