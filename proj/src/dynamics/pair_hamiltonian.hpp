#pragma once

#include <array>
#include <vector>

#include "framewright/dynamics.hpp"

namespace framewright::dynamics::detail {

// H(t) of two exchange-coupled two-level qubits under drives, in a rotating frame
// with per-qubit frame frequencies. Units rad/ns; t is program time, the frame phase
// and drive phases use t_offset + t.
class PairHamiltonian {
public:
  PairHamiltonian(const DeviceModel &dev, std::array<std::size_t, 2> qubits,
                  const Waveform &wf, std::array<double, 2> frame_mhz, double t_offset);

  Mat4 at(double t) const;
  // Sorted times in [0, T] where H(t) or its derivatives jump.
  std::vector<double> breakpoints() const;
  // True if H is constant on (a, b).
  bool constant_on(double a, double b) const;
  // Logical-frame rotation expressed in this frame at time t.
  Mat4 rotation(const IdealRotation &r) const;

  double duration() const { return wf_.duration_ns; }
  const Waveform &waveform() const { return wf_; }

private:
  int slot(std::size_t channel) const;

  Waveform wf_;
  std::array<std::size_t, 2> qubits_;
  std::array<double, 2> frame_;
  std::array<double, 2> fq_;
  std::vector<int> seg_slot_;
  double j_ = 0.0;
  double t_offset_ = 0.0;
  Mat4 h_static_;
};

// exp(-i h) for Hermitian h of modest norm.
Mat4 expm_i(const Mat4 &h);

// Fourth-order Magnus step over [t, t + dt].
Mat4 magnus_step(const PairHamiltonian &h, double t, double dt);

} // namespace framewright::dynamics::detail
