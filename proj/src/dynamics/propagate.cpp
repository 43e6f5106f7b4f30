#include <algorithm>
#include <cmath>

#include "framewright/error.hpp"
#include "pair_hamiltonian.hpp"

namespace framewright::dynamics {

using namespace linalg;
using detail::PairHamiltonian;

namespace {

// Integrates H over [0, T]. Rotations fire when their time is reached (before any
// checkpoint at the same time). snaps receives the propagator at each checkpoint.
Mat4 propagate(const PairHamiltonian &h, double dt, bool exact_constant,
               std::span<const double> checkpoints, std::vector<Mat4> *snaps) {
  if (!(dt > 0))
    throw ValidationError("time step must be positive");
  std::vector<double> bp = h.breakpoints();
  for (double c : checkpoints) {
    if (c < -1e-9 || c > h.duration() + 1e-9)
      throw ValidationError("checkpoint outside the waveform window");
    bp.push_back(std::clamp(c, 0.0, h.duration()));
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end(), [](double a, double b) { return b - a <= 1e-9; }),
           bp.end());

  const auto &rots = h.waveform().rotations;
  std::vector<std::size_t> order(rots.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rots[a].time_ns < rots[b].time_ns; });
  std::size_t next_rot = 0;

  std::vector<std::size_t> cp_order(checkpoints.size());
  for (std::size_t i = 0; i < cp_order.size(); ++i)
    cp_order[i] = i;
  std::stable_sort(cp_order.begin(), cp_order.end(),
                   [&](std::size_t a, std::size_t b) { return checkpoints[a] < checkpoints[b]; });
  std::size_t next_cp = 0;
  if (snaps)
    snaps->assign(checkpoints.size(), Mat4::Identity());

  Mat4 u = Mat4::Identity();
  auto fire = [&](double t) {
    while (next_rot < order.size() && rots[order[next_rot]].time_ns <= t + 1e-9) {
      u = h.rotation(rots[order[next_rot]]) * u;
      ++next_rot;
    }
    while (next_cp < cp_order.size() && checkpoints[cp_order[next_cp]] <= t + 1e-9) {
      if (snaps)
        (*snaps)[cp_order[next_cp]] = u;
      ++next_cp;
    }
  };

  fire(bp.front());
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double a = bp[i], b = bp[i + 1];
    const double len = b - a;
    if (exact_constant && h.constant_on(a, b)) {
      u = detail::expm_i(h.at(0.5 * (a + b)) * len) * u;
    } else {
      const int n = std::max(1, static_cast<int>(std::ceil(len / dt - 1e-9)));
      const double step = len / n;
      for (int k = 0; k < n; ++k)
        u = detail::magnus_step(h, a + k * step, step) * u;
    }
    fire(b);
  }
  return u;
}

Waveform from_segments(std::span<const DriveSegment> segments) {
  Waveform wf;
  wf.segments.assign(segments.begin(), segments.end());
  for (const auto &s : wf.segments)
    wf.duration_ns = std::max(wf.duration_ns, s.end_ns());
  return wf;
}

std::array<double, 2> logical_frames(const DeviceModel &dev, std::array<std::size_t, 2> q) {
  return {dev.qubit(q[0]).f01_mhz(), dev.qubit(q[1]).f01_mhz()};
}

} // namespace

Unitary4 reference_evolve(const DeviceModel &dev, std::array<std::size_t, 2> qubits,
                          std::span<const DriveSegment> segments, double t_start,
                          StepOptions opt) {
  return reference_evolve(dev, qubits, from_segments(segments), t_start, opt);
}

Unitary4 reference_evolve(const DeviceModel &dev, std::array<std::size_t, 2> qubits,
                          const Waveform &wf, double t_start, StepOptions opt) {
  PairHamiltonian h(dev, qubits, wf, logical_frames(dev, qubits), t_start);
  return Unitary4::project(propagate(h, opt.dt, false, {}, nullptr));
}

Unitary4 frame_evolve(const DeviceModel &dev, std::array<std::size_t, 2> qubits,
                      const Waveform &wf, std::array<double, 2> frame_mhz, StepOptions opt) {
  PairHamiltonian h(dev, qubits, wf, frame_mhz, 0.0);
  return Unitary4::project(propagate(h, opt.dt, true, {}, nullptr));
}

std::vector<Vec4> reference_trajectory(const DeviceModel &dev, std::array<std::size_t, 2> qubits,
                                       const Waveform &wf, const Vec4 &psi0,
                                       std::span<const double> checkpoints, double t_start,
                                       StepOptions opt) {
  PairHamiltonian h(dev, qubits, wf, logical_frames(dev, qubits), t_start);
  std::vector<Mat4> snaps;
  propagate(h, opt.dt, false, checkpoints, &snaps);
  std::vector<Vec4> out;
  out.reserve(snaps.size());
  for (const auto &u : snaps)
    out.push_back(u * psi0);
  return out;
}

} // namespace framewright::dynamics
