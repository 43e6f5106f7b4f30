#include <algorithm>
#include <cmath>
#include <sstream>
#include <mutex>
#include <thread>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "framewright/dynamics.hpp"
#include "framewright/error.hpp"

namespace framewright::dynamics {

using namespace linalg;

std::string ChevronTable::to_csv() const {
  std::ostringstream os;
  os << "amplitude_mhz,duration_ns,p_transfer\n";
  for (std::size_t i = 0; i < amplitudes_mhz.size(); ++i)
    for (std::size_t j = 0; j < durations_ns.size(); ++j)
      os << fmt::format("{:.6f},{:.6f},{:.9f}\n", amplitudes_mhz[i], durations_ns[j],
                        p_transfer[i][j]);
  return os.str();
}

double ChevronTable::ridge_amplitude() const {
  double best = -1, amp = 0;
  for (std::size_t i = 0; i < amplitudes_mhz.size(); ++i) {
    const double m = *std::max_element(p_transfer[i].begin(), p_transfer[i].end());
    if (m > best) {
      best = m;
      amp = amplitudes_mhz[i];
    }
  }
  return amp;
}

namespace {

std::vector<double> transfer_row(const DeviceModel &dev, std::size_t driven, std::size_t idle,
                                 double amp, std::span<const double> durations,
                                 const SweepOptions &opt) {
  const double tmax = *std::max_element(durations.begin(), durations.end());
  const double fd = dev.qubit(driven).f01_mhz();
  const double fi = dev.qubit(idle).f01_mhz();
  const double delta = fd - fi;
  // Rotation sign that maps the resonant spectator term onto XX+YY.
  const double ys = delta < 0 ? 1.0 : -1.0;

  Waveform wf;
  wf.duration_ns = tmax;
  wf.rotations.push_back({driven, 0.0, kPi / 2, ys * kPi / 2});
  DriveSegment d;
  d.channel = driven;
  d.drive_freq_mhz = fd;
  d.envelope = device::square(tmax, amp, 0.0);
  wf.segments.push_back(d);
  if (opt.dual_drive) {
    wf.rotations.push_back({idle, 0.0, kPi / 2, -ys * kPi / 2});
    DriveSegment di = d;
    di.channel = idle;
    di.drive_freq_mhz = fi;
    di.envelope = device::square(tmax, amp * opt.idle_amplitude_ratio, 0.0);
    wf.segments.push_back(di);
  }
  Vec4 psi0 = Vec4::Zero();
  psi0(1) = 1.0; // |driven=0, idle=1>
  const auto traj = reference_trajectory(dev, {driven, idle}, wf, psi0, durations, 0.0, opt.step);

  // Closing wrappers in the logical frame; the drive is resonant so no frame phase.
  Mat4 close = kron(rxy(-kPi / 2, ys * kPi / 2), pauli::I());
  if (opt.dual_drive)
    close = kron(rxy(-kPi / 2, ys * kPi / 2), rxy(-kPi / 2, -ys * kPi / 2));
  std::vector<double> row;
  row.reserve(traj.size());
  for (const auto &psi : traj)
    row.push_back(std::norm((close * psi)(2)));
  return row;
}

} // namespace

ChevronTable chevron_sweep(const DeviceModel &dev, std::size_t driven, std::size_t idle,
                           std::span<const double> amplitudes, std::span<const double> durations,
                           SweepOptions opt) {
  if (amplitudes.empty() || durations.empty())
    throw ValidationError("chevron grids must be nonempty");
  for (double d : durations)
    if (!(d > 0))
      throw ValidationError("chevron durations must be positive");
  device::pair_parameters(dev, driven, idle); // coupled-pair check

  ChevronTable t;
  t.amplitudes_mhz.assign(amplitudes.begin(), amplitudes.end());
  t.durations_ns.assign(durations.begin(), durations.end());
  t.p_transfer.resize(amplitudes.size());

  const unsigned nthreads =
      std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(amplitudes.size())));
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex mu;
  for (unsigned w = 0; w < nthreads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < amplitudes.size(); i += nthreads) {
        try {
          t.p_transfer[i] = transfer_row(dev, driven, idle, amplitudes[i], durations, opt);
        } catch (...) {
          std::lock_guard lk(mu);
          if (!err)
            err = std::current_exception();
        }
      }
    });
  }
  for (auto &th : pool)
    th.join();
  if (err)
    std::rethrow_exception(err);
  return t;
}

double oscillation_frequency(std::span<const double> times, std::span<const double> p) {
  if (times.size() != p.size() || times.size() < 4)
    throw ValidationError("oscillation_frequency needs matching samples (>= 4)");
  // Variance explained by the best offset + cos + sin fit at f. Unlike a bare DFT peak
  // this is not pulled by the negative-frequency image on short windows.
  auto power = [&](double f) {
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d aty = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double w = 2 * kPi * f * times[i];
      const Eigen::Vector3d row(1.0, std::cos(w), std::sin(w));
      ata += row * row.transpose();
      aty += row * p[i];
    }
    return aty.dot(ata.ldlt().solve(aty));
  };
  const double span = times.back() - times.front();
  const double dtmin = span / static_cast<double>(times.size() - 1);
  const double fmax = 0.5 / dtmin, df = 0.05 / span;
  // Below half a cycle per window the cosine column is nearly the offset column.
  const double fmin = 0.5 / span;
  double best_f = fmin, best_p = -1;
  for (double f = fmin; f <= fmax; f += df) {
    const double pw = power(f);
    if (pw > best_p) {
      best_p = pw;
      best_f = f;
    }
  }
  // Golden-section refinement around the coarse peak.
  double a = std::max(best_f - df, fmin), b = best_f + df;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 80; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (power(c) > power(d))
      b = d;
    else
      a = c;
  }
  return 0.5 * (a + b) * 1e3; // 1/ns -> MHz
}

} // namespace framewright::dynamics
