#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace framewright::device {

struct Qubit {
  std::string label;
  double f01_ghz = 0;
  double alpha_mhz = 0; // recorded, unused by the two-level dynamics
  double t1_us = 0;
  double t2_us = 0;
  double rb_epc = 0; // single-qubit RB error per Clifford, optional

  double f01_mhz() const { return f01_ghz * 1e3; }
};

struct Coupling {
  std::size_t a = 0;
  std::size_t b = 0;
  double j_mhz = 0;
};

class DeviceModel {
public:
  DeviceModel() = default;
  // Throws ValidationError naming the offending field.
  DeviceModel(std::vector<Qubit> qubits, std::vector<Coupling> pairs);

  const std::vector<Qubit> &qubits() const noexcept { return qubits_; }
  const std::vector<Coupling> &pairs() const noexcept { return pairs_; }
  const Qubit &qubit(std::size_t i) const;
  std::size_t size() const noexcept { return qubits_.size(); }

  std::size_t index_of(std::string_view label) const;
  std::optional<double> coupling(std::size_t a, std::size_t b) const;

private:
  std::vector<Qubit> qubits_;
  std::vector<Coupling> pairs_;
};

DeviceModel load_device(std::string_view config_text);
DeviceModel load_device_file(const std::string &path);
std::string device_to_json(const DeviceModel &dev);

// sign(lambda) sqrt(Omega^2 + lambda^2) - lambda, sign(0) = +1. MHz.
double stark_shift(double omega_mhz, double lambda_mhz);

enum class Shape { Gaussian, FlatTopGaussian, Square };

struct PulseEnvelope {
  Shape shape = Shape::Gaussian;
  double sigma_ns = 16.0;
  double flat_ns = 0.0;
  double amplitude_mhz = 0.0; // peak Rabi frequency
  double detuning_mhz = 0.0;  // lambda, informational; the segment carries the drive frequency
  double phase_rad = 0.0;     // gamma: 0 -> X, pi/2 -> Y, pi -> -X
  double drag_beta = 0.0;     // ns; imaginary part = beta dOmega/dt
  bool lifted = false;        // subtract the e^-2 pedestal from the ramps

  double duration() const;
  // Start/end of the constant part within [0, duration()].
  double flat_start() const;
  double flat_end() const;
};

PulseEnvelope gaussian(double sigma_ns, double amplitude_mhz, double phase_rad = 0.0);
PulseEnvelope flat_top(double sigma_ns, double flat_ns, double amplitude_mhz,
                       double phase_rad = 0.0);
PulseEnvelope square(double duration_ns, double amplitude_mhz, double phase_rad = 0.0);

// Complex envelope (I + iQ) in MHz at time t in [0, duration()], before the phase gamma.
std::complex<double> envelope_sample(const PulseEnvelope &env, double t);
// Integral of the real envelope over its support (Rabi area, MHz*ns).
double envelope_area(const PulseEnvelope &env);

struct DriveSegment {
  std::size_t channel = 0;
  double drive_freq_mhz = 0.0; // absolute drive frequency
  PulseEnvelope envelope;
  double start_ns = 0.0; // relative to the start of the program

  double duration() const { return envelope.duration(); }
  double end_ns() const { return start_ns + duration(); }
};

struct PairParameters {
  double delta_mhz = 0; // f(driven) - f(idle)
  double mu = 0;        // J / Delta
  double j_mhz = 0;
};

PairParameters pair_parameters(const DeviceModel &dev, std::size_t driven, std::size_t idle);

// Single-excitation eigenfrequencies (a, b) of the exchange-coupled pair, MHz. These are the
// frequencies a Ramsey experiment on either qubit would report with drives off.
std::array<double, 2> dressed_frequencies(const DeviceModel &dev, std::size_t a, std::size_t b);

// Peak amplitude of a 4-sigma Gaussian rotating by theta.
double gaussian_amplitude_for(double theta, double sigma_ns);

inline constexpr double kOneQubitSigma = 16.0; // 64 ns single-qubit pulses
inline constexpr double kRampSigma = 14.22;

} // namespace framewright::device
