#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "framewright/compiler.hpp"
#include "framewright/device.hpp"
#include "framewright/forge.hpp"

namespace framewright::calib {

using dynamics::GateInstance;
using linalg::Unitary4;

// Action of the gate under test in logical frames, instance basis (driven, idle),
// for a gate starting at t_start.
using GateAction = std::function<Unitary4(double t_start)>;

GateAction frame_wrap_action(const GateInstance &in);
GateAction pulse_action(const device::DeviceModel &dev, const forge::Synthesis &s);

// One step of a Ramsey sequence. Qubit 0 is the driven qubit, 1 the idle qubit.
struct Step {
  enum class Kind { Gate, Cnot, UnderTest, ScanZ };
  Kind kind = Kind::Gate;
  int qubit = 0;                 // Gate and ScanZ
  Mat2 m = Mat2::Identity();     // Gate
  double sign = 1.0, base = 0.0; // ScanZ angle = sign * (base + phi)

  static Step gate(int q, const Mat2 &m);
  static Step z(int q, double theta);
  static Step scan(int q, double base, double sign = 1.0);
  static Step cnot(); // control idle, target driven
  static Step under_test();
};

struct RamseySequence {
  std::string name;
  std::vector<Step> steps;
  int measured = 0;
};

struct CosineFit {
  double phi = 0.0;       // P = offset + amplitude cos(phi_scan - phi)
  double amplitude = 0.0;
  double offset = 0.0;
  double residual = 0.0;  // rms
  double visibility() const { return 2.0 * amplitude; }
};

struct RamseyScan {
  std::string sequence;
  std::vector<double> grid;
  std::vector<double> p; // population of |1> on the measured qubit
  CosineFit fit;
};

struct RamseyEnv {
  GateAction gate;
  double t_start_ns = 0.0;
  // Helper CNOT (control idle, target driven); ideal when empty.
  std::optional<Unitary4> cnot;
  unsigned threads = 1;
};

std::vector<double> default_grid(int n = 64);

RamseyScan run_ramsey(const RamseySequence &seq, std::span<const double> grid,
                      const RamseyEnv &env);
// Linear least squares in (1, cos, sin); on a uniform grid this is the Fourier quadrature.
// Throws NumericalError when the amplitude is below 0.05.
CosineFit fit_cosine(std::span<const double> grid, std::span<const double> p);
CosineFit fit_cosine(const RamseyScan &scan);

struct CalibOptions {
  std::vector<double> grid = default_grid();
  double t_start_ns = 128.0;
  std::optional<Unitary4> cnot;
  unsigned threads = 1;
};

struct CalibrationReport {
  GateKind gate = GateKind::ISWAP_ONRES;
  std::vector<double> phases;
  std::vector<double> fit_residuals;
  std::vector<double> visibility;
  std::vector<RamseyScan> scans;
  // Linear combination of phases each scan measured, after removing the sequence's
  // response to the ideal gate.
  std::vector<double> measured;
};

// Runs the sequences of the gate's family and writes the phases into `in`.
CalibrationReport calibrate_phases(GateInstance &in, const GateAction &gate,
                                   const CalibOptions &opt = {});

// CZ-based CNOT (control idle, target driven) from a corrected CZ instance on the same
// pair, evaluated at t_start.
Unitary4 cz_based_cnot(const GateInstance &cz, const GateInstance &on_pair, double t_start);

std::string report_to_json(const CalibrationReport &r);
std::string scans_to_csv(const CalibrationReport &r);

} // namespace framewright::calib
