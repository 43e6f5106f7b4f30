#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <unsupported/Eigen/NonLinearOptimization>

#include "framewright/error.hpp"
#include "framewright/rb.hpp"

namespace framewright::rb {

namespace {

// Residuals (A p^m + B - y) / sigma over x = (A, p, B).
struct DecayFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  std::vector<double> m, y, w;

  int inputs() const { return 3; }
  int values() const { return static_cast<int>(m.size()); }

  int operator()(const Eigen::VectorXd &x, Eigen::VectorXd &f) const {
    for (std::size_t i = 0; i < m.size(); ++i)
      f(static_cast<Eigen::Index>(i)) = (x(0) * std::pow(x(1), m[i]) + x(2) - y[i]) * w[i];
    return 0;
  }
  int df(const Eigen::VectorXd &x, Eigen::MatrixXd &j) const {
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      j(r, 0) = std::pow(x(1), m[i]) * w[i];
      j(r, 1) = x(0) * m[i] * std::pow(x(1), m[i] - 1.0) * w[i];
      j(r, 2) = w[i];
    }
    return 0;
  }
};

} // namespace

DecayFit fit_decay(std::span<const int> lengths, std::span<const double> means,
                   std::span<const double> sigma) {
  const std::size_t n = lengths.size();
  if (n != means.size())
    throw ValidationError("fit_decay: lengths and means differ in size");
  if (!sigma.empty() && sigma.size() != n)
    throw ValidationError("fit_decay: sigma size differs from lengths");
  if (n < 3)
    throw ValidationError("fit_decay: needs at least 3 lengths");

  DecayFunctor fn;
  bool weighted = !sigma.empty() && std::all_of(sigma.begin(), sigma.end(), [](double s) { return s > 0.0; });
  for (std::size_t i = 0; i < n; ++i) {
    fn.m.push_back(lengths[i]);
    fn.y.push_back(means[i]);
    fn.w.push_back(weighted ? 1.0 / sigma[i] : 1.0);
  }

  DecayFit fit;
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  if (*hi - *lo < 1e-9) {
    // No decay to resolve: p = 1 and A is absorbed into B.
    fit.degenerate = true;
    fit.p = 1.0;
    fit.a = 0.0;
    double s = 0.0;
    for (double v : means)
      s += v;
    fit.b = s / static_cast<double>(n);
    return fit;
  }

  // Seeds: B at the two-qubit asymptote, p from a log-linear fit of y - B.
  const double b0 = 0.25;
  std::size_t first = static_cast<std::size_t>(
      std::min_element(lengths.begin(), lengths.end()) - lengths.begin());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = means[i] - b0;
    if (d <= 1e-6)
      continue;
    const double x = lengths[i], ly = std::log(d);
    sx += x;
    sy += ly;
    sxx += x * x;
    sxy += x * ly;
    ++k;
  }
  double p0 = 0.95;
  if (k >= 2 && k * sxx - sx * sx > 0.0)
    p0 = std::exp((k * sxy - sx * sy) / (k * sxx - sx * sx));
  p0 = std::clamp(p0, 0.5, 0.999999);
  const double a0 = (means[first] - b0) / std::pow(p0, lengths[first]);

  Eigen::VectorXd x(3);
  x << a0, p0, b0;
  Eigen::LevenbergMarquardt<DecayFunctor> lm(fn);
  lm.parameters.ftol = 1e-15;
  lm.parameters.xtol = 1e-15;
  lm.parameters.maxfev = 2000;
  const auto status = lm.minimize(x);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters || !x.allFinite())
    throw NumericalError("fit_decay: fit did not converge");

  Eigen::MatrixXd j(n, 3);
  fn.df(x, j);
  Eigen::VectorXd f(n);
  fn(x, f);
  const Eigen::Matrix3d jtj = j.transpose() * j;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(jtj);
  Eigen::Matrix3d cov;
  if (!lu.isInvertible()) {
    // Parameters not separable from these lengths (decay too shallow): the point
    // estimate stands, the uncertainties do not.
    cov.setConstant(std::numeric_limits<double>::infinity());
  } else {
    cov = lu.inverse();
    if (n > 3)
      cov *= f.squaredNorm() / static_cast<double>(n - 3);
    else if (!weighted)
      cov.setZero();
  }

  fit.a = x(0);
  fit.p = x(1);
  fit.b = x(2);
  fit.a_err = std::sqrt(std::max(0.0, cov(0, 0)));
  fit.p_err = std::sqrt(std::max(0.0, cov(1, 1)));
  fit.b_err = std::sqrt(std::max(0.0, cov(2, 2)));
  return fit;
}

std::string result_to_csv(const RBResult &r) {
  std::ostringstream os;
  os << "length,realization,p00\n";
  for (std::size_t li = 0; li < r.lengths.size(); ++li)
    for (std::size_t k = 0; k < r.p00[li].size(); ++k)
      os << fmt::format("{},{},{:.12f}\n", r.lengths[li], k, r.p00[li][k]);
  return os.str();
}

} // namespace framewright::rb
