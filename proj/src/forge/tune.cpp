#include <algorithm>
#include <cmath>

#include "framewright/error.hpp"
#include "framewright/forge.hpp"

namespace framewright::forge {

using namespace linalg;

namespace {

struct Objective {
  const DeviceModel &dev;
  const Unitary4 &target;
  std::optional<std::array<double, 4>> warm;

  double operator()(const GateRecipe &r) {
    PulseProgram p;
    try {
      p = build_program(dev, r);
    } catch (const ValidationError &) {
      return 2.0; // outside the feasible region (e.g. negative flat top)
    }
    const Unitary4 v = canonical_unitary(dev, p);
    PhaseSearchOptions o;
    auto fit = phase_optimized_distance(v, target, o);
    if (warm) {
      o.warm_start = warm;
      auto w = phase_optimized_distance(v, target, o);
      if (w.infidelity < fit.infidelity)
        fit = w;
    }
    warm = fit.phases;
    return fit.infidelity;
  }
};

bool feasible(const std::string &name, double x) {
  if (name.find("flat") != std::string::npos)
    return x >= 0.0;
  if (name == "omega_mhz" || name == "omega2_mhz")
    return x > 0.0;
  return true;
}

} // namespace

TuneResult amplitude_fine_tune(const DeviceModel &dev, const GateRecipe &start,
                               const Unitary4 &target, const TuneOptions &opt) {
  if (opt.names.empty())
    throw ValidationError("amplitude_fine_tune: no parameters to tune");
  for (const auto &n : opt.names)
    start.get(n);

  Objective f{dev, target, std::nullopt};
  GateRecipe cur = start;
  double fcur = f(cur);
  std::map<std::string, double> h;
  for (const auto &n : opt.names) {
    auto it = opt.steps.find(n);
    h[n] = it != opt.steps.end() ? it->second : std::max(1e-3, 0.01 * std::abs(cur.get(n)));
  }

  TuneResult res;
  GateRecipe before = cur;
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    const double fstart = fcur;
    for (const auto &n : opt.names) {
      const double x0 = cur.get(n), step = h[n];
      auto eval_at = [&](double x) {
        if (!feasible(n, x))
          return 2.0;
        GateRecipe r = cur;
        r.params[n] = x;
        return f(r);
      };
      const double fp = eval_at(x0 + step), fm = eval_at(x0 - step);
      double bestx = x0, bestf = fcur;
      if (fp < bestf) {
        bestx = x0 + step;
        bestf = fp;
      }
      if (fm < bestf) {
        bestx = x0 - step;
        bestf = fm;
      }
      const double curv = fp - 2 * fcur + fm;
      if (curv > 0) {
        double xv = x0 - 0.5 * step * (fp - fm) / curv;
        xv = std::clamp(xv, x0 - 4 * step, x0 + 4 * step);
        const double fv = eval_at(xv);
        if (fv < bestf) {
          bestx = xv;
          bestf = fv;
        }
      }
      const double moved = std::abs(bestx - x0);
      if (bestf < fcur) {
        cur.params[n] = bestx;
        fcur = bestf;
      }
      // Step follows the size of the last useful move.
      if (moved == 0.0)
        h[n] = step * 0.5;
      else if (moved >= 0.999 * step)
        h[n] = step * 1.5;
      else
        h[n] = std::max(moved, step * 0.25);
    }
    // Pattern move along the net displacement of this sweep (correlated valleys).
    if (fcur < fstart) {
      std::map<std::string, double> dir;
      for (const auto &n : opt.names)
        dir[n] = cur.get(n) - before.get(n);
      auto along = [&](double a) {
        GateRecipe r = cur;
        for (const auto &n : opt.names) {
          r.params[n] = cur.get(n) + a * dir[n];
          if (!feasible(n, r.params[n]))
            return std::pair{2.0, r};
        }
        return std::pair{f(r), r};
      };
      GateRecipe best = cur;
      double fbest = fcur;
      for (double a = 1.0; a <= 64.0; a *= 2) {
        auto [fa, ra] = along(a);
        if (!(fa < fbest))
          break;
        best = ra;
        fbest = fa;
      }
      cur = best;
      fcur = fbest;
    }
    before = cur;
    res.sweeps = sweep;
    if (fstart - fcur < opt.improvement_tol && sweep > 1) {
      res.recipe = cur;
      res.infidelity = fcur;
      if (fcur > opt.max_infidelity)
        throw NumericalError(std::string(to_string(start.kind)) +
                                 ": tuner converged above the target infidelity",
                             fcur);
      return res;
    }
  }
  res.recipe = cur;
  res.infidelity = fcur;
  throw TuneCapError(std::string(to_string(start.kind)) + ": tuner hit the sweep cap", res);
}

} // namespace framewright::forge
