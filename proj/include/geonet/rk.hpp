#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace geonet {

class IntegrationError : public std::runtime_error {
 public:
  explicit IntegrationError(const std::string& what) : std::runtime_error(what) {}
};

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initialStep = 1e-2;
  double maxStep = 5e-2;
  double minStep = 1e-12;
};

/// One accepted Dormand--Prince step together with its continuous extension
/// (the classical 4th-order interpolant). evalDeriv differentiates the
/// interpolant analytically.
struct DenseStep {
  double t0 = 0.0, h = 0.0;
  Eigen::VectorXd r1, r2, r3, r4, r5;

  Eigen::VectorXd eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
  Eigen::VectorXd evalDeriv(double t) const {
    const double th = (t - t0) / h;
    return (r2 + (1.0 - 2.0 * th) * r3 + th * (2.0 - 3.0 * th) * r4 +
            2.0 * th * (1.0 - th) * (1.0 - 2.0 * th) * r5) /
           h;
  }
};

/// Piecewise interpolant over a run of accepted steps.
struct DenseOutput {
  std::vector<DenseStep> steps;

  bool empty() const { return steps.empty(); }
  double tBegin() const { return steps.front().t0; }
  double tEnd() const { return steps.back().t0 + steps.back().h; }

  const DenseStep& stepAt(double t) const {
    // binary search for the step containing t; clamp to the run
    int lo = 0, hi = static_cast<int>(steps.size()) - 1;
    while (lo < hi) {
      int mid = (lo + hi) / 2;
      if (t <= steps[mid].t0 + steps[mid].h)
        hi = mid;
      else
        lo = mid + 1;
    }
    return steps[lo];
  }
  Eigen::VectorXd eval(double t) const { return stepAt(t).eval(t); }
  Eigen::VectorXd evalDeriv(double t) const { return stepAt(t).evalDeriv(t); }
};

namespace dopri5 {

// Butcher tableau of the Dormand--Prince 5(4) pair.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - bhat, for the embedded 4th-order error estimate
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense-output weights
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct Work {
  Eigen::VectorXd k2, k3, k4, k5, k6, ytmp;
};

/// One step from (t, y) of size h. k1 = f(t, y) must be supplied (FSAL reuse);
/// outputs y1, k7 = f(t+h, y1) and the embedded error estimate. When dense is
/// non-null the continuous-extension coefficients are stored.
template <class Rhs>
void step(Rhs&& f, double t, const Eigen::VectorXd& y, double h, const Eigen::VectorXd& k1,
          Eigen::VectorXd& y1, Eigen::VectorXd& k7, Eigen::VectorXd& err, Work& w,
          DenseStep* dense) {
  w.ytmp = y + h * (a21 * k1);
  f(t + c2 * h, w.ytmp, w.k2);
  w.ytmp = y + h * (a31 * k1 + a32 * w.k2);
  f(t + c3 * h, w.ytmp, w.k3);
  w.ytmp = y + h * (a41 * k1 + a42 * w.k2 + a43 * w.k3);
  f(t + c4 * h, w.ytmp, w.k4);
  w.ytmp = y + h * (a51 * k1 + a52 * w.k2 + a53 * w.k3 + a54 * w.k4);
  f(t + c5 * h, w.ytmp, w.k5);
  w.ytmp = y + h * (a61 * k1 + a62 * w.k2 + a63 * w.k3 + a64 * w.k4 + a65 * w.k5);
  f(t + h, w.ytmp, w.k6);
  y1 = y + h * (b1 * k1 + b3 * w.k3 + b4 * w.k4 + b5 * w.k5 + b6 * w.k6);
  f(t + h, y1, k7);
  err = h * (e1 * k1 + e3 * w.k3 + e4 * w.k4 + e5 * w.k5 + e6 * w.k6 + e7 * k7);
  if (dense) {
    dense->t0 = t;
    dense->h = h;
    dense->r1 = y;
    dense->r2 = y1 - y;
    dense->r3 = h * k1 - dense->r2;
    dense->r4 = dense->r2 - h * k7 - dense->r3;
    dense->r5 = h * (d1 * k1 + d3 * w.k3 + d4 * w.k4 + d5 * w.k5 + d6 * w.k6 + d7 * k7);
  }
}

}  // namespace dopri5

/// Hooks observed by the drivers. project, when set, is applied to each
/// accepted state (constraint stabilization). stopAfterStep, when set, ends
/// the run after the first accepted step for which it returns true.
struct DriverHooks {
  std::function<void(Eigen::VectorXd&)> project;
  std::function<bool(double t, const Eigen::VectorXd& y)> stopAfterStep;
};

/// Adaptive Dormand--Prince run from (t0, y0) to tEnd. Returns the dense
/// output over accepted steps; final state is dense.steps.back() data.
template <class Rhs>
DenseOutput integrateAdaptive(Rhs&& f, double t0, Eigen::VectorXd y0, double tEnd,
                              const OdeOptions& opt, const DriverHooks& hooks = {}) {
  DenseOutput out;
  dopri5::Work w;
  Eigen::VectorXd y = std::move(y0), y1, k1(y.size()), k7, err;
  double t = t0;
  double h = std::min(opt.initialStep, std::max(tEnd - t0, opt.minStep));
  f(t, y, k1);
  while (t < tEnd - 1e-14 * std::max(1.0, std::abs(tEnd))) {
    h = std::min(h, tEnd - t);
    DenseStep ds;
    dopri5::step(f, t, y, h, k1, y1, k7, err, w, &ds);
    double scale2 = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
      double q = err[i] / sc;
      scale2 += q * q;
    }
    double errNorm = std::sqrt(scale2 / static_cast<double>(y.size()));
    if (errNorm <= 1.0) {
      t += h;
      y = y1;
      if (hooks.project) hooks.project(y);
      k1 = k7;
      if (hooks.project) f(t, y, k1);  // FSAL invalid after projection
      out.steps.push_back(std::move(ds));
      if (hooks.stopAfterStep && hooks.stopAfterStep(t, y)) return out;
    }
    double fac = errNorm > 0.0 ? 0.9 * std::pow(errNorm, -0.2) : 5.0;
    h *= std::clamp(fac, 0.2, 5.0);
    h = std::min(h, opt.maxStep);
    if (h < opt.minStep)
      throw IntegrationError("integrateAdaptive: step size collapsed at t = " + std::to_string(t));
  }
  return out;
}

/// Fixed-step Dormand--Prince run with nSteps equal steps. The map
/// (y0, parameters) -> final state is smooth: no accept/reject decisions.
/// Dense output is collected only when collectDense is true.
template <class Rhs>
Eigen::VectorXd integrateFixed(Rhs&& f, double t0, Eigen::VectorXd y0, double tEnd, int nSteps,
                               const DriverHooks& hooks = {}, DenseOutput* dense = nullptr) {
  if (nSteps < 1) throw IntegrationError("integrateFixed: nSteps must be >= 1");
  dopri5::Work w;
  Eigen::VectorXd y = std::move(y0), y1, k1(y.size()), k7, err;
  const double h = (tEnd - t0) / nSteps;
  f(t0, y, k1);
  for (int i = 0; i < nSteps; ++i) {
    const double t = t0 + i * h;
    DenseStep ds;
    dopri5::step(f, t, y, h, k1, y1, k7, err, w, dense ? &ds : nullptr);
    y = y1;
    if (hooks.project) hooks.project(y);
    k1 = k7;
    if (hooks.project) f(t + h, y, k1);
    if (dense) dense->steps.push_back(std::move(ds));
  }
  return y;
}

}  // namespace geonet
