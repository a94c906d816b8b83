#pragma once

#include <Eigen/Dense>
#include <vector>

namespace geonet {

/// One monomial term c * prod_i x_i^{p_i}.
struct PolyTerm {
  double coeff = 0.0;
  std::vector<int> powers;  // one non-negative exponent per variable
};

/// Sparse multivariate polynomial with an explicit term list. Evaluation and
/// differentiation are exact; no finite differences anywhere in this class.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(int nvars, std::vector<PolyTerm> terms);

  int vars() const { return nvars_; }
  int totalDegree() const;
  bool isZero() const { return terms_.empty(); }
  const std::vector<PolyTerm>& terms() const { return terms_; }

  double operator()(const Eigen::VectorXd& x) const;
  Polynomial partial(int var) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  /// Allocation-free gradient for hot loops; out must be pre-sized to vars().
  void gradientInto(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;

  static Polynomial zero(int nvars) { return Polynomial(nvars, {}); }

 private:
  int nvars_ = 0;
  std::vector<PolyTerm> terms_;
};

}  // namespace geonet
