#include "geonet/poly.hpp"

#include <algorithm>
#include <stdexcept>

namespace geonet {

namespace {

double powi(double x, int n) {
  double r = 1.0;
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

}  // namespace

Polynomial::Polynomial(int nvars, std::vector<PolyTerm> terms)
    : nvars_(nvars), terms_(std::move(terms)) {
  if (nvars_ < 0) throw std::invalid_argument("Polynomial: negative variable count");
  for (auto& t : terms_) {
    if (static_cast<int>(t.powers.size()) != nvars_)
      throw std::invalid_argument("Polynomial: term power list does not match variable count");
    for (int p : t.powers)
      if (p < 0) throw std::invalid_argument("Polynomial: negative exponent");
  }
  // Drop exact zeros so isZero() is meaningful.
  std::erase_if(terms_, [](const PolyTerm& t) { return t.coeff == 0.0; });
}

int Polynomial::totalDegree() const {
  int deg = 0;
  for (const auto& t : terms_) {
    int d = 0;
    for (int p : t.powers) d += p;
    deg = std::max(deg, d);
  }
  return deg;
}

double Polynomial::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != nvars_) throw std::invalid_argument("Polynomial: wrong point dimension");
  double sum = 0.0;
  for (const auto& t : terms_) {
    double m = t.coeff;
    for (int i = 0; i < nvars_; ++i)
      if (t.powers[i] != 0) m *= powi(x[i], t.powers[i]);
    sum += m;
  }
  return sum;
}

Polynomial Polynomial::partial(int var) const {
  if (var < 0 || var >= nvars_) throw std::invalid_argument("Polynomial::partial: bad variable index");
  std::vector<PolyTerm> out;
  for (const auto& t : terms_) {
    if (t.powers[var] == 0) continue;
    PolyTerm d = t;
    d.coeff = t.coeff * t.powers[var];
    d.powers[var] -= 1;
    out.push_back(std::move(d));
  }
  return Polynomial(nvars_, std::move(out));
}

Eigen::VectorXd Polynomial::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g(nvars_);
  gradientInto(x, g);
  return g;
}

void Polynomial::gradientInto(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
  out.setZero();
  for (const auto& t : terms_) {
    for (int v = 0; v < nvars_; ++v) {
      if (t.powers[v] == 0) continue;
      double m = t.coeff * t.powers[v];
      for (int i = 0; i < nvars_; ++i) {
        int p = t.powers[i] - (i == v ? 1 : 0);
        if (p != 0) m *= powi(x[i], p);
      }
      out[v] += m;
    }
  }
}

}  // namespace geonet
