#include "wireflow/stiffness.hpp"

#include <cmath>
#include <utility>

#include "wireflow/errors.hpp"

namespace wireflow {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw ValidationError(std::string(what) + " must be finite");
}

}  // namespace

StiffnessProfile::StiffnessProfile() : kind_(Kind::Constant), params_{1.0} {}

StiffnessProfile::StiffnessProfile(Kind kind, std::vector<double> params)
    : kind_(kind), params_(std::move(params)) {}

StiffnessProfile StiffnessProfile::constant(double a) {
  require_finite(a, "constant stiffness a");
  if (a <= 0.0) throw ValidationError("constant stiffness requires a > 0");
  return StiffnessProfile(Kind::Constant, {a});
}

StiffnessProfile StiffnessProfile::exponential(double a, double b) {
  require_finite(a, "exponential stiffness a");
  require_finite(b, "exponential stiffness b");
  if (a <= 0.0) throw ValidationError("exponential stiffness requires a > 0");
  return StiffnessProfile(Kind::Exponential, {a, b});
}

StiffnessProfile StiffnessProfile::gaussian_bump(double a, double b, double c, double x0) {
  require_finite(a, "gaussian-bump stiffness a");
  require_finite(b, "gaussian-bump stiffness b");
  require_finite(c, "gaussian-bump stiffness c");
  require_finite(x0, "gaussian-bump stiffness x0");
  if (a <= 0.0) throw ValidationError("gaussian-bump stiffness requires a > 0");
  if (c < 0.0) throw ValidationError("gaussian-bump stiffness requires c >= 0");
  // The bump contributes at least min(b, 0), so positivity on the whole line
  // reduces to a + min(b, 0) > 0.
  if (a + std::min(b, 0.0) <= 0.0)
    throw ValidationError("gaussian-bump stiffness requires a + min(b, 0) > 0");
  return StiffnessProfile(Kind::GaussianBump, {a, b, c, x0});
}

StiffnessProfile StiffnessProfile::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty())
    throw ValidationError("polynomial stiffness requires at least one coefficient");
  for (double c : coefficients) require_finite(c, "polynomial stiffness coefficient");
  return StiffnessProfile(Kind::Polynomial, std::move(coefficients));
}

BetaEval StiffnessProfile::eval(double x) const {
  BetaEval out;
  switch (kind_) {
    case Kind::Constant: {
      out.value = params_[0];
      out.first = 0.0;
      out.second = 0.0;
      return out;
    }
    case Kind::Exponential: {
      const double a = params_[0];
      const double b = params_[1];
      const double e = a * std::exp(b * x);
      out.value = e;
      out.first = b * e;
      out.second = b * b * e;
      return out;
    }
    case Kind::GaussianBump: {
      const double a = params_[0];
      const double b = params_[1];
      const double c = params_[2];
      const double x0 = params_[3];
      const double d = x - x0;
      const double e = b * std::exp(-c * d * d);
      out.value = a + e;
      out.first = -2.0 * c * d * e;
      out.second = (4.0 * c * c * d * d - 2.0 * c) * e;
      return out;
    }
    case Kind::Polynomial: {
      // Horner evaluation of p, p', p''.
      double p = 0.0, dp = 0.0, ddp = 0.0;
      for (std::size_t k = params_.size(); k-- > 0;) {
        ddp = ddp * x + 2.0 * dp;
        dp = dp * x + p;
        p = p * x + params_[k];
      }
      // Smooth clamp g(p) = (p + f + sqrt((p - f)^2 + f^2)) / 2 >= f with
      // f = kBetaFloor; analytic in p, so the chain rule stays exact.
      const double f = kBetaFloor;
      const double q = p - f;
      const double r = std::sqrt(q * q + f * f);
      const double g = 0.5 * (p + f + r);
      const double dg = 0.5 * (1.0 + q / r);
      const double ddg = 0.5 * (f * f) / (r * r * r);
      out.value = g;
      out.first = dp * dg;
      out.second = ddp * dg + dp * dp * ddg;
      return out;
    }
  }
  throw ValidationError("unknown stiffness profile kind");
}

std::string StiffnessProfile::kind_name() const {
  switch (kind_) {
    case Kind::Constant: return "constant";
    case Kind::Exponential: return "exponential";
    case Kind::GaussianBump: return "gaussian_bump";
    case Kind::Polynomial: return "polynomial";
  }
  return "unknown";
}

}  // namespace wireflow
