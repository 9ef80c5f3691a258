#ifndef WIREFLOW_STIFFNESS_HPP
#define WIREFLOW_STIFFNESS_HPP

#include <string>
#include <vector>

namespace wireflow {

/// Value of a stiffness profile together with its first two derivatives,
/// evaluated jointly so call sites cannot mix incompatible approximations.
struct BetaEval {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

/// Uniform positivity floor; only the polynomial family can get close to it,
/// and it is applied there by smooth clamping so derivatives stay consistent.
inline constexpr double kBetaFloor = 1e-8;

/// Smooth positive stiffness beta(x) with analytic derivatives.
///
/// Families: constant a; exponential a*exp(b*x); gaussian bump
/// a + b*exp(-c*(x - x0)^2); polynomial with smooth positivity clamping.
class StiffnessProfile {
 public:
  enum class Kind { Constant, Exponential, GaussianBump, Polynomial };

  /// Defaults to the unit constant profile.
  StiffnessProfile();

  static StiffnessProfile constant(double a);
  static StiffnessProfile exponential(double a, double b);
  static StiffnessProfile gaussian_bump(double a, double b, double c, double x0);
  /// coefficients[k] multiplies x^k.  Values are clamped smoothly to stay
  /// at or above kBetaFloor.
  static StiffnessProfile polynomial(std::vector<double> coefficients);

  BetaEval eval(double x) const;
  /// Convenience accessor for the value alone.
  double operator()(double x) const { return eval(x).value; }

  Kind kind() const { return kind_; }
  const std::vector<double>& parameters() const { return params_; }
  std::string kind_name() const;

 private:
  StiffnessProfile(Kind kind, std::vector<double> params);

  Kind kind_;
  std::vector<double> params_;
};

}  // namespace wireflow

#endif  // WIREFLOW_STIFFNESS_HPP
