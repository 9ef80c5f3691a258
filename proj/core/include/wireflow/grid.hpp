#ifndef WIREFLOW_GRID_HPP
#define WIREFLOW_GRID_HPP

#include <cstddef>
#include <utility>
#include <vector>

namespace wireflow {

/// Uniform periodic arc-length grid on [0, L) with n nodes s_i = i*h, h = L/n.
/// Index arithmetic is modulo n throughout.
struct Grid {
  int n = 0;
  double length = 0.0;
  double h = 0.0;

  double node(int i) const { return h * static_cast<double>(i); }
  std::vector<double> nodes() const;

  bool operator==(const Grid&) const = default;
};

/// Validates length > 0 (finite) and n >= 8 and returns the grid.
Grid make_grid(double length, int n);

/// Scalar samples on a Grid, value semantics.  Periodic: v[i] == v[i mod n].
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid, double fill = 0.0);
  Field(const Grid& grid, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  int size() const { return grid_.n; }

  double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }

  /// Periodic access: any integer index is wrapped into [0, n).
  double at_wrapped(int i) const;

  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

 private:
  Grid grid_;
  std::vector<double> v_;
};

/// Samples f(s_i) over the nodes of a grid.
template <typename F>
Field sample_field(const Grid& grid, F&& f) {
  Field out(grid);
  for (int i = 0; i < grid.n; ++i) out[i] = f(grid.node(i));
  return out;
}

/// Second-order central first derivative, (f_{i+1} - f_{i-1}) / 2h, periodic.
Field deriv1(const Field& f);

/// Compact second derivative, (f_{i+1} - 2 f_i + f_{i-1}) / h^2, periodic.
Field deriv2(const Field& f);

/// Central first derivative of a field whose periodic extension jumps by
/// 2*pi*omega across the seam (inclination angle of a closed curve).  The
/// wraparound differences at i = 0 and i = n-1 are corrected by the jump.
Field deriv1_winding(const Field& theta, int omega);

/// Seam-corrected compact second derivative; annihilates affine-plus-jump
/// samples exactly.
Field deriv2_winding(const Field& theta, int omega);

/// Rectangle-rule quadrature h * sum_i f_i (compensated summation).
double integrate(const Field& f);

/// Quadrature inner product h * sum_i f_i g_i (compensated summation).
double inner(const Field& f, const Field& g);

/// sqrt(inner(f, f)).
double l2_norm(const Field& f);

/// max_i |f_i|.
double max_abs(const Field& f);

/// Solves the cyclic tridiagonal system
///   sub_i x_{i-1} + diag_i x_i + sup_i x_{i+1} = rhs_i   (indices mod n)
/// by rank-one correction of two non-cyclic tridiagonal sweeps, followed by
/// one step of iterative refinement.  Every row must satisfy the dominance
/// guard |sub_i| + |sup_i| <= 0.999 |diag_i|; a violation throws
/// SolverFailureError (for the lagged-coefficient operator this signals a
/// time step too large for the current grid).
Field solve_cyclic_tridiag(const std::vector<double>& sub,
                           const std::vector<double>& diag,
                           const std::vector<double>& sup, const Field& rhs);

}  // namespace wireflow

#endif  // WIREFLOW_GRID_HPP
