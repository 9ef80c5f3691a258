#include "wireflow/grid.hpp"

#include <cmath>
#include <string>

#include "wireflow/errors.hpp"

namespace wireflow {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kDominanceFactor = 0.999;

int wrap(int i, int n) {
  int r = i % n;
  return r < 0 ? r + n : r;
}

/// Compensated (Kahan) summation; keeps long quadrature sums near one ulp.
double kahan_sum(const std::vector<double>& v) {
  double sum = 0.0;
  double carry = 0.0;
  for (double x : v) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

/// Thomas sweep for a strictly non-cyclic tridiagonal system.  The caller
/// guarantees enough dominance that pivotless elimination is stable.
void tridiag_solve(const std::vector<double>& sub, const std::vector<double>& diag,
                   const std::vector<double>& sup, const std::vector<double>& rhs,
                   std::vector<double>& work, std::vector<double>& x) {
  const std::size_t n = diag.size();
  work.resize(n);
  x.resize(n);
  double piv = diag[0];
  if (piv == 0.0) throw SolverFailureError("tridiagonal pivot vanished at row 0");
  x[0] = rhs[0] / piv;
  for (std::size_t i = 1; i < n; ++i) {
    work[i] = sup[i - 1] / piv;
    piv = diag[i] - sub[i] * work[i];
    if (piv == 0.0)
      throw SolverFailureError("tridiagonal pivot vanished at row " + std::to_string(i));
    x[i] = (rhs[i] - sub[i] * x[i - 1]) / piv;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= work[i + 1] * x[i + 1];
}

}  // namespace

std::vector<double> Grid::nodes() const {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = node(i);
  return out;
}

Grid make_grid(double length, int n) {
  if (!std::isfinite(length) || length <= 0.0)
    throw ValidationError("grid length must be positive and finite");
  if (n < 8) throw ValidationError("grid must have at least 8 nodes");
  Grid g;
  g.n = n;
  g.length = length;
  g.h = length / static_cast<double>(n);
  return g;
}

Field::Field(const Grid& grid, double fill)
    : grid_(grid), v_(static_cast<std::size_t>(grid.n), fill) {}

Field::Field(const Grid& grid, std::vector<double> values)
    : grid_(grid), v_(std::move(values)) {
  if (v_.size() != static_cast<std::size_t>(grid.n))
    throw ValidationError("field size does not match grid");
}

double Field::at_wrapped(int i) const { return v_[static_cast<std::size_t>(wrap(i, grid_.n))]; }

Field deriv1(const Field& f) {
  const Grid& g = f.grid();
  const int n = g.n;
  const double inv2h = 1.0 / (2.0 * g.h);
  Field out(g);
  for (int i = 0; i < n; ++i)
    out[i] = (f[wrap(i + 1, n)] - f[wrap(i - 1, n)]) * inv2h;
  return out;
}

Field deriv2(const Field& f) {
  const Grid& g = f.grid();
  const int n = g.n;
  const double invh2 = 1.0 / (g.h * g.h);
  Field out(g);
  for (int i = 0; i < n; ++i)
    out[i] = (f[wrap(i + 1, n)] - 2.0 * f[i] + f[wrap(i - 1, n)]) * invh2;
  return out;
}

Field deriv1_winding(const Field& theta, int omega) {
  const Grid& g = theta.grid();
  const int n = g.n;
  const double jump = kTwoPi * static_cast<double>(omega);
  const double inv2h = 1.0 / (2.0 * g.h);
  Field out(g);
  for (int i = 1; i + 1 < n; ++i) out[i] = (theta[i + 1] - theta[i - 1]) * inv2h;
  out[0] = (theta[1] - (theta[n - 1] - jump)) * inv2h;
  out[n - 1] = ((theta[0] + jump) - theta[n - 2]) * inv2h;
  return out;
}

Field deriv2_winding(const Field& theta, int omega) {
  const Grid& g = theta.grid();
  const int n = g.n;
  const double jump = kTwoPi * static_cast<double>(omega);
  const double invh2 = 1.0 / (g.h * g.h);
  Field out(g);
  for (int i = 1; i + 1 < n; ++i)
    out[i] = (theta[i + 1] - 2.0 * theta[i] + theta[i - 1]) * invh2;
  out[0] = (theta[1] - 2.0 * theta[0] + (theta[n - 1] - jump)) * invh2;
  out[n - 1] = ((theta[0] + jump) - 2.0 * theta[n - 1] + theta[n - 2]) * invh2;
  return out;
}

double integrate(const Field& f) { return f.grid().h * kahan_sum(f.values()); }

double inner(const Field& f, const Field& g) {
  if (!(f.grid() == g.grid())) throw ValidationError("inner product of fields on different grids");
  const std::size_t n = f.values().size();
  std::vector<double> prod(n);
  for (std::size_t i = 0; i < n; ++i) prod[i] = f.values()[i] * g.values()[i];
  return f.grid().h * kahan_sum(prod);
}

double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

double max_abs(const Field& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

Field solve_cyclic_tridiag(const std::vector<double>& sub, const std::vector<double>& diag,
                           const std::vector<double>& sup, const Field& rhs) {
  const Grid& g = rhs.grid();
  const std::size_t n = static_cast<std::size_t>(g.n);
  if (sub.size() != n || diag.size() != n || sup.size() != n)
    throw ValidationError("cyclic tridiagonal bands do not match grid size");

  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(sub[i]) + std::abs(sup[i]) > kDominanceFactor * std::abs(diag[i]))
      throw SolverFailureError("cyclic tridiagonal row " + std::to_string(i) +
                               " violates the diagonal-dominance guard");
  }

  // Rank-one (Sherman-Morrison) reduction of the wraparound couplings
  // sub[0] (row 0, column n-1) and sup[n-1] (row n-1, column 0):
  //   A = A' + u v^T,  u = (gamma, 0, ..., 0, sup[n-1])^T,
  //                    v = (1, 0, ..., 0, sub[0]/gamma)^T,
  // with the first/last diagonal entries of A' shifted accordingly.
  const double gamma = -diag[0];
  std::vector<double> diag_mod(diag);
  diag_mod[0] -= gamma;
  diag_mod[n - 1] -= sup[n - 1] * sub[0] / gamma;

  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = sup[n - 1];

  std::vector<double> work, y, z;
  tridiag_solve(sub, diag_mod, sup, rhs.values(), work, y);
  tridiag_solve(sub, diag_mod, sup, u, work, z);

  auto correct = [&](const std::vector<double>& yy, const std::vector<double>& zz,
                     std::vector<double>& xx) {
    const double vy = yy[0] + sub[0] / gamma * yy[n - 1];
    const double vz = zz[0] + sub[0] / gamma * zz[n - 1];
    const double factor = vy / (1.0 + vz);
    xx.resize(n);
    for (std::size_t i = 0; i < n; ++i) xx[i] = yy[i] - factor * zz[i];
  };

  std::vector<double> x;
  correct(y, z, x);

  // One pass of iterative refinement keeps the relative residual at or
  // below 1e-12 even for large n.
  std::vector<double> resid(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t im = (i == 0) ? n - 1 : i - 1;
    const std::size_t ip = (i + 1 == n) ? 0 : i + 1;
    resid[i] = rhs.values()[i] - (sub[i] * x[im] + diag[i] * x[i] + sup[i] * x[ip]);
  }
  std::vector<double> dy, dx;
  tridiag_solve(sub, diag_mod, sup, resid, work, dy);
  correct(dy, z, dx);
  for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];

  return Field(g, std::move(x));
}

}  // namespace wireflow
