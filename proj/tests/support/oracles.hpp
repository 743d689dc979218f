#pragma once

// Reference computations that do not go through the library's own algorithms.
// Shared by the unit suites and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "thermolen/lindblad.hpp"
#include "thermolen/opcore.hpp"

namespace oracle {

using thermolen::CMatrix;
using thermolen::Complex;
using thermolen::CVector;
using thermolen::RMatrix;
using thermolen::RVector;

inline constexpr double kPi = 3.14159265358979323846;

// Random instances --------------------------------------------------------------

inline CMatrix random_complex(std::mt19937_64& rng, int d, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  CMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

inline CMatrix random_hermitian(std::mt19937_64& rng, int d, double scale = 1.0) {
  const CMatrix g = random_complex(rng, d, scale);
  return 0.5 * (g + g.adjoint());
}

inline CMatrix random_traceless_hermitian(std::mt19937_64& rng, int d, double scale = 1.0) {
  CMatrix h = random_hermitian(rng, d, scale);
  h -= (h.trace() / double(d)) * CMatrix::Identity(d, d);
  return h;
}

/// Full-rank density matrix G G^dagger / Tr, mixed with the identity so the
/// smallest eigenvalue stays away from zero.
inline CMatrix random_density(std::mt19937_64& rng, int d, double floor = 0.05) {
  const CMatrix g = random_complex(rng, d);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = (1.0 - floor) * rho + (floor / d) * CMatrix::Identity(d, d);
  return 0.5 * (rho + rho.adjoint());
}

/// Gibbs state by matrix exponential (no spectral shortcut).
inline CMatrix gibbs_expm(const CMatrix& h, double beta) {
  CMatrix e = (-beta * h).exp();
  return e / e.trace().real();
}

inline double log_z_expm(const CMatrix& h, double beta) { return std::log((-beta * h).exp().trace().real()); }

/// rho^s for a Gibbs state written as e^{-s beta H} / Z^s.
inline CMatrix gibbs_power(const CMatrix& h, double beta, double s) {
  const double log_z = log_z_expm(h, beta);
  return (-s * beta * h).exp() * std::exp(-s * log_z);
}

/// J[A] = int_0^1 rho^{1-s}(A - Tr[rho A])rho^s ds by 21-point Gauss-Legendre.
inline CMatrix j_quadrature(const CMatrix& h, double beta, const CMatrix& a) {
  const int d = static_cast<int>(h.rows());
  const CMatrix rho = gibbs_expm(h, beta);
  const CMatrix shifted = a - (rho * a).trace() * CMatrix::Identity(d, d);
  CMatrix out = CMatrix::Zero(d, d);
  using rule = boost::math::quadrature::gauss<double, 21>;
  for (std::size_t k = 0; k < rule::abscissa().size(); ++k) {
    const double x = rule::abscissa()[k];
    const double w = rule::weights()[k];
    const double xs[2] = {x, -x};
    for (int side = 0; side < (x == 0.0 ? 1 : 2); ++side) {
      const double s = 0.5 * (1.0 + xs[side]);
      out += 0.5 * w * gibbs_power(h, beta, 1.0 - s) * shifted * gibbs_power(h, beta, s);
    }
  }
  return out;
}

/// Detailed-balance generator on a random d-level system: jumps |a><b| between
/// eigenvectors with rates g_ab e^{-beta (e_a - e_b)/2}, dephasing in the
/// eigenbasis and a coherent term.
inline thermolen::LindbladGenerator random_detailed_balance(std::mt19937_64& rng, int d, double beta) {
  using namespace thermolen;
  const HermitianOperator h(random_hermitian(rng, d));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
  const RVector e = es.eigenvalues();
  const CMatrix& v = es.eigenvectors();
  std::uniform_real_distribution<double> u(0.2, 1.5);
  std::vector<JumpOperator> jumps;
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      const double g = u(rng);
      const CMatrix down = v.col(a) * v.col(b).adjoint();  // b -> a
      jumps.push_back({down, g * std::exp(-0.5 * beta * (e(a) - e(b)))});
      jumps.push_back({CMatrix(down.adjoint()), g * std::exp(-0.5 * beta * (e(b) - e(a)))});
    }
  }
  CMatrix deph = CMatrix::Zero(d, d);
  for (int a = 0; a < d; ++a) deph += u(rng) * v.col(a) * v.col(a).adjoint();
  jumps.push_back({deph, 0.3});
  return LindbladGenerator::build(h, std::move(jumps), beta, CoherentTerm::include);
}

// Drazin conditions ------------------------------------------------------------

inline double operator_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

struct Residuals {
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;
  double max() const { return std::max({b1, b2, b3}); }
};

/// Column-major vec: |omega><1| acts as vec(omega) vec(1)^dagger.
inline Residuals drazin_conditions(const CMatrix& l, const CMatrix& lplus, const CMatrix& omega) {
  const int d = static_cast<int>(omega.rows());
  const int n = d * d;
  const CVector w = omega.reshaped();
  const CVector one = CMatrix::Identity(d, d).reshaped();
  const CMatrix p = CMatrix::Identity(n, n) - w * one.adjoint();
  Residuals r;
  r.b1 = std::max(operator_norm(l * lplus - p), operator_norm(lplus * l - p));
  r.b2 = (lplus * w).norm();
  r.b3 = (one.adjoint() * lplus).norm();
  return r;
}

// Finite differences --------------------------------------------------------------

template <class F>
double central_second(F&& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Closed forms -------------------------------------------------------------------

inline double lambda_d(double x) { return std::tanh(x) / (std::cosh(x) * std::cosh(x)); }
inline double lambda_q(double x) { return 2.0 * std::tanh(x) * std::tanh(x) / x; }
inline double w_linear(double e) { return e * std::tanh(e); }
inline double w_geodesic(double e) {
  const double a = kPi - 2.0 * std::atan(1.0 / std::sinh(e));
  return 0.25 * a * a;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace oracle
