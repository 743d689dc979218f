#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "support/oracles.hpp"
#include "thermolen/errors.hpp"
#include "thermolen/models.hpp"

using namespace thermolen;
using oracle::kPi;
using oracle::rel;

namespace {

// Richardson-extrapolated central second difference.
template <class F>
double second_derivative(F&& f, double x, double h) {
  const double coarse = oracle::central_second(f, x, h);
  const double fine = oracle::central_second(f, x, h / 2);
  return (4 * fine - coarse) / 3;
}

template <class F>
double first_derivative(F&& f, double x, double h) {
  const double coarse = (f(x + h) - f(x - h)) / (2 * h);
  const double fine = (f(x + h / 2) - f(x - h / 2)) / h;
  return (4 * fine - coarse) / 3;
}

double argmax_metric(double beta) {
  // Golden-section search after a coarse scan.
  double best = 0.0, best_g = 0.0;
  for (int i = 1; i <= 300; ++i) {
    const double g = 0.01 * i;
    const double m = ising_metric(g, beta);
    if (m > best) best = m, best_g = g;
  }
  double a = best_g - 0.01, b = best_g + 0.01;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 50; ++it) {
    const double c = b - phi * (b - a), d = a + phi * (b - a);
    if (ising_metric(c, beta) > ising_metric(d, beta)) b = d; else a = c;
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("Ising dispersion") {
    for (double g : {0.0, 0.5, 1.0, 2.3}) {
      for (int k = 0; k < 64; ++k) {
        const double kk = 2 * kPi * k / 64.0;
        CHECK(ising_dispersion(g, kk) >= 0.0);
        CHECK(std::abs(ising_dispersion(g, kk) - ising_dispersion(g, 2 * kPi - kk)) <= 1e-12);
      }
    }
    CHECK(ising_dispersion(1.0, 0.0) == 0.0);
    CHECK(ising_dispersion(0.0, 1.3) == doctest::Approx(2.0));
  }

  TEST_CASE("Ising log Z density limits") {
    for (double beta : {0.3, 1.0, 4.0}) {
      CHECK(ising_log_z_density(0.0, beta) == doctest::Approx(std::log(2 * std::cosh(beta))).epsilon(1e-13));
    }
    CHECK(ising_log_z_density(1.7, 1e-8) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    const IsingLogZ z = ising_log_z_derivatives(0.6, 2.0);
    CHECK(z.f == doctest::Approx(ising_log_z_density(0.6, 2.0)).epsilon(1e-13));
    CHECK(z.nodes >= 2048);
    CHECK_THROWS_AS(ising_log_z_density(-0.1, 1.0), DomainError);
  }

  TEST_CASE("Ising metric matches quadrature of the second derivative and differences of log Z") {
    for (double beta : {0.5, 1.0, 2.0, 5.0}) {
      for (int i = 0; i <= 25; ++i) {
        const double g = 0.1 + 0.196 * i;  // [0.1, 5]
        // d2/dg2 log 2cosh(u), u = beta sqrt(q), q = 1 + g^2 - 2 g cos k:
        // sech^2(u) u'^2 + tanh(u) u'', u' = beta (g - cos k) / sqrt(q), u'' = beta sin^2 k / q^(3/2).
        auto integrand = [&](double k) {
          const double c = std::cos(k), s = std::sin(k);
          const double q = 1.0 + g * g - 2.0 * g * c;
          const double u = beta * std::sqrt(q);
          const double u1 = beta * (g - c) / std::sqrt(q);
          const double u2 = beta * s * s / (q * std::sqrt(q));
          return u1 * u1 / std::pow(std::cosh(u), 2) + std::tanh(u) * u2;
        };
        const double quad =
            boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, oracle::kPi, 20, 1e-14) /
            oracle::kPi / (beta * beta);
        const auto f = [&](double x) { return ising_log_z_density(x, beta); };
        const double fd = second_derivative(f, g, 2e-2) / (beta * beta);
        const double m = ising_metric(g, beta);
        CHECK(m > 0.0);
        CHECK(rel(m, quad) <= 1e-9);
        CHECK(rel(m, fd) <= 1e-4);
      }
    }
  }

  TEST_CASE("Ising Christoffel symbol") {
    for (double beta : {0.5, 1.0, 5.0}) {
      for (double g : {0.3, 0.9, 1.2, 2.0, 4.0}) {
        const double dm = first_derivative([&](double x) { return ising_metric(x, beta); }, g, 1e-3);
        const double expected = dm / (2 * ising_metric(g, beta));
        CHECK(ising_christoffel(g, beta) == doctest::Approx(expected).epsilon(1e-6).scale(1e-9));
      }
    }
    const double dm = first_derivative([](double x) { return ising_metric(x, 1.0); }, 2.0, 1e-3);
    CHECK(rel(ising_christoffel(2.0, 1.0), dm / (2 * ising_metric(2.0, 1.0))) <= 1e-5);
    const double peak = argmax_metric(5.0);
    CHECK(ising_christoffel(peak - 0.05, 5.0) > 0.0);
    CHECK(ising_christoffel(peak + 0.05, 5.0) < 0.0);
    CHECK(std::abs(ising_christoffel(peak, 5.0)) < 1e-3 * std::abs(ising_christoffel(peak - 0.05, 5.0)));
  }

  TEST_CASE("Ising metric peaks near the critical point at low temperature") {
    for (double beta : {5.0, 10.0, 20.0}) CHECK(std::abs(argmax_metric(beta) - 1.0) < 0.05);
    CHECK(std::abs(argmax_metric(0.1) - 1.0) > 0.05);
  }

  TEST_CASE("Ising geodesic slows down near g = 1") {
    const auto field = ising_metric_field(5.0);
    const ChristoffelField chr(field, DerivativeScheme::analytic);
    const GeodesicSolution sol = geodesic_bvp(chr, RVector::Zero(1), RVector::Constant(1, 5.0));
    double min_speed = 1e300, g_at_min = 0.0;
    for (int k = 0; k <= 2000; ++k) {
      const double t = k / 2000.0;
      const double v = std::abs(sol.protocol.velocity(t)(0));
      if (v < min_speed) min_speed = v, g_at_min = sol.protocol.value(t)(0);
    }
    CHECK(g_at_min >= 0.8);
    CHECK(g_at_min <= 1.2);
    CHECK(sol.action <= action(*field, Protocol::linear(RVector::Zero(1), RVector::Constant(1, 5.0))));
  }

  TEST_CASE("Ising analytic Christoffel field matches finite differences") {
    const auto field = ising_metric_field(2.0);
    for (double g : {0.5, 1.0, 3.0}) {
      const RVector x = RVector::Constant(1, g);
      const double a = ChristoffelField(field, DerivativeScheme::analytic)(x).gamma[0](0, 0);
      const double n = ChristoffelField(field, DerivativeScheme::central_difference)(x).gamma[0](0, 0);
      CHECK(rel(n, a) <= 1e-5);
    }
  }

  TEST_CASE("qubit eigenvalues and closed-form metric") {
    const QubitEigenvalues e = qubit_eigenvalues(1.0);
    CHECK(e.diagonal == doctest::Approx(0.31985000422461224).epsilon(1e-9));
    CHECK(e.quantum == doctest::Approx(1.1600513167719477).epsilon(1e-9));
    const RMatrix m = qubit_closed_form_metric(1.0, kPi / 2, 1.0);
    CHECK(m(0, 0) == doctest::Approx(0.31985000422461224).epsilon(1e-9));
    CHECK(m(1, 1) == doctest::Approx(1.1600513167719477).epsilon(1e-9));
    CHECK(m(2, 2) == doctest::Approx(1.1600513167719477).epsilon(1e-9));
    CHECK(std::abs(m(0, 1)) + std::abs(m(0, 2)) + std::abs(m(1, 2)) == 0.0);
    for (double alpha : {0.5, 2.0})
      CHECK(rel(qubit_closed_form_metric(2.0, 1.0, alpha)(1, 1), std::pow(2.0, -alpha) * qubit_closed_form_metric(2.0, 1.0, 0.0)(1, 1)) < 1e-14);
    // beta enters through beta r.
    CHECK(rel(qubit_closed_form_metric(1.0, 1.0, 0.0, 2.0)(0, 0), oracle::lambda_d(2.0)) < 1e-14);
  }

  TEST_CASE("qubit generators keep the Gibbs state stationary across the domain") {
    for (double alpha : {0.0, 1.0, 2.0}) {
      QubitOptions o;
      o.alpha = alpha;
      const ParamModel model = qubit_model(o);
      for (double r : {0.01, 0.5, 3.0})
        for (double theta : {0.2, 1.5, 3.0})
          for (double phi : {0.0, 2.0, 6.0}) {
            const RVector x = (RVector(3) << r, theta, phi).finished();
            const LindbladGenerator gen = model.generator(x);
            CHECK((gen.stationary().density() - oracle::gibbs_expm(model.hamiltonian(x).matrix(), 1.0))
                      .cwiseAbs()
                      .maxCoeff() <= 1e-10);
          }
    }
    CHECK_THROWS_AS(qubit_model().generator((RVector(3) << 1.0, 1.0, 7.0).finished()), DomainError);
  }

  TEST_CASE("closed-form fields agree with the assembled metrics in every chart") {
    const ParamModel xz = qubit_xz_model();
    const auto xz_field = qubit_closed_form_field(QubitChart::xz);
    for (double r : {0.2, 1.0, 3.0})
      for (double theta : {-2.0, 0.0, 0.7}) {
        const RVector x = (RVector(2) << r, theta).finished();
        CHECK((metric_matrix(xz, x) - xz_field->metric(x)).cwiseAbs().maxCoeff() <= 1e-8);
      }
    const ParamModel radial = qubit_radial_model({}, 0.4, 1.0);
    const auto radial_field = qubit_closed_form_field(QubitChart::radial);
    for (double r : {0.2, 1.0, 3.0}) {
      const RVector x = RVector::Constant(1, r);
      CHECK(std::abs(metric_matrix(radial, x)(0, 0) - radial_field->metric(x)(0, 0)) <= 1e-8);
    }
  }

  TEST_CASE("energy qubit: linear versus geodesic") {
    CHECK(linear_action_closed_form(2.0) == doctest::Approx(1.928055).epsilon(1e-6));
    CHECK(geodesic_action_closed_form(2.0) == doctest::Approx(1.6945800).epsilon(1e-7));
    CHECK(linear_action_closed_form(5.0) == doctest::Approx(4.999546).epsilon(1e-6));
    CHECK(geodesic_action_closed_form(5.0) == doctest::Approx(2.425247).epsilon(1e-6));
    CHECK(geodesic_action_closed_form(2.0) == doctest::Approx(oracle::w_geodesic(2.0)).epsilon(1e-14));

    const LinearVsGeodesic r2 = linear_vs_geodesic_report(2.0);
    CHECK(r2.w_linear == doctest::Approx(1.928055).epsilon(1e-5));
    CHECK(r2.w_geodesic == doctest::Approx(oracle::w_geodesic(2.0)).epsilon(1e-5));
    CHECK(r2.ratio == doctest::Approx(1.13778).epsilon(1e-5));

    const LinearVsGeodesic r5 = linear_vs_geodesic_report(5.0);
    CHECK(r5.w_linear == doctest::Approx(4.999546).epsilon(1e-5));
    CHECK(r5.w_geodesic == doctest::Approx(2.425247).epsilon(1e-5));
    CHECK(r5.ratio == doctest::Approx(2.0615).epsilon(1e-4));

    const LinearVsGeodesic r8 = linear_vs_geodesic_report(8.0);
    CHECK(rel(r8.w_geodesic, kPi * kPi / 4) < 0.01);
    CHECK(r8.ratio > r5.ratio);
  }

  TEST_CASE("closed forms carry beta and tau") {
    // W_lin = tau E tanh(beta E); geodesic = tau gd(beta E)^2 / beta.
    CHECK(linear_action_closed_form(1.5, 2.0, 3.0) == doctest::Approx(3.0 * 1.5 * std::tanh(3.0)));
    const double gd = std::atan(std::sinh(3.0));
    CHECK(geodesic_action_closed_form(1.5, 2.0, 3.0) == doctest::Approx(3.0 * gd * gd / 2.0));
    const ModelMetricField field(energy_qubit_model(2.0, 3.0), MetricKind::full_lindblad);
    const Protocol lin = Protocol::linear(RVector::Zero(1), RVector::Constant(1, 1.5));
    CHECK(action(field, lin, 2.0) == doctest::Approx(linear_action_closed_form(1.5, 2.0, 3.0)).epsilon(1e-8));
  }
}
