#include <doctest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "thermolen/errors.hpp"
#include "thermolen/geodesic.hpp"
#include "thermolen/models.hpp"
#include "thermolen/quadrature.hpp"

using namespace thermolen;
using oracle::kPi;
using oracle::rel;

namespace {

std::shared_ptr<const MetricField> euclidean(int d) {
  return std::make_shared<FunctionMetricField>(d, Domain::unbounded(d),
                                               [d](const RVector&) { return RMatrix(RMatrix::Identity(d, d)); });
}

/// m(E) = sech^2(E): the KMB metric of E sigma_z at beta = 1.
std::shared_ptr<const MetricField> sech2_field() {
  return std::make_shared<FunctionMetricField>(
      1, Domain::unbounded(1),
      [](const RVector& x) {
        const double s = 1.0 / std::cosh(x(0));
        return RMatrix::Constant(1, 1, s * s);
      },
      [](const RVector& x) {
        const double s = 1.0 / std::cosh(x(0));
        return std::vector<RMatrix>{RMatrix::Constant(1, 1, -2.0 * s * s * std::tanh(x(0)))};
      });
}

Protocol perturbed(const Protocol& base, const RVector& dir, double amp, int mode) {
  return Protocol::sampled(
      [&](double t) { RVector v = base.value(t) + amp * std::sin(mode * kPi * t) * dir; return v; },
      [&](double t) { RVector v = base.velocity(t) + amp * mode * kPi * std::cos(mode * kPi * t) * dir; return v; },
      401);
}

}  // namespace

TEST_SUITE("geodesic") {
  TEST_CASE("protocol construction and interpolation") {
    const RVector a = (RVector(2) << 0.0, 1.0).finished();
    const RVector b = (RVector(2) << 2.0, -1.0).finished();
    const Protocol lin = Protocol::linear(a, b, 11);
    CHECK(lin.kind() == ProtocolKind::linear);
    CHECK((lin.value(0.0) - a).norm() == 0.0);
    CHECK((lin.value(1.0) - b).norm() <= 1e-15);
    CHECK((lin.value(0.37) - (a + 0.37 * (b - a))).norm() <= 1e-14);
    CHECK((lin.velocity(0.61) - (b - a)).norm() <= 1e-14);
    CHECK(lin.acceleration(0.5).norm() <= 1e-12);

    // Hermite interpolation reproduces cubics exactly.
    const Protocol cubic = Protocol::sampled([](double t) { return RVector::Constant(1, t * t * t - t); },
                                             [](double t) { return RVector::Constant(1, 3 * t * t - 1); }, 5);
    for (double t : {0.1, 0.33, 0.9}) {
      CHECK(cubic.value(t)(0) == doctest::Approx(t * t * t - t).epsilon(1e-14));
      CHECK(cubic.velocity(t)(0) == doctest::Approx(3 * t * t - 1).epsilon(1e-13));
      CHECK(cubic.acceleration(t)(0) == doctest::Approx(6 * t).epsilon(1e-12));
    }
    CHECK_THROWS_AS(cubic.value(1.5), DomainError);
    CHECK_THROWS_AS(Protocol({0.0, 0.5}, {a, b}, {a, b}), ValidationError);
    CHECK_THROWS_AS(Protocol({0.0, 0.0, 1.0}, {a, a, b}, {a, a, b}), ValidationError);
    CHECK_THROWS_AS(Protocol::linear(a, RVector::Zero(3)), ValidationError);
    CHECK(to_string(ProtocolKind::geodesic) == "geodesic");
  }

  TEST_CASE("straight lines under a constant metric") {
    const ChristoffelField chr(euclidean(2));
    const RVector x0 = (RVector(2) << 1.0, -2.0).finished();
    const RVector v0 = (RVector(2) << 0.5, 3.0).finished();
    IvpDiagnostics diag;
    const Protocol p = geodesic_ivp(chr, x0, v0, {}, &diag);
    for (double t : {0.0, 0.25, 0.8, 1.0}) CHECK((p.value(t) - (x0 + t * v0)).norm() <= 1e-10);
    CHECK(diag.action == doctest::Approx(v0.squaredNorm()).epsilon(1e-10));
    CHECK(diag.length == doctest::Approx(v0.norm()).epsilon(1e-10));
  }

  TEST_CASE("one-dimensional geodesics conserve m v^2") {
    const ChristoffelField chr(sech2_field());
    IvpDiagnostics diag;
    // gd(x(t)) = gd(0.2) + t v0 / cosh(0.2) stays below pi/2 on [0, 1] for v0 = 1.
    const Protocol p = geodesic_ivp(chr, RVector::Constant(1, 0.2), RVector::Constant(1, 1.0), {}, &diag);
    const double e0 = 1.0 / std::pow(std::cosh(0.2), 2);
    for (int k = 0; k <= 20; ++k) {
      const double t = k / 20.0;
      const double m = 1.0 / std::pow(std::cosh(p.value(t)(0)), 2);
      CHECK(m * p.velocity(t)(0) * p.velocity(t)(0) == doctest::Approx(e0).epsilon(1e-5));
    }
    CHECK(diag.energy_drift <= 1e-5);
  }

  TEST_CASE("radial qubit geodesic has constant speed in the arclength variable") {
    QubitOptions o;
    o.alpha = 0.0;
    const ChristoffelField chr(qubit_closed_form_field(QubitChart::radial, o));
    const Protocol p = geodesic_ivp(chr, RVector::Constant(1, 0.5), RVector::Constant(1, 1.0));
    auto ell = [](double r) {
      return integrate_composite([](double x) { return std::sqrt(oracle::lambda_d(x)); }, 0.1, r, 200, 8);
    };
    const double l0 = ell(p.value(0.0)(0));
    const double l1 = ell(p.value(1.0)(0));
    for (double t : {0.2, 0.5, 0.7}) CHECK(ell(p.value(t)(0)) == doctest::Approx(l0 + t * (l1 - l0)).epsilon(1e-7));
  }

  TEST_CASE("leaving the domain raises with the exit time") {
    Domain dom;
    dom.bounds = {Interval{0.0, 1.0, true, true}};
    auto field = std::make_shared<FunctionMetricField>(1, dom, [](const RVector&) { return RMatrix::Identity(1, 1); });
    try {
      geodesic_ivp(ChristoffelField(field), RVector::Constant(1, 0.5), RVector::Constant(1, 2.0));
      FAIL("expected a domain exit");
    } catch (const DomainExitError& e) {
      CHECK(e.exit_time() == doctest::Approx(0.25).epsilon(0.05));
    }
  }

  TEST_CASE("boundary value problem under the Euclidean metric is the chord") {
    const ChristoffelField chr(euclidean(3));
    const RVector a = (RVector(3) << 0.0, 1.0, 2.0).finished();
    const RVector b = (RVector(3) << 1.0, -1.0, 0.5).finished();
    const GeodesicSolution sol = geodesic_bvp(chr, a, b);
    CHECK(sol.action == doctest::Approx((b - a).squaredNorm()).epsilon(1e-9));
    CHECK(sol.length == doctest::Approx((b - a).norm()).epsilon(1e-9));
    CHECK(sol.diagnostics.residual <= 1e-7);
    CHECK((sol.protocol.end() - b).norm() <= 1e-9);
    CHECK(length(*euclidean(3), Protocol::linear(a, b)) == doctest::Approx((b - a).norm()).epsilon(1e-12));
    const GeodesicSolution zero = geodesic_bvp(chr, a, a);
    CHECK(zero.action == 0.0);
  }

  TEST_CASE("KMB qubit geodesic action and length") {
    const auto field = sech2_field();
    const ChristoffelField chr(field);
    for (double ef : {0.5, 1.0, 2.0, 5.0}) {
      const GeodesicSolution sol = geodesic_bvp(chr, RVector::Zero(1), RVector::Constant(1, ef));
      CHECK(sol.action == doctest::Approx(oracle::w_geodesic(ef)).epsilon(1e-7));
      CHECK(sol.length == doctest::Approx(std::sqrt(oracle::w_geodesic(ef))).epsilon(1e-7));
      CHECK(sol.action == doctest::Approx(sol.length * sol.length).epsilon(1e-6));
      CHECK(sol.diagnostics.energy_drift <= 1e-5);
      const Protocol lin = Protocol::linear(RVector::Zero(1), RVector::Constant(1, ef));
      CHECK(action(*field, lin) == doctest::Approx(oracle::w_linear(ef)).epsilon(1e-8));
      CHECK(action(*field, lin) >= sol.action);
      CHECK(action(*field, lin, 2.0) == doctest::Approx(2.0 * action(*field, lin)));
    }
  }

  TEST_CASE("action is bounded below by length squared and is zero for a constant protocol") {
    const auto field = qubit_closed_form_field(QubitChart::xz);
    const RVector a = (RVector(2) << 1.0, 0.0).finished();
    const RVector b = (RVector(2) << std::sqrt(2.0), kPi / 4).finished();
    const Protocol lin = Protocol::linear(a, b);
    const double l = length(*field, lin);
    CHECK(action(*field, lin) >= l * l * (1 - 1e-12));
    CHECK(action(*field, Protocol::linear(a, a)) == 0.0);
    for (double s : speed_profile(*field, lin)) CHECK(s > 0.0);
  }

  TEST_CASE("length is invariant under monotone reparametrization") {
    const auto field = qubit_closed_form_field(QubitChart::xz);
    const RVector a = (RVector(2) << 0.7, -0.4).finished();
    const RVector b = (RVector(2) << 2.0, 1.0).finished();
    const Protocol lin = Protocol::linear(a, b, 401);
    const double l = length(*field, lin);
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (int trial = 0; trial < 5; ++trial) {
      const double c1 = u(rng), c2 = u(rng);
      // phi' >= 1 - 3 pi max|c| > 0.5, so phi stays monotone.
      auto phi = [=](double s) { return s + c1 * std::sin(kPi * s) + c2 * std::sin(2 * kPi * s); };
      auto dphi = [=](double s) { return 1 + c1 * kPi * std::cos(kPi * s) + 2 * c2 * kPi * std::cos(2 * kPi * s); };
      const Protocol re = lin.reparametrized(phi, dphi, 401);
      CHECK(length(*field, re) == doctest::Approx(l).epsilon(1e-6));
    }
  }

  TEST_CASE("qubit xz geodesic is locally minimal and refinement-stable") {
    const auto field = qubit_closed_form_field(QubitChart::xz);
    const ChristoffelField chr(field, DerivativeScheme::central_difference);
    const RVector a = (RVector(2) << 1.0, 0.0).finished();
    const RVector b = (RVector(2) << std::sqrt(2.0), kPi / 4).finished();
    const GeodesicSolution sol = geodesic_bvp(chr, a, b);
    const double w = sol.action;
    CHECK(w <= action(*field, Protocol::linear(a, b)));
    CHECK(sol.diagnostics.knot_action == doctest::Approx(w).epsilon(1e-6));
    CHECK(w == doctest::Approx(sol.length * sol.length).epsilon(1e-6));
    std::mt19937_64 rng(103);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      RVector dir(2);
      dir << n(rng), n(rng);
      dir.normalize();
      const Protocol p = perturbed(sol.protocol, dir, 0.02, 1 + trial % 3);
      CHECK(action(*field, p) >= w);
    }
    BvpOptions fine;
    fine.ivp.n_knots = 401;
    const GeodesicSolution refined = geodesic_bvp(chr, a, b, fine);
    CHECK(refined.action == doctest::Approx(w).epsilon(1e-5));
  }

  TEST_CASE("shooting failure reports the best residual") {
    const ChristoffelField chr(sech2_field());
    BvpOptions opts;
    opts.max_iterations = 1;
    opts.tolerance = 1e-30;
    opts.target = 1e-40;
    opts.start_scales = {0.1};
    try {
      geodesic_bvp(chr, RVector::Zero(1), RVector::Constant(1, 3.0), opts);
      FAIL("expected non-convergence");
    } catch (const ConvergenceError& e) {
      CHECK(e.best_residual() > 0.0);
      CHECK(std::isfinite(e.best_residual()));
    }
  }
}
