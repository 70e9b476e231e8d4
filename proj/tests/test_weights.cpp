#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nipot/weights.hpp"

using namespace nipot;

namespace {

// W(B(e1, r)) for power(eps) on S^3. With x = η1 uniform on the unit disk the weight is
// (1 - |x|^2)^eps and the ball is {|1 - x| < r}; polar midpoint rule about x = 1.
double polar_cap_mass(double eps, double r) {
  const int nr = 3000, nphi = 3000;
  double total = 0;
  for (int i = 0; i < nr; ++i) {
    const double rho = (i + 0.5) * r / nr;
    for (int k = 0; k < nphi; ++k) {
      const double phi = (k + 0.5) * 2 * std::numbers::pi / nphi;
      const Complex x = 1.0 - std::polar(rho, phi);
      const double m = std::norm(x);
      if (m >= 1) continue;
      total += std::pow(1 - m, eps) * rho * (r / nr) * (2 * std::numbers::pi / nphi);
    }
  }
  return total / std::numbers::pi;
}

}  // namespace

TEST_CASE("weighted mass and averages") {
  const auto g = build_grid(2, 16);
  const auto one = WeightField::constant(g, 1.0);
  CHECK(weighted_mass(one, g.all_indices(), g) == doctest::Approx(1.0));
  const auto c = WeightField::constant(g, 3.5);
  const auto b = ball(g, g.node(200), 0.4);
  CHECK(weighted_mass(c, b, g) == doctest::Approx(3.5 * sigma(g, b)));
  CHECK(ball_average(c, b, g) == doctest::Approx(3.5));
  const auto pw = WeightField::power(g, 0.5);
  CHECK(ball_average(pw, g.all_indices(), g) ==
        doctest::Approx(weighted_mass(pw, g.all_indices(), g)));
  CHECK_THROWS_WITH_AS(ball_average(c, {}, g), "empty ball", InvalidArgument);
}

TEST_CASE("power weight closed form and guards") {
  const auto g = build_grid(2, 16);
  const auto pw = WeightField::power(g, 0.3);
  for (std::size_t j = 0; j < g.size(); j += 11)
    CHECK(pw[j] == doctest::Approx(std::pow(1 - std::norm(g.node(j).c[0]), 0.3)).epsilon(1e-10));
  CHECK(pw.descriptor().kind == WeightDescriptor::Kind::power);
  CHECK_THROWS_AS(WeightField::power(build_grid(1, 16), 0.3), InvalidArgument);
  CHECK_THROWS_AS(WeightField::custom({1.0, -1.0}), InvalidArgument);
  CHECK_FALSE(WeightField::custom({1.0, 2.0}).rotation_invariant());
}

TEST_CASE("power weight mass on a polar cap") {
  const double exact = polar_cap_mass(0.5, 0.5);
  const auto g = build_grid(2, 64);
  const auto pole = sphere_point(Complex(1), Complex(0));
  const double m = weighted_mass(WeightField::power(g, 0.5), ball(g, pole, 0.5), g);
  CHECK(m > 0);
  CHECK(m == doctest::Approx(exact).epsilon(0.05));
  // a 4x finer grid moves the average by little
  const auto g2 = build_grid(2, 128);
  const double a1 = ball_average(WeightField::power(g, 0.5), ball(g, pole, 0.5), g);
  const double a2 = ball_average(WeightField::power(g2, 0.5), ball(g2, pole, 0.5), g2);
  CHECK(a1 == doctest::Approx(a2).epsilon(0.05));
}

TEST_CASE("dual weight") {
  const auto g = build_grid(2, 8);
  CHECK_THROWS_AS(dual_weight(WeightField::constant(g, 1), 1.0), InvalidArgument);
  const auto d1 = dual_weight(WeightField::constant(g, 1), 3.0);
  for (double v : d1.values()) CHECK(v == doctest::Approx(1.0));
  const auto pw = WeightField::power(g, 0.4);
  const auto d2 = dual_weight(pw, 2.0);
  const auto neg = WeightField::power(g, -0.4);
  for (std::size_t j = 0; j < g.size(); ++j) {
    CHECK(d2[j] == doctest::Approx(1.0 / pw[j]));
    CHECK(d2[j] == doctest::Approx(neg[j]));
  }
  for (double p : {1.3, 1.5, 3.0}) {
    const auto back = dual_weight(dual_weight(pw, p), dual_exponent(p));
    double worst = 0;
    for (std::size_t j = 0; j < g.size(); ++j) worst = std::max(worst, std::abs(back[j] - pw[j]) / pw[j]);
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("A_p constant") {
  const auto g = build_grid(2, 16);
  const auto fam = BallFamily::all_nodes(g, BallFamily::dyadic_radii(1, 3));
  CHECK(ap_constant(WeightField::constant(g, 2.0), 2.0, g, fam).value == 1.0);
  const auto pw = WeightField::power(g, 0.5);
  double prev = 1e300;
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    const double a = ap_constant(pw, p, g, fam).value;
    CHECK(a >= 1.0);
    CHECK(a <= prev * (1 + 1e-12));
    prev = a;
  }
  BallFamily nowhere;
  nowhere.balls.push_back({g.node(0), 1e-9 * 0.5});
  nowhere.balls.push_back({sphere_point(Complex(std::sqrt(0.5)), Complex(std::sqrt(0.5))), 1e-6});
  const auto est = ap_constant(pw, 2.0, g, nowhere);
  CHECK(est.evaluated == 1);
  CHECK(est.skipped == 1);
  BallFamily empty_only;
  empty_only.balls.push_back({sphere_point(Complex(std::sqrt(0.5)), Complex(std::sqrt(0.5))), 1e-6});
  CHECK_THROWS_AS(ap_constant(pw, 2.0, g, empty_only), InvalidArgument);
  CHECK_THROWS_AS(ap_constant(pw, 1.0, g, fam), InvalidArgument);
}

TEST_CASE("A_2 of power(0.5) is stable under refinement") {
  auto a2 = [](std::size_t N) {
    const auto g = build_grid(2, N);
    const auto w = WeightField::power(g, 0.5);
    return ap_constant(w, 2.0, g, BallFamily::default_for(g, w)).value;
  };
  const double a32 = a2(32), a64 = a2(64);
  CHECK(a32 < 5);
  CHECK(a64 == doctest::Approx(a32).epsilon(0.15));
}

TEST_CASE("doubling order") {
  const auto g1 = build_grid(1, 4096);
  const auto one1 = WeightField::constant(g1, 1.0);
  const auto fam1 = BallFamily::orbit_representatives(g1, BallFamily::dyadic_radii(3, 6));
  CHECK(doubling_order(one1, g1, fam1).tau == doctest::Approx(1.0).epsilon(0.1));

  const auto g = build_grid(2, 64);
  const auto fam = BallFamily::singular_circle({0.0, 0.3, 1.1}, BallFamily::dyadic_radii(2, 4));
  double prev = -1;
  for (double eps : {-0.5, 0.0, 0.5}) {
    const auto w = eps == 0.0 ? WeightField::constant(g, 1.0) : WeightField::power(g, eps);
    const double tau = doubling_order(w, g, fam).tau;
    CHECK(tau == doctest::Approx(2.0 + eps).epsilon(0.2 / (2.0 + eps)));
    CHECK(tau > prev);
    prev = tau;
  }
  BallFamily too_big;
  too_big.balls.push_back({g.node(0), 0.5});
  CHECK_THROWS_AS(doubling_order(WeightField::constant(g, 1.0), g, too_big), InvalidArgument);
}

TEST_CASE("tau hat closed forms") {
  const auto g = build_grid(2, 16);
  CHECK(tau_hat(WeightField::constant(g, 1.0), g) == 2.0);
  CHECK(tau_hat(WeightField::power(g, 0.3), g) == doctest::Approx(2.3));
  CHECK(tau_hat(WeightField::constant(build_grid(1, 16), 1.0), build_grid(1, 16)) == 1.0);
}

TEST_CASE("tail bound ratio, unit weight") {
  const auto g = build_grid(1, 4096);
  const auto one = WeightField::constant(g, 1.0);
  const double r = 1.0 / 64;
  CHECK(tail_bound_ratio(one, 2.0, 1.0, g.node(0), r, g, TailSide::upper) ==
        doctest::Approx(1.0).epsilon(0.15));
  CHECK_THROWS_AS(tail_bound_ratio(one, 2.0, 1.0, g.node(0), 0.6, g, TailSide::upper),
                  InvalidArgument);
}

TEST_CASE("tail bound ratio, power weight") {
  const auto g = build_grid(2, 64);
  const auto w = WeightField::power(g, 0.5);
  const auto zeta = sphere_point(Complex(1), Complex(0));
  std::vector<double> good, bad;
  for (int k = 1; k <= 6; ++k) {
    const double r = std::ldexp(1.0, -k);
    good.push_back(tail_bound_ratio(w, 2.0, 1.0, zeta, r, g, TailSide::upper));
    bad.push_back(tail_bound_ratio(w, 2.0, 0.25, zeta, r, g, TailSide::upper));
  }
  for (double v : good) CHECK(v < 3.0);
  for (std::size_t i = 1; i < bad.size(); ++i) CHECK(bad[i] > bad[i - 1]);
  CHECK(bad.back() > good.back());
}
