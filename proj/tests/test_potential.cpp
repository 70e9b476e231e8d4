#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nipot/potential.hpp"
#include "nipot/suites.hpp"

using namespace nipot;

namespace {

// (1/π)∫_0^π (2 sin(θ/2))^{-a} dθ by singularity subtraction: θ^{-a} g(θ) with g(0) = 1.
double circle_riesz_of_one(double a) {
  const int M = 20000;
  const double h = std::numbers::pi / M;
  double acc = 0;
  for (int i = 0; i <= M; ++i) {
    const double th = i * h;
    const double v = i == 0 ? 0.0 : std::pow(2 * std::sin(th / 2), -a) - std::pow(th, -a);
    acc += (i == 0 || i == M ? 1 : (i % 2 ? 4 : 2)) * v;
  }
  acc *= h / 3;
  acc += std::pow(std::numbers::pi, 1 - a) / (1 - a);
  return acc / std::numbers::pi;
}

double brute_ball_mass(const SphereMeasure& nu, const QuadratureGrid& g, const Point& z, double r) {
  double m = 0;
  for (const auto& [j, mass] : nu.atoms)
    if (gauge(z, g.node(j)) < r) m += mass;
  return m;
}

SphereMeasure two_atoms(const QuadratureGrid& g) {
  return SphereMeasure{{{0, 1.0}, {g.size() / 2, 0.5}}};
}

}  // namespace

TEST_CASE("potential params validation") {
  PotentialParams pp;
  pp.p = 2;
  pp.s = 0.3;
  CHECK_NOTHROW(pp.validate(1));
  pp.s = 1.0;
  CHECK_THROWS_AS(pp.validate(1), InvalidArgument);
  CHECK_NOTHROW(pp.validate(2));
  pp.p = 1.0;
  CHECK_THROWS_AS(pp.validate(2), InvalidArgument);
  pp.p = 3.0;
  pp.lambda = 1.0;
  CHECK_THROWS_AS(pp.validate(2), InvalidArgument);
  CHECK(PotentialParams{3.0, 0.5}.pprime() == doctest::Approx(1.5));
}

TEST_CASE("sphere measure") {
  const auto g = build_grid(1, 16);
  std::vector<double> masses(16, 0.0);
  masses[3] = 2;
  masses[7] = 0.5;
  const auto nu = SphereMeasure::from_masses(masses);
  CHECK(nu.atoms.size() == 2);
  CHECK(nu.total() == doctest::Approx(2.5));
  CHECK(nu.scaled(2).total() == doctest::Approx(5));
  CHECK(SphereMeasure::from_density(g, std::vector<double>(16, 1.0)).total() == doctest::Approx(1.0));
  CHECK_THROWS_AS((SphereMeasure{{{3, 1.0}, {3, 1.0}}}.validate(g)), InvalidArgument);
  CHECK_THROWS_AS((SphereMeasure{{{30, 1.0}}}.validate(g)), InvalidArgument);
  CHECK_THROWS_AS((SphereMeasure{{{1, -1.0}}}.validate(g)), InvalidArgument);
}

TEST_CASE("riesz kernel of the constant") {
  CHECK(riesz_of_one(1, 0.3) == doctest::Approx(circle_riesz_of_one(0.7)).epsilon(1e-8));
  CHECK(riesz_of_one(1, 0.6) == doctest::Approx(circle_riesz_of_one(0.4)).epsilon(1e-8));
  for (std::size_t N : {256u, 1024u}) {
    const auto g = build_grid(1, N);
    const RieszOperator op(g, 0.3);
    const auto k = op.apply_function(std::vector<double>(N, 1.0));
    for (double v : k) CHECK(v == doctest::Approx(riesz_of_one(1, 0.3)).epsilon(1e-12));
  }
  const auto g2 = build_grid(2, 16);
  const RieszOperator op2(g2, 1.2);
  const auto k2 = op2.apply_function(std::vector<double>(g2.size(), 1.0));
  for (std::size_t j = 0; j < g2.size(); j += 97) CHECK(k2[j] == doctest::Approx(riesz_of_one(2, 1.2)).epsilon(1e-12));
}

TEST_CASE("riesz operator entries are positive and symmetric up to weights") {
  const auto g = build_grid(2, 8);
  const RieszOperator op(g, 0.8);
  for (std::size_t i = 0; i < g.size(); i += 13)
    for (std::size_t j = 0; j < g.size(); j += 7) {
      CHECK(op.entry(i, j) > 0);
      if (i != j && gauge(g.node(i), g.node(j)) > 2 * g.spacing())
        CHECK(op.entry(i, j) == doctest::Approx(std::pow(gauge(g.node(i), g.node(j)), -(2 - 0.8))));
    }
}

TEST_CASE("riesz apply examples") {
  const auto g = build_grid(1, 64);
  const SphereMeasure delta{{{0, 1.0}}};
  const double th = 2 * std::asin(0.25);
  const std::vector<Point> target = {sphere_point(std::polar(1.0, th))};
  CHECK(riesz_apply(delta, target, 0.3, g)[0] == doctest::Approx(std::pow(0.5, -0.7)));
  const std::vector<Point> origin = {Point{1, {Complex(0), Complex(0)}}};
  CHECK(riesz_apply(std::vector<double>(64, 1.0), origin, 0.3, g)[0] == doctest::Approx(1.0));
  // punctured sums approach the exact value from below as the grid refines
  double prev_err = 1e300;
  for (std::size_t N : {256u, 1024u, 4096u}) {
    const auto gn = build_grid(1, N);
    const std::vector<Point> at_node = {gn.node(0)};
    const double v = riesz_apply(std::vector<double>(N, 1.0), at_node, 0.3, gn)[0];
    const double err = riesz_of_one(1, 0.3) - v;
    CHECK(err > 0);
    CHECK(err < prev_err);
    prev_err = err;
  }
}

TEST_CASE("cauchy apply") {
  const auto g = build_grid(1, 256);
  const std::vector<double> ones(256, 1.0);
  std::vector<Complex> gvals(ones.begin(), ones.end());
  const std::vector<Point> origin = {Point{1, {Complex(0), Complex(0)}}};
  CHECK(std::abs(cauchy_apply(gvals, origin, 0.3, g)[0] - 1.0) < 1e-14);
  const std::vector<Point> half = {Point{1, {Complex(0.5), Complex(0)}}};
  CHECK(std::abs(cauchy_apply(gvals, half, 0.5, g)[0] - 1.0) < 1e-12);
  const std::vector<Point> edge = {g.node(0)};
  CHECK_THROWS_AS(cauchy_apply(gvals, edge, 0.5, g), InvalidArgument);
  // pointwise domination by the Riesz potential of |g|
  Rng rng(4);
  const auto g2 = build_grid(2, 8);
  std::vector<Complex> cg(g2.size());
  std::vector<double> ag(g2.size());
  for (std::size_t j = 0; j < g2.size(); ++j) {
    cg[j] = Complex(rng.normal(), rng.normal());
    ag[j] = std::abs(cg[j]);
  }
  std::vector<Point> targets;
  for (int t = 0; t < 20; ++t) targets.push_back(random_sphere_point(rng, 2).scaled(rng.uniform(0, 0.999)));
  const auto c = cauchy_apply(cg, targets, 0.7, g2);
  const auto k = riesz_apply(ag, targets, 0.7, g2);
  for (std::size_t t = 0; t < targets.size(); ++t) CHECK(std::abs(c[t]) <= k[t] * (1 + 1e-12));
}

TEST_CASE("energy and discrete Fubini") {
  const auto g = build_grid(2, 16);
  const RieszOperator op(g, 0.9);
  const auto w = WeightField::power(g, 0.3);
  PotentialParams pp{1.5, 0.9};
  CHECK(energy(SphereMeasure{}, pp, w, op) == 0.0);
  for (double x : nonlinear_potential(SphereMeasure{}, pp, w, op)) CHECK(x == 0.0);
  Rng rng(9);
  for (int t = 0; t < 5; ++t) {
    const auto nu = random_sparse_measure(rng, g, 6, 0.3);
    for (double p : {1.5, 2.0, 3.0}) {
      pp.p = p;
      const double e = energy(nu, pp, w, op);
      CHECK(potential_integral(nu, pp, w, op) == doctest::Approx(e).epsilon(1e-12));
      CHECK(energy(nu.scaled(3.0), pp, w, op) == doctest::Approx(std::pow(3.0, pp.pprime()) * e).epsilon(1e-12));
    }
  }
}

TEST_CASE("p = 2 nonlinear potential is the iterated Riesz operator") {
  const auto g = build_grid(1, 128);
  const RieszOperator op(g, 0.4);
  const auto w = WeightField::constant(g, 1.0);
  const auto nu = two_atoms(g);
  const auto u = nonlinear_potential(nu, PotentialParams{2.0, 0.4}, w, op);
  const auto k = op.apply_measure(nu);
  std::vector<double> kk(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double acc = 0;
    for (std::size_t j = 0; j < g.size(); ++j) acc += op.entry(i, j) * g.weight(j) * k[j];
    kk[i] = acc;
  }
  for (std::size_t i = 0; i < g.size(); i += 5) CHECK(u[i] == doctest::Approx(kk[i]).epsilon(1e-12));
}

TEST_CASE("wolff potential of an atom at its centre") {
  const auto g = build_grid(1, 1024);
  const auto w = WeightField::constant(g, 1.0);
  const SphereMeasure delta{{{0, 1.0}}};
  const PotentialParams pp{2.0, 0.3};
  double prev = 0;
  for (int L = 4; L <= 8; ++L) {
    double expect = 0;
    for (int l = 1; l <= L; ++l) expect += std::pow(2.0, 0.4 * l) * std::log(2.0);
    const double v = wolff_potential(delta, pp, w, g, g.node(0), L);
    CHECK(v == doctest::Approx(expect).epsilon(1e-12));
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(wolff_potential(SphereMeasure{}, pp, w, g, g.node(0), 6) == 0.0);
}

TEST_CASE("wolff potential against brute-force ball sums") {
  const auto g = build_grid(2, 16);
  const auto w = WeightField::power(g, -0.3);
  Rng rng(2);
  const auto nu = random_sparse_measure(rng, g, 5, 0.2);
  const PotentialParams pp{1.5, 1.2};
  const auto dual = dual_weight(w, pp.p);
  const double pp1 = pp.pprime() - 1;
  for (std::size_t j : {0u, 100u, 777u}) {
    const auto& z = g.node(j);
    double expect = 0;
    for (int l = 1; l <= 6; ++l) {
      const double t = std::ldexp(1.0, -l);
      const auto b = ball(g, z, t);
      const double m = brute_ball_mass(nu, g, z, t);
      if (m > 0) expect += std::pow(m / std::pow(t, 2 - 1.8), pp1) * ball_average(dual, b, g) * std::log(2.0);
    }
    CHECK(wolff_potential(nu, pp, w, g, z, 6) == doctest::Approx(expect).epsilon(1e-12));
  }
  const auto nodes = wolff_potential_nodes(nu, pp, w, g, 6, {0, 100});
  CHECK(nodes[1] == doctest::Approx(wolff_potential(nu, pp, w, g, g.node(100), 6)).epsilon(1e-12));
}

TEST_CASE("wolff ratio invariances and spread guard") {
  const auto g = build_grid(1, 512);
  const RieszOperator op(g, 0.3);
  const auto w = WeightField::constant(g, 1.0);
  Rng rng(1);
  const auto nu = random_density_measure(rng, g);
  const int L = spread_level(nu, g);
  CHECK(std::ldexp(1.0, -L) <= min_separation(nu, g));
  for (double p : {1.5, 2.0, 3.0}) {
    const PotentialParams pp{p, 0.3};
    const auto r = wolff_ratio(nu, pp, w, op, L);
    CHECK(wolff_ratio(nu.scaled(7.0), pp, w, op, L).ratio == doctest::Approx(r.ratio).epsilon(1e-10));
    CHECK(wolff_ratio(nu, pp, w.scaled(0.2), op, L).ratio == doctest::Approx(r.ratio).epsilon(1e-10));
    CHECK(wolff_potential(nu.scaled(2.0), pp, w, g, g.node(3), L) ==
          doctest::Approx(std::pow(2.0, pp.pprime() - 1) * wolff_potential(nu, pp, w, g, g.node(3), L)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(wolff_ratio(nu, PotentialParams{2.0, 0.3}, w, op, 4), InvalidArgument);
}

TEST_CASE("wolff ratio for the uniform measure") {
  const PotentialParams pp{2.0, 0.3};
  std::vector<double> ratios;
  for (std::size_t N : {512u, 1024u}) {
    const auto g = build_grid(1, N);
    const RieszOperator op(g, 0.3);
    const auto w = WeightField::constant(g, 1.0);
    const auto nu = SphereMeasure::from_density(g, std::vector<double>(N, 1.0));
    ratios.push_back(wolff_ratio(nu, pp, w, op, spread_level(nu, g)).ratio);
  }
  for (double r : ratios) {
    CHECK(r >= 0.02);
    CHECK(r <= 50);
  }
  CHECK(ratios[1] == doctest::Approx(ratios[0]).epsilon(0.2));
}

TEST_CASE("wolff extension") {
  const auto g = build_grid(1, 512);
  const auto w = WeightField::constant(g, 1.0);
  Rng rng(8);
  const auto nu = random_density_measure(rng, g);
  const int L = spread_level(nu, g);
  PotentialParams pp{2.0, 0.3};
  pp.q = 1;
  CHECK(wolff_extension_lhs(SphereMeasure{}, pp, w, g, L) == 0.0);
  const double lhs1 = wolff_extension_lhs(nu, pp, w, g, L);
  const RieszOperator op(g, 0.3);
  const double iw = wolff_ratio(nu, pp, w, op, L).wolff_integral;
  CHECK(lhs1 / iw > 0.01);
  CHECK(lhs1 / iw < 100);
  // ℓ^q monotonicity holds up to the factor (log 2)^{p'(1/q - 1/q0)} from the dyadic measure
  double prev = lhs1;
  double prev_q = 1;
  for (double q : {2.0, 4.0}) {
    pp.q = q;
    const double v = wolff_extension_lhs(nu, pp, w, g, L);
    CHECK(v <= prev * std::pow(std::log(2.0), pp.pprime() * (1 / q - 1 / prev_q)) * (1 + 1e-12));
    prev = v;
    prev_q = q;
  }
  pp.q = 0;
  CHECK_THROWS_AS(wolff_extension_lhs(nu, pp, w, g, L), InvalidArgument);
}

TEST_CASE("holomorphic potentials at the origin") {
  const auto g = build_grid(1, 256);
  const auto w = WeightField::constant(g, 1.0);
  Rng rng(6);
  const auto nu = random_density_measure(rng, g);
  const int L = 6;
  const Point origin{1, {Complex(0), Complex(0)}};
  for (double p : {1.5, 2.0, 2.5}) {
    PotentialParams pp{p, 0.3};
    const double sp = pp.s * p;
    pp.lambda = default_lambda(1.0, p, pp.s);
    const double beta = pp.pprime() - 1;
    if (p <= 2) {
      const HoloPotential U(nu, pp, w, g, L, HoloKind::U, 1.0);
      double expect = 0;
      for (int l = 1; l <= L; ++l) {
        const double t = std::ldexp(1.0, -l);
        for (std::size_t j = 0; j < g.size(); ++j) {
          const double m = brute_ball_mass(nu, g, g.node(j), t);
          if (m > 0) expect += std::log(2.0) * g.weight(j) * std::pow(m / std::pow(t, 1 - sp), beta) * std::pow(t, pp.lambda - 1);
        }
      }
      const Complex u0 = U.value(origin);
      CHECK(std::abs(u0.imag()) < 1e-12 * u0.real());
      CHECK(u0.real() == doctest::Approx(expect).epsilon(1e-12));
    }
    if (p >= 2) {
      const HoloPotential V(nu, pp, w, g, L, HoloKind::V, 1.0);
      double expect = 0;
      for (int l = 1; l <= L; ++l) {
        const double t = std::ldexp(1.0, -l);
        expect += std::log(2.0) * std::pow(nu.total() * std::pow(t, pp.lambda + sp - 1), beta);
      }
      CHECK(V.value(origin).real() == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  PotentialParams zp{1.5, 0.3};
  zp.lambda = 0.9;
  const HoloPotential zero(SphereMeasure{}, zp, w, g, L, HoloKind::U, 1.0);
  CHECK(std::abs(zero.value(g.node(0).scaled(0.5))) == 0.0);
}

TEST_CASE("radial derivatives of holomorphic potentials") {
  const auto g = build_grid(1, 128);
  const auto w = WeightField::constant(g, 1.0);
  Rng rng(12);
  const auto nu = random_density_measure(rng, g);
  const auto z = g.node(17).scaled(0.8);
  const double h = 1e-4;
  for (auto [p, kind] : {std::pair{1.5, HoloKind::U}, std::pair{2.5, HoloKind::V}}) {
    PotentialParams pp{p, 0.3};
    pp.lambda = default_lambda(1.0, p, pp.s);
    const HoloPotential F(nu, pp, w, g, 6, kind, 1.0);
    auto at = [&](double e) { return F.value(z.scaled(std::exp(e))); };
    const Complex f0 = at(0);
    const Complex rf = (at(h) - at(-h)) / (2 * h);
    const Complex rrf = (at(h) - 2.0 * f0 + at(-h)) / (h * h);
    CHECK(std::abs(F.value(z, 1) - (f0 + rf)) < 1e-6 * std::abs(f0));
    CHECK(std::abs(F.value(z, 2) - (f0 + 2.0 * rf + rrf)) < 1e-5 * std::abs(f0));
    // circle fast path agrees with pointwise evaluation
    const auto ring = F.ring(0.8, 1);
    CHECK(std::abs(ring[17] - F.value(z, 1)) < 1e-10 * std::abs(ring[17]));
  }
}

TEST_CASE("holomorphic potential guards") {
  const auto g = build_grid(2, 8);
  const auto w = WeightField::power(g, 0.3);
  const SphereMeasure nu{{{5, 1.0}}};
  PotentialParams pp{1.5, 1.2};
  pp.lambda = 0.5;
  CHECK_THROWS_AS(HoloPotential(nu, pp, w, g, 4, HoloKind::V, 2.3), InvalidArgument);
  pp.p = 2.5;
  CHECK_THROWS_AS(HoloPotential(nu, pp, w, g, 4, HoloKind::U, 2.3), InvalidArgument);
  pp.p = 1.5;
  pp.s = 0.3;
  CHECK_THROWS_AS(HoloPotential(nu, pp, w, g, 4, HoloKind::U, 2.3), InvalidArgument);
  pp.s = 1.2;
  pp.lambda = 0.999;
  CHECK_NOTHROW(HoloPotential(nu, pp, w, g, 4, HoloKind::U, 2.3));
  CHECK(default_lambda(2.3, 1.5, 1.2) == doctest::Approx(0.75));
  CHECK(default_lambda(1.0, 2.0, 0.6) == doctest::Approx(0.5));
  CHECK(default_lambda(2.3, 1.5, 0.9) == doctest::Approx((2.3 - 1.35 + 1) / 2));
}

TEST_CASE("holomorphic potential norm scales with the energy") {
  const auto g = build_grid(1, 128);
  const auto w = WeightField::constant(g, 1.0);
  Rng rng(21);
  const auto nu = random_density_measure(rng, g);
  const auto rg = RadialGrid::geometric(12, 3, 5);
  for (auto [p, kind] : {std::pair{1.5, HoloKind::U}, std::pair{3.0, HoloKind::V}}) {
    PotentialParams pp{p, 0.3};
    pp.lambda = default_lambda(1.0, p, pp.s);
    const double a = holo_potential_norm(HoloPotential(nu, pp, w, g, 6, kind, 1.0), pp, w, g, rg);
    const double b = holo_potential_norm(HoloPotential(nu.scaled(4.0), pp, w, g, 6, kind, 1.0), pp, w, g, rg);
    // the majorant is a p-th power, so it scales like the energy
    CHECK(b == doctest::Approx(std::pow(4.0, pp.pprime()) * a).epsilon(1e-10));
    CHECK(holo_potential_norm(HoloPotential(SphereMeasure{}, pp, w, g, 6, kind, 1.0), pp, w, g, rg) == 0.0);
  }
}

TEST_CASE("continuity criterion") {
  const auto c1 = build_grid(1, 512), f1 = build_grid(1, 1024);
  const auto one_c = WeightField::constant(c1, 1.0), one_f = WeightField::constant(f1, 1.0);
  const auto conv = continuity_criterion(c1.node(0), PotentialParams{2.0, 0.6}, c1, one_c, f1, one_f);
  const auto div = continuity_criterion(c1.node(0), PotentialParams{2.0, 0.3}, c1, one_c, f1, one_f);
  CHECK(conv.ratio < 1.1);
  CHECK(div.ratio > 1.25);
  CHECK(div.fine > div.coarse);
  // n = 2, power(-0.3): τ - sp = 1.7 - 2.8 < 0
  const auto c2 = build_grid(2, 16), f2 = build_grid(2, 32);
  const auto r2 = continuity_criterion(c2.node(4 * 16 * 16), PotentialParams{2.0, 1.4}, c2,
                                       WeightField::power(c2, -0.3), f2, WeightField::power(f2, -0.3));
  CHECK(r2.ratio == doctest::Approx(1.0).epsilon(0.1));
}
