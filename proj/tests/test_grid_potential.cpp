// Grids, quadrature, finite differences, and the potential catalog.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "nlslab/grid.hpp"
#include "nlslab/potential.hpp"
#include "nlslab/space.hpp"

using namespace nlslab;

namespace {

Profile sample_half_line(const Grid& g, double (*f)(double)) {
  Profile p = make_profile<double>(g);
  for (std::size_t i = 0; i < g.n; ++i) p.values[i] = f(g.x(i));
  return p;
}

double sech(double x) { return 1.0 / std::cosh(x); }

}  // namespace

TEST_CASE("half-line grid layout") {
  const Grid g = Grid::half_line(20.0, 5e-3);
  CHECK(g.n == 4001);
  CHECK(g.x(0) == 0.0);
  CHECK(g.x(g.n - 1) == Catch::Approx(20.0).margin(1e-12));
  CHECK(g.extent() == Catch::Approx(20.0).margin(1e-12));
  CHECK_FALSE(g.staggered);
  // reflection factor 2 in the interior, 1 at r = 0 and at the far end
  CHECK(g.line_weight(0) == 1.0);
  CHECK(g.line_weight(1) == 2.0);
  CHECK(g.line_weight(g.n - 1) == 1.0);
}

TEST_CASE("staggered half-line grid avoids the origin") {
  const Grid g = Grid::half_line(20.0, 5e-3, /*staggered=*/true);
  CHECK(g.n == 4000);
  CHECK(g.x(0) == Catch::Approx(2.5e-3));
  CHECK(g.extent() == Catch::Approx(20.0).margin(1e-12));
  for (std::size_t i : {std::size_t{0}, g.n / 2, g.n - 1}) CHECK(g.line_weight(i) == 2.0);
}

TEST_CASE("full-line grid layout") {
  const Grid g = Grid::full_line(10.0, 0.01);
  CHECK(g.n == 2001);
  CHECK(g.x(0) == Catch::Approx(-10.0));
  CHECK(g.x(g.n / 2) == Catch::Approx(0.0).margin(1e-12));
  CHECK(g.line_weight(0) == 0.5);
  CHECK(g.line_weight(1) == 1.0);
}

TEST_CASE("periodic box layout") {
  const Grid g = Grid::periodic_box(16.0, 8192);
  CHECK(g.n == 8192);
  CHECK(g.dx == Catch::Approx(32.0 / 8192));
  CHECK(g.periodic);
  CHECK(g.staggered);
  CHECK(g.extent() == Catch::Approx(16.0));
  // symmetric about 0 without sampling it
  CHECK(g.x(0) == Catch::Approx(-16.0 + 0.5 * g.dx));
  CHECK(g.x(g.n / 2 - 1) == Catch::Approx(-0.5 * g.dx));
  CHECK(g.x(g.n / 2) == Catch::Approx(0.5 * g.dx));
  for (std::size_t i : {std::size_t{0}, g.n - 1}) CHECK(g.line_weight(i) == 1.0);
}

TEST_CASE("grid constructor refusals") {
  CHECK_THROWS_AS(Grid::half_line(20.0, 0.0), ConfigError);
  CHECK_THROWS_AS(Grid::half_line(-1.0, 0.1), ConfigError);
  CHECK_THROWS_AS(Grid::half_line(0.5, 0.1), ConfigError);  // fewer than 16 cells
  CHECK_THROWS_AS(Grid::periodic_box(16.0, 8191), ConfigError);  // odd point count
  CHECK_THROWS_AS(Grid::periodic_box(16.0, 8), ConfigError);
}

// Trapezoid on rapidly decaying analytic integrands is limited by the domain
// truncation, not by dx; sech(20) ~ 4e-9 dominates the first row's budget.
TEST_CASE("quadrature closed forms for sech powers") {
  const Grid g = Grid::half_line(20.0, 1e-3);
  const auto integral = [&](double (*f)(double)) { return line_integral(sample_half_line(g, f)); };

  CHECK(integral(+[](double x) { return sech(x); }) ==
        Catch::Approx(std::numbers::pi).margin(2e-8));
  CHECK(integral(+[](double x) { return sech(x) * sech(x); }) ==
        Catch::Approx(2.0).margin(1e-12));
  CHECK(integral(+[](double x) { return std::pow(sech(x), 4.0); }) ==
        Catch::Approx(4.0 / 3.0).margin(1e-12));
  CHECK(integral(+[](double x) { return std::pow(sech(0.5 * x), 4.0); }) ==
        Catch::Approx(8.0 / 3.0).margin(1e-10));
  CHECK(integral(+[](double x) { return std::pow(sech(x), 6.0); }) ==
        Catch::Approx(16.0 / 15.0).margin(1e-12));
  CHECK(integral(+[](double x) { return std::pow(sech(x), 8.0); }) ==
        Catch::Approx(32.0 / 35.0).margin(1e-12));
}

TEST_CASE("staggered midpoint quadrature matches the node rule") {
  const Grid g = Grid::half_line(20.0, 1e-3, /*staggered=*/true);
  CHECK(line_integral(sample_half_line(g, +[](double x) { return sech(x) * sech(x); })) ==
        Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("raw quadrature vs reflected line integral") {
  const Grid g = Grid::half_line(20.0, 1e-3);
  const Profile p = sample_half_line(g, +[](double x) { return sech(x) * sech(x); });
  // raw trapezoid covers [0, 20] only: half the even full-line value
  CHECK(quadrature(p) == Catch::Approx(1.0).margin(1e-12));
  CHECK(line_integral(p) == Catch::Approx(2.0 * quadrature(p)).margin(1e-14));
}

TEST_CASE("line integral callable overload") {
  const Grid g = Grid::half_line(20.0, 1e-3);
  const double v = line_integral(g, [&](std::size_t i) {
    const double s = sech(g.x(i));
    return s * s;
  });
  CHECK(v == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("quadrature rejects non-finite samples") {
  const Grid g = Grid::half_line(1.0, 1e-2);
  Profile p = make_profile<double>(g);
  p.values[5] = std::nan("");
  CHECK_THROWS_AS(line_integral(p), ConfigError);
  p.values[5] = 0.0;
  p.values.pop_back();
  CHECK_THROWS_AS(quadrature(p), ConfigError);
}

TEST_CASE("centered derivative is second order with an even origin") {
  const Grid g = Grid::half_line(20.0, 1e-3);
  const Profile p = sample_half_line(g, +[](double x) { return sech(x); });
  const std::vector<double> d = centered_derivative(p);
  CHECK(d[0] == 0.0);  // even mirror makes the r = 0 slope exactly zero
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < g.n; ++i) {
    const double x = g.x(i);
    worst = std::max(worst, std::fabs(d[i] + sech(x) * std::tanh(x)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("centered derivative on a periodic box") {
  const Grid g = Grid::periodic_box(std::numbers::pi, 64);
  Profile p = make_profile<double>(g);
  for (std::size_t i = 0; i < g.n; ++i) p.values[i] = std::sin(g.x(i));
  const std::vector<double> d = centered_derivative(p);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.n; ++i)
    worst = std::max(worst, std::fabs(d[i] - std::cos(g.x(i))));
  CHECK(worst < 2e-3);  // dx^2/6 * max|f'''| at dx ~ 0.098
}

TEST_CASE("origin value extrapolation") {
  SECTION("node grid stores it") {
    const Grid g = Grid::half_line(1.0, 1e-2);
    const Profile p = sample_half_line(g, +[](double x) { return std::cos(x); });
    CHECK(even_value_at_origin(p) == 1.0);
  }
  SECTION("staggered grid uses the even parabola, O(dx^4) accurate") {
    const Grid g = Grid::half_line(1.0, 1e-2, /*staggered=*/true);
    const Profile p = sample_half_line(g, +[](double x) { return std::cos(x); });
    CHECK(even_value_at_origin(p) == Catch::Approx(1.0).margin(1e-8));
  }
}

TEST_CASE("mirror to full line preserves integrals and symmetry") {
  const Grid g = Grid::half_line(20.0, 1e-2, GENERATE(false, true));
  const Profile half = sample_half_line(g, +[](double x) { return sech(x) * sech(x); });
  const Profile full = mirror_to_full_line(half);
  CHECK(full.grid.support == Support::full_line);
  CHECK(full.grid.n == (g.staggered ? 2 * g.n : 2 * g.n - 1));
  for (std::size_t i = 0; i < full.grid.n; ++i)
    CHECK(full.values[i] == full.values[full.grid.n - 1 - i]);
  CHECK(line_integral(full) == Catch::Approx(line_integral(half)).margin(1e-12));
  CHECK_THROWS_AS(mirror_to_full_line(full), ConfigError);
}

TEST_CASE("potential parsing round trip") {
  CHECK(Potential::parse("zero").is_zero());
  CHECK(Potential::parse("zero").label() == "zero");

  const Potential h = Potential::parse("harmonic:1");
  CHECK(h.value(2.0) == Catch::Approx(4.0));
  CHECK(h.slope(2.0) == Catch::Approx(4.0));
  CHECK(h.label() == "harmonic:1");
  CHECK_FALSE(h.singular_at_origin());

  const Potential inv = Potential::parse("inverse:1:0.5");
  CHECK(inv.value(4.0) == Catch::Approx(-0.5));
  CHECK(inv.slope(4.0) == Catch::Approx(0.5 * std::pow(4.0, -1.5)));
  CHECK(inv.singular_at_origin());
  CHECK(inv.label() == "inverse:1:0.5");

  const Potential st = Potential::parse("step:2:1");
  CHECK(st.value(1.0) == Catch::Approx(2.0 * std::pow(std::tanh(1.0), 2.0)));
  CHECK(st.value(50.0) == Catch::Approx(2.0).margin(1e-12));
  CHECK(st.slope(0.0) == 0.0);

  const Potential sum = Potential::parse("harmonic:1+step:2:1");
  CHECK(sum.value(1.0) == Catch::Approx(1.0 + 2.0 * std::pow(std::tanh(1.0), 2.0)));
  CHECK(sum.label() == "harmonic:1+step:2:1");
}

TEST_CASE("potential parsing refusals") {
  CHECK_THROWS_AS(Potential::parse("fancy"), ConfigError);
  CHECK_THROWS_AS(Potential::parse("harmonic"), ConfigError);
  CHECK_THROWS_AS(Potential::parse("harmonic:abc"), ConfigError);
  CHECK_THROWS_AS(Potential::parse("harmonic:-1"), ConfigError);
  CHECK_THROWS_AS(Potential::parse("inverse:1:1.5"), ConfigError);  // exponent outside (0,1)
  CHECK_THROWS_AS(Potential::parse("inverse:0:0.5"), ConfigError);
  CHECK_THROWS_AS(Potential::parse("step:0:1"), ConfigError);
  CHECK_THROWS_AS(Potential::parse("zero:1"), ConfigError);
}

TEST_CASE("harmonic closed-form primitives") {
  const Potential V = Potential::parse("harmonic:1");
  CHECK(V.integral(1.0, 2.0) == Catch::Approx(7.0 / 3.0));
  CHECK(V.second_antiderivative(2.0) == Catch::Approx(16.0 / 12.0));  // r^4 / 12
  CHECK(V.first_moment(1.0, 2.0) == Catch::Approx(15.0 / 4.0));
  CHECK(V.virial_primitive(0.0, 2.0) == Catch::Approx(32.0 / 3.0));  // int 4 t^2
}

TEST_CASE("inverse-power closed-form primitives") {
  const Potential V = Potential::parse("inverse:1:0.5");
  // V = -r^{-1/2}: primitive -2 sqrt(r)
  CHECK(V.integral(0.0, 4.0) == Catch::Approx(-4.0));
  CHECK(V.integral(1.0, 4.0) == Catch::Approx(-2.0));
  // int_0^r (r-t) (-t^{-1/2}) dt = -r^{3/2} / ((1/2)(3/2))
  CHECK(V.second_antiderivative(1.0) == Catch::Approx(-4.0 / 3.0));
  // int t * (-t^{-1/2}) = -(2/3) t^{3/2}
  CHECK(V.first_moment(0.0, 1.0) == Catch::Approx(-2.0 / 3.0));
  // 2V + rV' = -(3/2) r^{-1/2}
  CHECK(V.virial_density(4.0) == Catch::Approx(-0.75));
  CHECK(V.virial_primitive(0.0, 4.0) == Catch::Approx(-6.0));
}

// Integration by parts makes these exact for every catalog member:
//   int_a^b (2V + tV') dt = int_a^b V dt + bV(b) - aV(a)
//   second_antiderivative(r) = r * int_0^r V - int_0^r tV dt
TEST_CASE("primitive cross identities hold for every catalog member") {
  const std::string label = GENERATE(std::string("harmonic:0.7"), std::string("inverse:1:0.5"),
                                     std::string("step:2:1"), std::string("harmonic:1+step:3:2"));
  const Potential V = Potential::parse(label);
  for (double b : {0.5, 1.0, 3.0, 7.0}) {
    const double a = 0.25 * b;
    CHECK(V.virial_primitive(a, b) ==
          Catch::Approx(V.integral(a, b) + b * V.value(b) - a * V.value(a)).epsilon(1e-12));
    CHECK(V.second_antiderivative(b) ==
          Catch::Approx(b * V.integral(0.0, b) - V.first_moment(0.0, b)).epsilon(1e-12));
  }
}

TEST_CASE("bounded-step primitives match fine quadrature") {
  const Potential V = Potential::parse("step:2:1");
  double acc = 0.0, second = 0.0;
  const double h = 1e-5;
  for (double t = 0.5 * h; t < 3.0; t += h) {
    acc += V.value(t) * h;
    second += (3.0 - t) * V.value(t) * h;
  }
  CHECK(V.integral(0.0, 3.0) == Catch::Approx(acc).margin(1e-8));
  CHECK(V.second_antiderivative(3.0) == Catch::Approx(second).margin(1e-7));
}

TEST_CASE("matrix diagonal sampling") {
  SECTION("smooth potentials sample pointwise") {
    const Potential V = Potential::parse("harmonic:1");
    const Grid g = Grid::half_line(5.0, 0.1);
    const std::vector<double> q = V.diagonal(g);
    for (std::size_t i = 0; i < g.n; i += 7) CHECK(q[i] == Catch::Approx(V.value(g.x(i))));
  }
  SECTION("singular potentials use exact cell averages") {
    const Potential V = Potential::parse("inverse:1:0.5");
    const Grid g = Grid::half_line(5.0, 0.1, /*staggered=*/true);
    const std::vector<double> q = V.diagonal(g);
    for (std::size_t i : {std::size_t{0}, std::size_t{3}, g.n - 1}) {
      const double lo = g.x(i) - 0.5 * g.dx, hi = g.x(i) + 0.5 * g.dx;
      CHECK(q[i] == Catch::Approx(V.integral(lo, hi) / g.dx));
    }
    const std::vector<double> w = V.virial_diagonal(g);
    CHECK(w[0] == Catch::Approx(V.virial_primitive(0.0, g.dx) / g.dx));
  }
}

TEST_CASE("monotonicity check on the catalog") {
  const Grid g = Grid::half_line(20.0, 1e-2);
  SECTION("harmonic passes both checks") {
    const Potential V = Potential::parse("harmonic:1");
    CHECK(check_v1(V, g).passed);
    CHECK(check_v2(V, g, 3.0).passed);
    CHECK(check_v2(V, g, 5.0).passed);
  }
  SECTION("inverse power passes both checks") {
    const Potential V = Potential::parse("inverse:1:0.5");
    CHECK(check_v1(V, g).passed);
    CHECK(check_v2(V, g, 3.0).passed);  // 2V + rV' rises from -inf toward 0
  }
  SECTION("zero potential fails the slope check, passes the virial one at p = 3") {
    const Potential V = Potential::parse("zero");
    const CheckReport r1 = check_v1(V, g);
    CHECK_FALSE(r1.passed);
    CHECK(r1.detail == "V' == 0 identically");
    CHECK(check_v2(V, g, 3.0).passed);
  }
  SECTION("constant virial density is refused at p = 5 only") {
    CHECK_FALSE(check_v2(Potential::parse("zero"), g, 5.0).passed);
    CHECK(check_v2(Potential::parse("zero"), g, 5.0).detail ==
          "2V + rV' constant; not allowed at p = 5");
  }
  SECTION("bounded step: monotone V but overshooting virial density") {
    // 2V + rV' = 4 tanh^2 r + 4 r tanh r sech^2 r peaks near r ~ 1.1 and
    // then drains back to the plateau value 4: the virial check must fail.
    const Potential V = Potential::parse("step:2:1");
    CHECK(check_v1(V, g).passed);
    const CheckReport r2 = check_v2(V, g, 3.0);
    CHECK_FALSE(r2.passed);
    CHECK(r2.first_violation > 0);
  }
}

TEST_CASE("sampled callable overloads for hypothetical potentials") {
  const Grid g = Grid::half_line(10.0, 1e-2);
  SECTION("decreasing potential is rejected") {
    const CheckReport r = check_v1_sampled([](double r) { return -r; },
                                           [](double) { return -1.0; }, g);
    CHECK_FALSE(r.passed);
    CHECK(r.first_violation >= 0);
  }
  SECTION("constant virial density from a callable") {
    const CheckReport r = check_v2_sampled([](double) { return 2.0; }, g, 5.0);
    CHECK_FALSE(r.passed);
    CHECK(check_v2_sampled([](double) { return 2.0; }, g, 3.0).passed);
  }
  SECTION("full-line grids are refused") {
    const Grid f = Grid::full_line(10.0, 1e-2);
    CHECK_THROWS_AS(check_v1(Potential::parse("harmonic:1"), f), ConfigError);
    CHECK_THROWS_AS(check_v2(Potential::parse("harmonic:1"), f, 3.0), ConfigError);
  }
}

TEST_CASE("virial pairing uses cell-exact weights on singular potentials") {
  const Potential V = Potential::parse("inverse:1:0.5");
  const Grid g = Grid::half_line(20.0, 5e-3, /*staggered=*/true);
  const Profile u = sample_half_line(g, +[](double x) { return std::exp(-x); });
  // int (2V + rV') e^{-2r} = -(3/2) int r^{-1/2} e^{-2r} = -(3/2) sqrt(pi/2).
  // Pointwise sampling of r^{-1/2} would miss by ~0.06 in the first cell
  // alone; the cell-exact average keeps the whole sum within ~1e-4.
  const double exact = -1.5 * std::sqrt(std::numbers::pi / 2.0);
  CHECK(virial_energy(V, u) == Catch::Approx(2.0 * exact).margin(1e-3));
}
