#include "linf/error.hpp"
#include "linf/oracle1d.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace linf;

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// 30-digit Newton solves of the two moment equations (mpmath), data (0,0,0,1) on (0,1)
constexpr double kTiltE = 3.00326218492118128;
constexpr double kTiltM = 0.292893218813452476;
constexpr double kWeightedE = 3.00521696351550592;
constexpr double kWeightedM = 0.272118166180953329;

Oracle1DProblem data(double ua, double dua, double ub, double dub, FModel model = make_linear())
{
    Oracle1DProblem p;
    p.ua = ua;
    p.dua = dua;
    p.ub = ub;
    p.dub = dub;
    p.model = std::move(model);
    return p;
}

}  // namespace

TEST_CASE("moment residuals")
{
    const Oracle1DProblem p = data(0.0, 0.3, 1.0, -0.5);
    const auto r0 = moment_residual(p, 0.0, 0.4, 1);
    CHECK(r0[0] == doctest::Approx(-p.d1()));
    CHECK(r0[1] == doctest::Approx(-p.d2()));

    const auto fixture = moment_residual(data(0, 0, 0, 1), 1.0 + kSqrt2, 1.0 - kSqrt2 / 2.0, 1);
    CHECK(std::abs(fixture[0]) <= 1e-12);
    CHECK(std::abs(fixture[1]) <= 1e-12);

    const auto parabola = moment_residual(data(0, 1, 0, -1), 2.0, 0.0, -1);
    CHECK(std::abs(parabola[0]) <= 1e-12);
    CHECK(std::abs(parabola[1]) <= 1e-12);
}

TEST_CASE("closed form for the linear model")
{
    const Oracle1DSolution s = solve_bilaplacian_closed_form(data(0, 0, 0, 1));
    CHECK(s.e == doctest::Approx(1.0 + kSqrt2).epsilon(1e-14));
    CHECK(s.m == doctest::Approx(1.0 - kSqrt2 / 2.0).epsilon(1e-14));
    CHECK(s.sigma == 1);
    CHECK(s.crossing);

    const Oracle1DSolution q = solve_bilaplacian_closed_form(data(0, 1, 0, -1));
    CHECK(q.e == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_FALSE(q.crossing);
    CHECK(q.sigma == -1);
    CHECK(q.second_derivative(0.37) == doctest::Approx(-2.0));

    const Oracle1DSolution a = solve_bilaplacian_closed_form(data(0, 1, 1, 1));
    CHECK(a.e == 0.0);

    const Oracle1DSolution mid = solve_bilaplacian_closed_form(data(0, 0, 1, 0));
    CHECK(mid.e == doctest::Approx(4.0));
    CHECK(mid.m == doctest::Approx(0.5));

    CHECK_THROWS_AS(solve_bilaplacian_closed_form(data(0, 0, 0, 1, make_arctan_tilt(0.5))), ConfigError);
}

TEST_CASE("general solver")
{
    SUBCASE("agrees with the closed form on random data")
    {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int t = 0; t < 200; ++t) {
            Oracle1DProblem p = data(u(rng), u(rng), u(rng), u(rng));
            p.a = u(rng);
            p.b = p.a + 0.5 + std::abs(u(rng));
            const Oracle1DSolution c = solve_bilaplacian_closed_form(p);
            const Oracle1DSolution g = solve_general(p);
            CHECK(g.e == doctest::Approx(c.e).epsilon(1e-10));
            CHECK(g.crossing == c.crossing);
            if (c.crossing) CHECK(g.m == doctest::Approx(c.m).epsilon(1e-10));
            CHECK(std::abs(g.residual[0]) <= 1e-10);
            CHECK(std::abs(g.residual[1]) <= 1e-10);
        }
    }
    SUBCASE("arctan tilt")
    {
        const FModel tilt = make_arctan_tilt(0.5);
        const Oracle1DSolution s = solve_general(data(0, 0, 0, 1, tilt));
        CHECK(s.e == doctest::Approx(kTiltE).epsilon(1e-10));
        CHECK(s.m == doctest::Approx(kTiltM).epsilon(1e-10));
        CHECK(s.e >= tilt.c * (1.0 + kSqrt2));
        CHECK(s.e <= (1.0 + kSqrt2) / tilt.c);
        CHECK(std::abs(s.residual[0]) <= 1e-10);
        CHECK(std::abs(s.residual[1]) <= 1e-10);
    }
    SUBCASE("weighted model")
    {
        const FModel one = make_weighted([](Point) { return 1.0; }, 1.0);
        const Oracle1DSolution s1 = solve_general(data(0, 0, 0, 1, one));
        CHECK(s1.e == doctest::Approx(1.0 + kSqrt2).epsilon(1e-12));
        CHECK(s1.m == doctest::Approx(1.0 - kSqrt2 / 2.0).epsilon(1e-12));

        const FModel w = make_weighted([](Point x) { return 1.0 + x.x * x.x / 2.0; }, 2.0 / 3.0);
        const Oracle1DSolution s = solve_general(data(0, 0, 0, 1, w));
        CHECK(s.e == doctest::Approx(kWeightedE).epsilon(1e-10));
        CHECK(s.m == doctest::Approx(kWeightedM).epsilon(1e-10));
    }
    SUBCASE("scaling the data scales e and keeps m")
    {
        const Oracle1DSolution base = solve_general(data(0.2, -0.4, 0.1, 1.3));
        for (const double lambda : {0.25, 3.0, 40.0}) {
            const Oracle1DSolution s = solve_general(data(0.2 * lambda, -0.4 * lambda, 0.1 * lambda, 1.3 * lambda));
            CHECK(s.e == doctest::Approx(lambda * base.e).epsilon(1e-10));
            CHECK(s.m == doctest::Approx(base.m).epsilon(1e-10));
        }
    }
    SUBCASE("affine data")
    {
        const Oracle1DSolution s = solve_general(data(0, 1, 1, 1, make_arctan_tilt(0.25)));
        CHECK(s.e == 0.0);
    }
}

TEST_CASE("reconstruction")
{
    const auto grid = GridDomain::interval(0.0, 1.0, 201);
    SUBCASE("zero energy gives the affine interpolant")
    {
        const Reconstruction r = reconstruct_u(solve_general(data(0.5, 1, 1.5, 1)), grid);
        for (std::size_t k = 0; k < grid->size(); ++k) CHECK(r.u.values[k] == doctest::Approx(0.5 + grid->point(k).x));
    }
    SUBCASE("linear fixture: piecewise quadratic with a kink at m")
    {
        const Oracle1DSolution s = solve_general(data(0, 0, 0, 1));
        const Reconstruction r = reconstruct_u(s, grid);
        CHECK(std::abs(r.mismatch_u) <= 1e-8);
        CHECK(std::abs(r.mismatch_du) <= 1e-8);
        const double e = s.e;
        const double m = s.m;
        for (std::size_t k = 0; k < grid->size(); ++k) {
            const double x = grid->point(k).x;
            // u'' = -e on (0, m), +e on (m, 1), u(0) = u'(0) = 0
            const double expect = x <= m ? -e * x * x / 2 : -e * m * m / 2 - e * m * (x - m) + e * (x - m) * (x - m) / 2;
            CHECK(r.u.values[k] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    SUBCASE("parabola data reproduce the parabola")
    {
        const Reconstruction r = reconstruct_u(solve_general(data(0, 1, 0, -1)), grid);
        for (std::size_t k = 0; k < grid->size(); ++k) {
            const double x = grid->point(k).x;
            CHECK(r.u.values[k] == doctest::Approx(-x * (x - 1.0)).epsilon(1e-12));
        }
    }
    SUBCASE("nonlinear models close the data")
    {
        const Reconstruction r = reconstruct_u(solve_general(data(0, 0, 0, 1, make_arctan_tilt(0.5))), grid);
        CHECK(std::abs(r.mismatch_u) <= 1e-8);
        CHECK(std::abs(r.mismatch_du) <= 1e-8);
        const FModel w = make_weighted([](Point x) { return 1.0 + x.x * x.x / 2.0; }, 2.0 / 3.0);
        const Reconstruction rw = reconstruct_u(solve_general(data(0, 0, 0, 1, w)), grid);
        CHECK(std::abs(rw.mismatch_u) <= 1e-8);
        CHECK(std::abs(rw.mismatch_du) <= 1e-8);
    }
}
