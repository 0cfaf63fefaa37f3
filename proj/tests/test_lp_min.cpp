#include "linf/error.hpp"
#include "linf/lp_min.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <random>

using namespace linf;

namespace {

/// Linear model at p = 2: a plain least-squares problem for the free values,
/// assembled here from the stencil without the library's operator.
Field least_squares_minimiser(const DomainPtr& d, const Field& u0)
{
    std::vector<std::ptrdiff_t> col(d->size(), -1);
    const auto free = d->free_nodes();
    for (std::size_t j = 0; j < free.size(); ++j) col[free[j]] = static_cast<std::ptrdiff_t>(j);
    const auto rows = d->eval_nodes();
    const double ih2 = 1.0 / (d->h() * d->h());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(free.size()));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(A.rows());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t k = rows[r];
        auto add = [&](std::size_t node, double w) {
            if (col[node] >= 0) A(static_cast<Eigen::Index>(r), col[node]) += w * ih2;
            else rhs[static_cast<Eigen::Index>(r)] -= w * ih2 * u0.values[node];
        };
        add(k, -2.0 * d->dim());
        for (const auto nb : d->neighbours(k))
            if (nb >= 0) add(static_cast<std::size_t>(nb), 1.0);
    }
    const Eigen::VectorXd x = A.colPivHouseholderQr().solve(rhs);
    Field u = u0;
    for (std::size_t j = 0; j < free.size(); ++j) u.values[free[j]] = x[static_cast<Eigen::Index>(j)];
    return u;
}

/// E_p^p by finite differences in each free value, independent of the solver's gradient.
double fd_gradient_rel(const LpProblem& pb, const Field& u)
{
    auto obj = [&](const Field& v) { return std::pow(energy(pb, v).e_p, pb.p); };
    const double base = obj(u);
    double worst = 0.0;
    Field v = u;
    for (const std::size_t k : pb.domain->free_nodes()) {
        const double step = 1e-6 * pb.domain->h() * pb.domain->h();
        v.values[k] = u.values[k] + step;
        const double up = obj(v);
        v.values[k] = u.values[k] - step;
        const double dn = obj(v);
        v.values[k] = u.values[k];
        worst = std::max(worst, std::abs(up - dn) / (2.0 * step));
    }
    // d(E^p)/du_k is O(p E^p / h^2) for a single node
    return worst * pb.domain->h() * pb.domain->h() / (pb.p * base);
}

// least-squares value on a 41-node interval with data (0,0,0,1), computed by the dense oracle above
constexpr double kFrozenE2 = 1.96214168703485;

}  // namespace

TEST_CASE("power mean")
{
    const double v[] = {1.0, 3.0};
    CHECK(power_mean(v, 2.0) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
    const double z[] = {0.0, 0.0};
    CHECK(power_mean(z, 8.0) == 0.0);
    const double big[] = {1e300, 1e300};
    CHECK(power_mean(big, 1024.0) == doctest::Approx(1e300));

    SUBCASE("monotone in p on random samples")
    {
        std::mt19937_64 rng(42);
        std::lognormal_distribution<double> dist(0.0, 2.0);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> vals(257);
            for (auto& x : vals) x = dist(rng) * (rng() % 2 ? 1.0 : -1.0);
            double prev = 0.0;
            for (double p = 1.0; p <= 2048.0; p *= 2.0) {
                const double m = power_mean(vals, p);
                CHECK(m >= prev * (1.0 - 1e-12));
                prev = m;
            }
        }
    }
}

TEST_CASE("energy")
{
    const auto d = GridDomain::rectangle(0.0, 1.0, 0.0, 1.0, 25);
    const Field quad = Field::sample(d, [](Point p) { return 0.5 * (p.x * p.x + p.y * p.y); });
    for (const double p : {2.0, 7.0, 1024.0}) {
        const LpProblem pb{d, make_linear(), quad, p};
        const EnergyValue e = energy(pb, quad);
        CHECK(e.e_p == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(e.maxF == doctest::Approx(2.0).epsilon(1e-9));
    }
    const Field harm = Field::sample(d, [](Point p) { return p.x * p.y + p.x - 3.0; });
    const LpProblem pb{d, make_linear(), harm, 4.0};
    CHECK(energy(pb, harm).e_p <= pb.zero_threshold());

    SUBCASE("energy never exceeds the max")
    {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> n(0.0, 1.0);
        Field u(d);
        for (auto& x : u.values) x = n(rng);
        for (const double p : {2.0, 10.0, 300.0}) {
            const EnergyValue e = energy(LpProblem{d, make_arctan_tilt(0.5), u, p}, u);
            CHECK(e.e_p <= e.maxF);
        }
    }
}

TEST_CASE("dual field")
{
    const auto d = GridDomain::interval(0.0, 1.0, 60);
    const Field u = Field::sample(d, [](Point p) { return 1.5 * p.x * p.x; });
    const LpProblem pb{d, make_linear(), u, 16.0};
    const Field f = dual_field(pb, u, energy(pb, u).e_p);
    for (const std::size_t k : d->eval_nodes()) CHECK(f.values[k] == doctest::Approx(1.0).epsilon(1e-9));

    const Field affine = Field::sample(d, [](Point p) { return 2.0 * p.x; });
    const Field f0 = dual_field(pb, affine, 0.0);
    for (const double v : f0.values) CHECK(v == 0.0);

    SUBCASE("sign follows the Laplacian")
    {
        const Field w = Field::sample(d, [](Point p) { return std::sin(7.0 * p.x); });
        const LpProblem tp{d, make_arctan_tilt(0.3), w, 8.0};
        const Field fw = dual_field(tp, w, energy(tp, w).e_p);
        const Field lw = laplacian(w);
        for (const std::size_t k : d->eval_nodes()) CHECK((fw.values[k] > 0) == (lw.values[k] > 0));
    }
}

TEST_CASE("minimiser of the quadratic problem matches a dense least-squares oracle")
{
    const auto d = GridDomain::interval(0.0, 1.0, 41);
    const Field u0 = Field::sample(d, [](Point p) { return p.x * p.x * p.x - p.x * p.x; });
    const LpProblem pb{d, make_linear(), u0, 2.0};
    const Field oracle = least_squares_minimiser(d, u0);
    const double e_oracle = energy(pb, oracle).e_p;
    CHECK(e_oracle == doctest::Approx(kFrozenE2).epsilon(1e-12));

    // start away from the optimum
    Field init = u0;
    for (const std::size_t k : d->free_nodes()) init.values[k] += 0.05 * std::sin(13.0 * d->point(k).x);
    const LpSolution s = minimize(pb, init);
    CHECK(s.converged);
    CHECK(s.e_p == doctest::Approx(e_oracle).epsilon(1e-10));
    for (std::size_t k = 0; k < d->size(); ++k) CHECK(s.u.values[k] == doctest::Approx(oracle.values[k]).epsilon(1e-8));

    SUBCASE("2D")
    {
        const auto r = GridDomain::rectangle(0.0, 1.0, 0.0, 1.0, 17);
        const Field v0 = Field::sample(r, [](Point p) { return std::sin(p.x + 2.0 * p.y) + p.x * p.x * p.y; });
        const LpProblem rp{r, make_linear(), v0, 2.0};
        const Field ro = least_squares_minimiser(r, v0);
        const LpSolution rs = minimize(rp, v0);
        CHECK(rs.e_p == doctest::Approx(energy(rp, ro).e_p).epsilon(1e-10));
        for (std::size_t k = 0; k < r->size(); ++k) CHECK(rs.u.values[k] == doctest::Approx(ro.values[k]).epsilon(1e-8));
    }
}

TEST_CASE("minimiser at large p is first-order optimal and locally minimal")
{
    const auto d = GridDomain::interval(0.0, 1.0, 31);
    const Field u0 = Field::sample(d, [](Point p) { return p.x * p.x * p.x - p.x * p.x; });
    for (const FModel& model : {make_linear(), make_arctan_tilt(0.5)}) {
        Field init = u0;
        double e_prev = 0.0;
        for (double p = convex_exponent(model); p <= 64.0; p *= 2.0) {
            const LpProblem pb{d, model, u0, p};
            const LpSolution s = minimize(pb, init);
            CHECK(s.converged);
            CHECK(s.e_p <= energy(pb, init).e_p * (1.0 + 1e-14));
            CHECK(s.e_p >= e_prev * (1.0 - 1e-10));
            CHECK(fd_gradient_rel(pb, s.u) <= 1e-6);

            std::mt19937_64 rng(static_cast<std::uint64_t>(p));
            std::normal_distribution<double> n(0.0, 1e-4);
            for (int t = 0; t < 20; ++t) {
                Field v = s.u;
                for (const std::size_t k : d->free_nodes()) v.values[k] += n(rng);
                CHECK(energy(pb, v).e_p >= s.e_p * (1.0 - 1e-13));
            }
            // clamped layer untouched
            for (std::size_t k = 0; k < d->size(); ++k)
                if (!d->is_free(k)) CHECK(s.u.values[k] == u0.values[k]);
            init = s.u;
            e_prev = s.e_p;
        }
    }
}

TEST_CASE("minimiser in simple cases")
{
    SUBCASE("affine data")
    {
        const auto d = GridDomain::interval(0.0, 1.0, 50);
        const Field u0 = Field::sample(d, [](Point p) { return 2.0 * p.x - 1.0; });
        const LpProblem pb{d, make_linear(), u0, 8.0};
        const LpSolution s = minimize(pb, u0);
        CHECK(s.e_p <= pb.zero_threshold());
        CHECK(s.iterations == 0);
        for (const double v : s.f.values) CHECK(v == 0.0);
    }
    SUBCASE("constant Laplacian data is already optimal")
    {
        const auto d = GridDomain::rectangle(0.0, 1.0, 0.0, 1.0, 33);
        const Field u0 = Field::sample(d, [](Point p) { return 0.5 * (p.x * p.x + p.y * p.y); });
        const LpSolution s = minimize({d, make_linear(), u0, 64.0}, u0);
        CHECK(s.converged);
        CHECK(s.e_p == doctest::Approx(2.0).epsilon(1e-12));
        for (std::size_t k = 0; k < d->size(); ++k) CHECK(s.u.values[k] == doctest::Approx(u0.values[k]).epsilon(1e-12));
    }
    SUBCASE("data of a parabola")
    {
        const auto d = GridDomain::interval(0.0, 1.0, 101);
        const Field u0 = Field::sample(d, [](Point p) { return p.x - p.x * p.x; });
        Field init = u0;
        for (const std::size_t k : d->free_nodes()) init.values[k] += 0.01 * std::sin(9.0 * d->point(k).x);
        const LpSolution s = minimize({d, make_linear(), u0, 32.0}, init);
        CHECK(s.e_p == doctest::Approx(2.0).epsilon(1e-9));
        const Field l = laplacian(s.u);
        for (const std::size_t k : d->eval_nodes()) CHECK(l.values[k] == doctest::Approx(-2.0).epsilon(1e-7));
    }
}

TEST_CASE("stationarity makes the dual discretely harmonic")
{
    const auto d = GridDomain::rectangle(0.0, 1.0, 0.0, 1.0, 21);
    const Field u0 = Field::sample(d, [](Point p) { return std::exp(p.x) * std::cos(2.0 * p.y) + p.x * p.y * p.y; });
    const LpProblem pb{d, make_linear(), u0, 8.0};
    const LpSolution s = minimize(pb, u0);
    REQUIRE(s.converged);
    const double h2 = d->h() * d->h();
    double worst = 0.0;
    // hat at each free node j: sum_k f_k (Delta_h phi_j)_k h^2
    for (const std::size_t j : d->free_nodes()) {
        double pair = -4.0 * s.f.values[j];
        for (const auto nb : d->neighbours(j)) pair += s.f.values[static_cast<std::size_t>(nb)];
        worst = std::max(worst, std::abs(pair / h2 * h2));
    }
    CHECK(worst <= 10.0 * s.grad_norm);
    const Stationarity st = stationarity(pb, s.u);
    CHECK(st.grad_norm == doctest::Approx(s.grad_norm).epsilon(1e-12));
}

TEST_CASE("convexity along random segments above the threshold")
{
    const auto d = GridDomain::interval(0.0, 1.0, 40);
    const FModel tilt = make_arctan_tilt(0.5);
    const Field u0 = Field::sample(d, [](Point p) { return p.x * p.x; });
    const LpProblem pb{d, tilt, u0, convex_exponent(tilt)};
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 1e-3);
    auto Ep = [&](const Field& v) { return std::pow(energy(pb, v).e_p, pb.p); };
    for (int t = 0; t < 50; ++t) {
        Field a = u0;
        Field b = u0;
        for (const std::size_t k : d->free_nodes()) {
            a.values[k] += n(rng);
            b.values[k] += n(rng);
        }
        Field mid = u0;
        for (std::size_t k = 0; k < d->size(); ++k) mid.values[k] = 0.5 * (a.values[k] + b.values[k]);
        CHECK(Ep(mid) <= 0.5 * (Ep(a) + Ep(b)) * (1.0 + 1e-12));
    }
}

TEST_CASE("invalid problems")
{
    const auto d = GridDomain::interval(0.0, 1.0, 30);
    const Field u0 = Field::sample(d, [](Point p) { return p.x * p.x; });
    CHECK_THROWS_AS(minimize({d, make_arctan_tilt(0.5), u0, 4.0}, u0), ConfigError);
    CHECK_THROWS_AS(minimize({d, make_linear(), u0, 1.5}, u0), ConfigError);
    const auto other = GridDomain::interval(0.0, 1.0, 31);
    CHECK_THROWS_AS(minimize({d, make_linear(), Field(other), 2.0}, u0), ConfigError);

}
