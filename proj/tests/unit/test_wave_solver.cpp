#include <cmath>
#include <memory>
#include <numbers>

#include <gtest/gtest.h>

#include "bcm/experiments.hpp"
#include "bcm/wave_solver.hpp"
#include "support.hpp"

using namespace bcm;

namespace {

/// Smooth data supported in t in (t0, t0 + w) on both sides.
BoundarySignal pulse(const Grid1D& g, double t0 = 0.5, double w = 1.5, double right_scale = -0.7)
{
    auto bump = [=](double t) {
        const double s = (t - t0) / w;
        return s > 0.0 && s < 1.0 ? std::pow(std::sin(std::numbers::pi * s), 4) : 0.0;
    };
    return BoundarySignal::sample(
        g.nt(), g.dt(), bump, [&](double t) { return right_scale * bump(t); });
}

Potential smooth_q(const Grid1D& g, double scale = 1.0)
{
    return Potential::sample(g, [=](double x) { return scale * (1.0 + 0.5 * std::cos(std::numbers::pi * x) + x); });
}

double max_diff_on_common_samples(const BoundarySignal& coarse, const BoundarySignal& fine)
{
    const std::size_t stride = (fine.size() - 1) / (coarse.size() - 1);
    double m = 0.0;
    for (std::size_t k = 0; k < coarse.size(); ++k)
    {
        m = std::max(m, std::abs(coarse.left[k] - fine.left[k * stride]));
        m = std::max(m, std::abs(coarse.right[k] - fine.right[k * stride]));
    }
    return m;
}

} // namespace

TEST(SolveForward, ZeroDataGivesZeroField)
{
    const auto g = test::coarse_grid();
    const auto u = solve_forward(Potential::zero(g), BoundarySignal::zeros(g.nt(), g.dt()), SourceTerm::none(), g);
    for (std::size_t k = 0; k < g.nt(); ++k)
        for (double v : u.row(k))
            ASSERT_EQ(v, 0.0);
}

TEST(SolveForward, FirstTwoRowsAreZero)
{
    const auto g = test::coarse_grid();
    const auto u = solve_forward(smooth_q(g), pulse(g, 0.0, 1.0), SourceTerm::none(), g);
    for (std::size_t k = 0; k < 2; ++k)
        for (double v : u.row(k))
            EXPECT_EQ(v, 0.0);
}

TEST(SolveForward, ConstantSourceGivesTimeSquared)
{
    const auto g = test::coarse_grid();
    auto ones = std::make_shared<WaveField>(g);
    for (std::size_t k = 0; k < g.nt(); ++k)
        for (auto& v : ones->row(k))
            v = 1.0;
    const auto source = SourceTerm::rank_one(ones, Potential(std::vector<double>(g.nx(), 2.0)));
    const auto u = solve_forward(Potential::zero(g), BoundarySignal::zeros(g.nt(), g.dt()), source, g);
    const double dt = g.dt();
    for (std::size_t k : {std::size_t{2}, std::size_t{50}, std::size_t{400}})
    {
        const double t = g.t(k);
        for (std::size_t j : {std::size_t{0}, g.nx() / 2, g.nx() - 1})
        {
            // leapfrog started from two zero rows: k(k-1) dt^2 = t^2 - t dt
            EXPECT_NEAR(u(k, j), static_cast<double>(k * (k - 1)) * dt * dt, 1e-12 * t * t);
            EXPECT_NEAR(u(k, j), t * t, 1.01 * t * dt);
        }
    }
}

TEST(SolveForward, RejectsMismatchedShapes)
{
    const auto g = test::coarse_grid();
    EXPECT_THROW(nd_map(Potential::zero(g), BoundarySignal::zeros(g.nt() - 1, g.dt()), g), DimensionError);
    EXPECT_THROW(nd_map(Potential(std::vector<double>(3)), BoundarySignal::zeros(g.nt(), g.dt()), g), DimensionError);
    EXPECT_THROW(nd_map(Potential::zero(g), BoundarySignal::zeros(g.nt(), 2 * g.dt()), g), DimensionError);
    auto other = std::make_shared<WaveField>(Grid1D::desk());
    EXPECT_THROW(solve_forward(Potential::zero(g), BoundarySignal::zeros(g.nt(), g.dt()),
                               SourceTerm::rank_one(other, Potential::zero(g)), g),
                 DimensionError);
}

TEST(NdMap, ZeroDataGivesZeroTrace)
{
    const auto g = test::coarse_grid();
    const auto tr = nd_map(smooth_q(g), BoundarySignal::zeros(g.nt(), g.dt()), g);
    EXPECT_EQ(test::max_abs(tr.left) + test::max_abs(tr.right), 0.0);
}

TEST(NdMap, MatchesFullSolveTrace)
{
    const auto g = test::coarse_grid();
    const auto f = pulse(g);
    const auto q = smooth_q(g);
    const auto a = nd_map(q, f, g);
    const auto b = solve_forward(q, f, SourceTerm::none(), g).trace();
    EXPECT_EQ(a.left, b.left);
    EXPECT_EQ(a.right, b.right);
    const auto state = state_at(q, f, g, g.half_index());
    const auto full = solve_forward(q, f, SourceTerm::none(), g);
    const auto row = full.row(g.half_index());
    EXPECT_EQ(state, std::vector<double>(row.begin(), row.end()));
}

TEST(NdMap, IsLinearInData)
{
    const auto g = test::coarse_grid();
    const auto q = smooth_q(g);
    const auto f = test::random_signal(g.nt(), g.dt(), 7);
    const auto h = pulse(g);
    const auto lhs = nd_map(q, 2.5 * f + h, g);
    const auto rhs = 2.5 * nd_map(q, f, g) + nd_map(q, h, g);
    const double scale = test::max_abs(lhs.left) + test::max_abs(lhs.right);
    EXPECT_LT(test::max_abs_diff(lhs.left, rhs.left), 1e-12 * scale);
    EXPECT_LT(test::max_abs_diff(lhs.right, rhs.right), 1e-12 * scale);
}

TEST(NdMap, NeumannSignConvention)
{
    // Positive outward flux at a raises u near a; the wave reaches b only after t = b - a.
    const auto g = test::coarse_grid();
    auto f = BoundarySignal::sample(
        g.nt(), g.dt(), [](double t) { return t > 0.1 && t < 0.6 ? std::pow(std::sin(2 * std::numbers::pi * (t - 0.1)), 2) : 0.0; },
        [](double) { return 0.0; });
    const auto tr = nd_map(Potential::zero(g), f, g);
    const std::size_t k = static_cast<std::size_t>(0.6 / g.dt());
    EXPECT_GT(tr.left[k], 0.0);
    EXPECT_NEAR(tr.right[k], 0.0, 1e-10);
}

TEST(NdMap, ConvergesAtSecondOrder)
{
    const auto g0 = test::coarse_grid();
    const auto g1 = g0.refined();
    const auto g2 = g1.refined();
    auto trace = [](const Grid1D& g) { return nd_map(smooth_q(g), pulse(g), g); };
    const auto t0 = trace(g0), t1 = trace(g1), t2 = trace(g2);
    const double e01 = max_diff_on_common_samples(t0, t1);
    const double e12 = max_diff_on_common_samples(t1, t2);
    EXPECT_NEAR(e01 / e12, 4.0, 0.6);
}

TEST(NdMap, EnergyIsConservedAfterForcing)
{
    const auto g = test::coarse_grid();
    const auto q = smooth_q(g, 0.5);
    const auto f = pulse(g, 0.2, 1.0);
    const auto u = solve_forward(q, f, SourceTerm::none(), g);
    const double dx = g.dx(), dt = g.dt();
    auto energy = [&](std::size_t k) {
        const auto a = u.row(k), b = u.row(k + 1);
        double e = 0.0;
        for (std::size_t j = 0; j < g.nx(); ++j)
        {
            const double w = (j == 0 || j + 1 == g.nx()) ? 0.5 : 1.0;
            e += w * dx * (std::pow((b[j] - a[j]) / dt, 2) + q[j] * a[j] * b[j]);
        }
        for (std::size_t j = 0; j + 1 < g.nx(); ++j)
            e += dx * (a[j + 1] - a[j]) * (b[j + 1] - b[j]) / (dx * dx);
        return 0.5 * e;
    };
    const std::size_t start = static_cast<std::size_t>(1.3 / dt);
    const double e0 = energy(start);
    EXPECT_GT(e0, 0.0);
    for (std::size_t k = start; k + 1 < g.nt(); k += 97)
        EXPECT_NEAR(energy(k), e0, 1e-10 * e0);
}

TEST(LinearizedNdMap, ZeroPerturbationGivesZeroTrace)
{
    const auto g = test::coarse_grid();
    const auto tr = linearized_nd_map(smooth_q(g), Potential::zero(g), pulse(g), g);
    EXPECT_EQ(test::max_abs(tr.left) + test::max_abs(tr.right), 0.0);
}

TEST(LinearizedNdMap, IsLinearInPerturbation)
{
    const auto g = test::coarse_grid();
    const auto qdot = Potential::sample(g, truths::smooth);
    const auto one = linearized_nd_map(Potential::zero(g), qdot, pulse(g), g);
    const auto two = linearized_nd_map(Potential::zero(g), qdot.scaled(2.0), pulse(g), g);
    const double scale = test::max_abs(one.left) + test::max_abs(one.right);
    EXPECT_LT(test::max_abs_diff(two.left, (2.0 * one).left), 1e-13 * scale);
    EXPECT_LT(test::max_abs_diff(two.right, (2.0 * one).right), 1e-13 * scale);
}

TEST(LinearizedNdMap, StoredBackgroundAgreesWithLockstep)
{
    const auto g = test::coarse_grid();
    const auto q0 = smooth_q(g, 0.3);
    const auto qdot = Potential::sample(g, truths::smooth);
    const auto f = pulse(g);
    const auto lock = linearized_nd_map(q0, qdot, f, g);
    auto bg = std::make_shared<const WaveField>(solve_forward(q0, f, SourceTerm::none(), g));
    const auto stored = linearized_nd_map_from_field(q0, bg, qdot);
    const double scale = test::max_abs(lock.left) + test::max_abs(lock.right);
    EXPECT_LT(test::max_abs_diff(lock.left, stored.left), 1e-13 * scale);
    EXPECT_LT(test::max_abs_diff(lock.right, stored.right), 1e-13 * scale);
}

TEST(LinearizedNdMap, IsTheDerivativeOfTheNonlinearMap)
{
    const auto g = test::coarse_grid();
    const auto q0 = Potential::zero(g);
    const auto qdot = Potential::sample(g, [](double x) { return truths::smooth(x); });
    const auto f = pulse(g);
    const auto base = nd_map(q0, f, g);
    const auto lin = linearized_nd_map(q0, qdot, f, g);
    std::vector<double> errs;
    for (double eps : {1e-1, 1e-2, 1e-3})
    {
        auto quotient = (1.0 / eps) * (nd_map(q0 + qdot.scaled(eps), f, g) - base);
        errs.push_back(std::sqrt(inner_product_time_boundary(quotient - lin, quotient - lin)));
    }
    // eps = 0.1 is still pre-asymptotic (mean(eps qdot) = -0.3 grows over t = 10): at least linear decay there.
    EXPECT_GT(errs[0] / errs[1], 8.5);
    EXPECT_NEAR(errs[1] / errs[2], 10.0, 1.5);
}
