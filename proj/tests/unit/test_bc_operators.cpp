#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include <gtest/gtest.h>

#include "bcm/bc_operators.hpp"
#include "bcm/control.hpp"
#include "support.hpp"

using namespace bcm;

namespace {

/// Samples on [0,T] (n = 501, T = 5).
template <class F>
BoundarySignal on_half(F fn, std::size_t n = 501, double T = 5.0)
{
    return BoundarySignal::sample(n, T / static_cast<double>(n - 1), fn, fn);
}

Potential mild_q(const Grid1D& g)
{
    return Potential::sample(g, [](double x) { return 0.5 + 0.3 * std::cos(std::numbers::pi * x) + 0.2 * x; });
}

} // namespace

TEST(TimeReverse, Examples)
{
    const auto u = on_half([](double t) { return t; });
    const auto r = time_reverse(u);
    for (std::size_t k = 0; k < u.size(); ++k)
        EXPECT_NEAR(r.left[k], 5.0 - u.left[k], 1e-12);
    EXPECT_EQ(time_reverse(r).left, u.left);

    auto spike = BoundarySignal::zeros(11, 0.5);
    spike.right[3] = 1.0;
    EXPECT_EQ(time_reverse(spike).right[11 - 1 - 3], 1.0);

    const auto f = test::random_signal(101, 0.05, 3), h = test::random_signal(101, 0.05, 4);
    EXPECT_NEAR(inner_product_time_boundary(time_reverse(f), time_reverse(h)), inner_product_time_boundary(f, h), 1e-12);
}

TEST(LowpassJ, Examples)
{
    const std::size_t n = 1001; // [0,10]
    const double T = 5.0;
    const auto one = on_half([](double) { return 1.0; }, n, 2 * T);
    const auto tau = on_half([](double t) { return t; }, n, 2 * T);
    const auto odd = on_half([&](double t) { return std::sin(3.0 * (t - T)) + (t - T); }, n, 2 * T);
    const auto J1 = lowpass_J(one), Jt = lowpass_J(tau), Jo = lowpass_J(odd);
    ASSERT_EQ(J1.size(), 501u);
    for (std::size_t k = 0; k < J1.size(); ++k)
    {
        const double t = static_cast<double>(k) * J1.dt;
        EXPECT_NEAR(J1.left[k], T - t, 1e-12);
        EXPECT_NEAR(Jt.right[k], T * (T - t), 1e-10);
        EXPECT_NEAR(Jo.left[k], 0.0, 1e-12);
    }
    EXPECT_THROW(lowpass_J(BoundarySignal::zeros(10, 0.1)), DimensionError);
}

TEST(LowpassJ, IsLinear)
{
    const auto f = test::random_signal(201, 0.05, 8), g = test::random_signal(201, 0.05, 9);
    const auto lhs = lowpass_J(2.0 * f - g);
    const auto rhs = 2.0 * lowpass_J(f) - lowpass_J(g);
    EXPECT_LT(test::max_abs_diff(lhs.left, rhs.left), 1e-12);
    EXPECT_LT(test::max_abs_diff(lhs.right, rhs.right), 1e-12);
}

TEST(ExtendZero, PadsWithZerosAndHalvesTheSeam)
{
    const auto one = on_half([](double) { return 1.0; });
    const auto e = extend_zero(one);
    ASSERT_EQ(e.size(), 1001u);
    for (std::size_t k = 0; k < 500; ++k)
        EXPECT_EQ(e.left[k], 1.0);
    EXPECT_EQ(e.left[500], 0.5);
    for (std::size_t k = 501; k < e.size(); ++k)
        EXPECT_EQ(e.right[k], 0.0);
    const auto z = extend_zero(BoundarySignal::zeros(501, 0.01));
    EXPECT_EQ(test::max_abs(z.left) + test::max_abs(z.right), 0.0);
}

TEST(ExtendZero, IsAdjointToRestriction)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed)
    {
        const auto f = test::random_signal(301, 0.02, seed);
        const auto g = test::random_signal(601, 0.02, seed + 50);
        const double lhs = inner_product_time_boundary(extend_zero(f), g);
        const double rhs = inner_product_time_boundary(f, restrict_T(g));
        EXPECT_NEAR(lhs, rhs, 1e-12 * (std::abs(lhs) + 1.0));
    }
    EXPECT_EQ(restrict_T(extend_zero(on_half([](double t) { return t; }))).left[100], 1.0);
    EXPECT_THROW(restrict_T(BoundarySignal::zeros(10, 0.1)), DimensionError);
}

TEST(ApplyK, ZeroMapsToZero)
{
    const auto g = test::coarse_grid();
    const auto Kh = apply_K(nd_map_of(mild_q(g), g), BoundarySignal::zeros(g.half_samples(), g.dt()));
    EXPECT_EQ(test::max_abs(Kh.left) + test::max_abs(Kh.right), 0.0);
}

TEST(ApplyK, IsSymmetric)
{
    const auto g = Grid1D::desk();
    const auto q = mild_q(g);
    for (const auto& map : {nd_map_of(q, g), linearized_map_of(Potential::zero(g), q, g)})
    {
        for (std::uint64_t seed = 0; seed < 3; ++seed)
        {
            const auto f = random_boundary_signal(g, 10 + seed), h = random_boundary_signal(g, 20 + seed);
            EXPECT_LE(symmetry_gap(map, f, h), 1e-4 * norm_time_boundary(f) * norm_time_boundary(h));
        }
    }
}

TEST(ApplyK, IsLinearInTheMap)
{
    const auto g = test::coarse_grid();
    const auto q0 = mild_q(g);
    const auto qdot = Potential::sample(g, [](double x) { return std::sin(std::numbers::pi * x); });
    const auto K0 = nd_map_of(q0, g);
    const auto Kd = linearized_map_of(q0, qdot, g);
    const MeasurementMap sum = [&](const BoundarySignal& f) { return K0(f) + Kd(f); };
    const auto h = random_boundary_signal(g, 3);
    const auto lhs = apply_K(sum, h);
    const auto rhs = apply_K(K0, h) + apply_K(Kd, h);
    const double scale = test::max_abs(lhs.left) + test::max_abs(lhs.right);
    EXPECT_LT(test::max_abs_diff(lhs.left, rhs.left), 1e-13 * scale);
    EXPECT_LT(test::max_abs_diff(lhs.right, rhs.right), 1e-13 * scale);
}

TEST(NdMap, RestrictedAdjointIsReversalConjugate)
{
    // (Lambda_T f, g) = (f, R Lambda_T R g) on [0,T]
    const auto g = Grid1D::desk();
    const auto q = mild_q(g);
    auto lam_T = [&](const BoundarySignal& f) { return restrict_T(nd_map(q, extend_zero(f), g)); };
    const auto f = random_boundary_signal(g, 31), h = random_boundary_signal(g, 32);
    const double lhs = inner_product_time_boundary(lam_T(f), h);
    const double rhs = inner_product_time_boundary(f, time_reverse(lam_T(time_reverse(h))));
    EXPECT_NEAR(lhs, rhs, 1e-3 * norm_time_boundary(f) * norm_time_boundary(h));
}

TEST(Blagoveshchenskii, ZeroControlsGiveZeroReport)
{
    const auto g = test::coarse_grid();
    const auto z = BoundarySignal::zeros(g.half_samples(), g.dt());
    const auto r = verify_blagoveshchenskii(mild_q(g), z, z, g);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_EQ(r.rhs, 0.0);
    EXPECT_EQ(r.relative_gap, 0.0);
}

TEST(Blagoveshchenskii, HoldsAndConvergesAtSecondOrder)
{
    const auto g = test::coarse_grid();
    for (std::uint64_t seed = 0; seed < 3; ++seed)
    {
        const auto coarse = verify_blagoveshchenskii(mild_q(g), random_boundary_signal(g, seed),
                                                     random_boundary_signal(g, seed + 100), g);
        const auto gf = g.refined();
        const auto fine = verify_blagoveshchenskii(mild_q(gf), random_boundary_signal(gf, seed),
                                                   random_boundary_signal(gf, seed + 100), gf);
        EXPECT_LT(coarse.relative_gap, 1e-3);
        EXPECT_GT(coarse.gap / fine.gap, 3.0);
        EXPECT_LT(coarse.gap / fine.gap, 5.0);
    }
}

TEST(Corollary, ZeroControlsGiveZeroGap)
{
    const auto g = test::coarse_grid();
    const auto z = BoundarySignal::zeros(g.half_samples(), g.dt());
    EXPECT_EQ(verify_corollary(mild_q(g), z, z, z, g).gap, 0.0);
}

TEST(Corollary, ConstantTargetPairsToMinusIntegralOfQ)
{
    const auto g = Grid1D::desk();
    const auto q = Potential::sample(g, [](double x) { return 0.02 * (1.0 + x); });
    const auto c = synthesize_control(extend(TrigPoly::constant(1.0), 2, g), g);
    const auto r = verify_corollary(q, c.f, c.f_tt, c.f, g);
    const double expected = -inner_product_space(q.values(), std::vector<double>(g.nx(), 1.0), g); // -0.04
    EXPECT_LT(r.relative_gap, 1e-6);
    EXPECT_NEAR(r.lhs, expected, 0.05 * std::abs(expected));
    EXPECT_NEAR(r.rhs, expected, 0.05 * std::abs(expected));
}

TEST(Corollary, GapConvergesAtSecondOrder)
{
    // 101 nodes leave the bump under-resolved; start one level finer.
    const auto g = test::coarse_grid().refined();
    auto gap = [](const Grid1D& grid) {
        const auto q = mild_q(grid);
        const auto f = synthesize_control(extend(TrigPoly::cosine(1), 2, grid), grid);
        const auto h = synthesize_control(extend(TrigPoly::sine(2), 2, grid), grid);
        return verify_corollary(q, f.f, f.f_tt, h.f, grid).gap;
    };
    const double ratio = gap(g) / gap(g.refined());
    EXPECT_GT(ratio, 3.0);
    EXPECT_LT(ratio, 5.0);
}

TEST(TraceCache, ComputesOncePerKeyAndIsThreadSafe)
{
    TraceCache cache;
    std::atomic<int> calls{0};
    auto compute = [&] {
        ++calls;
        return BoundarySignal::zeros(4, 1.0);
    };
    cache.get_or_insert("a", compute);
    cache.get_or_insert("a", compute);
    EXPECT_EQ(calls.load(), 1);
    std::vector<std::thread> pool;
    for (int i = 0; i < 8; ++i)
        pool.emplace_back([&, i] {
            for (int k = 0; k < 100; ++k)
                cache.get_or_insert("k" + std::to_string((i + k) % 10), [&] { return BoundarySignal::zeros(3, 1.0); });
        });
    for (auto& t : pool)
        t.join();
    EXPECT_EQ(cache.size(), 11u);
    EXPECT_TRUE(cache.contains("k3"));
}
