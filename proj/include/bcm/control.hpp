#pragma once

#include <array>
#include <cmath>
#include <limits>

#include "bcm/bc_operators.hpp"
#include "bcm/core_types.hpp"
#include "bcm/wave_solver.hpp"

namespace bcm {

namespace detail {

inline double ipow(double x, int n)
{
    double r = 1.0;
    for (int i = 0; i < n; ++i)
        r *= x;
    return r;
}

/// Value and first three derivatives of exp(1 - 1/(1 - s^{2p})) on |s| < 1.
inline std::array<double, 4> bump_jet(double s, int p)
{
    const int e = 2 * p;
    const double w = 1.0 - ipow(s, e);
    if (!(w > 0.0))
        return {0.0, 0.0, 0.0, 0.0};
    const double inv = 1.0 / w;
    if (inv > 740.0) // exp underflows; every derivative is a polynomial in inv times B
        return {0.0, 0.0, 0.0, 0.0};
    const double B = std::exp(1.0 - inv);
    const double w1 = -e * ipow(s, e - 1);
    const double w2 = -e * (e - 1) * ipow(s, e - 2);
    const double w3 = -e * (e - 1) * (e - 2) * ipow(s, e - 3);
    const double inv2 = inv * inv, inv3 = inv2 * inv, inv4 = inv3 * inv;
    // g = 1 - 1/w
    const double g1 = w1 * inv2;
    const double g2 = w2 * inv2 - 2.0 * w1 * w1 * inv3;
    const double g3 = w3 * inv2 - 6.0 * w1 * w2 * inv3 + 6.0 * w1 * w1 * w1 * inv4;
    return {B, g1 * B, (g2 + g1 * g1) * B, (g3 + 3.0 * g1 * g2 + g1 * g1 * g1) * B};
}

} // namespace detail

/// Compactly supported extension of a target beyond [a,b]:
///   phi on [a,b],  phi * exp(1 - 1/(1 - (x-a)^{2p})) on (a-1,a),
///   phi * exp(1 - 1/(1 - (x-b)^{2p})) on (b,b+1),  0 elsewhere.
/// It is C^{2p-1} at a and b and smooth elsewhere.
struct ExtendedTarget
{
    TrigPoly phi;
    int p = 2;
    double a = -1.0;
    double b = 1.0;

    /// n-th derivative, n <= 3.
    double derivative(int n, double x) const
    {
        if (x >= a && x <= b)
            return phi.derivative(n, x);
        double s;
        if (x > a - 1.0 && x < a)
            s = x - a;
        else if (x > b && x < b + 1.0)
            s = x - b;
        else
            return 0.0;
        const auto B = detail::bump_jet(s, p);
        static constexpr int binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
        double sum = 0.0;
        for (int k = 0; k <= n; ++k)
            sum += binom[n][k] * phi.derivative(k, x) * B[static_cast<std::size_t>(n - k)];
        return sum;
    }

    double operator()(double x) const { return derivative(0, x); }
};

inline ExtendedTarget extend(const TrigPoly& phi, int p, const Grid1D& grid)
{
    if (p < 2)
        throw ParameterError("extend: bump exponent p must be >= 2, got " + std::to_string(p));
    return {phi, p, grid.a(), grid.b()};
}

/// Boundary control steering the q = 0 wave to the target at t = T, and its
/// second time derivative, both sampled on [0,T].
struct ControlPair
{
    BoundarySignal f;
    BoundarySignal f_tt;
    ExtendedTarget target;
    double lambda = std::numeric_limits<double>::quiet_NaN();
    int id = -1;
};

/// Time-reversal control from d'Alembert's formula
///   v(t,x) = 1/2 [phit(x + t - T) + phit(x + T - t)],  f = dv/dnu on {a,b}.
inline ControlPair synthesize_control(const ExtendedTarget& target, const Grid1D& grid, int id = -1)
{
    const double T = grid.T();
    if (T < (target.b - target.a) + 2.0)
        throw ParameterError("synthesize_control: T must be at least (b - a) + 2");
    const std::size_t kT = grid.half_index();
    ControlPair pair;
    pair.f = BoundarySignal::zeros(kT + 1, grid.dt());
    pair.f_tt = BoundarySignal::zeros(kT + 1, grid.dt());
    pair.target = target;
    pair.id = id;
    try
    {
        pair.lambda = target.phi.helmholtz_lambda();
    }
    catch (const ParameterError&)
    {
    }
    for (std::size_t k = 0; k <= kT; ++k)
    {
        const double t = T * static_cast<double>(k) / static_cast<double>(kT);
        for (Side side : {Side::left, Side::right})
        {
            const double x = side == Side::left ? target.a : target.b;
            const double sgn = 0.5 * normal_sign(side);
            pair.f.side(side)[k] = sgn * (target.derivative(1, x + t - T) + target.derivative(1, x + T - t));
            pair.f_tt.side(side)[k] = sgn * (target.derivative(3, x + t - T) + target.derivative(3, x + T - t));
        }
    }
    return pair;
}

/// ||u^f(T) - phi|| / ||phi|| for the q = 0 solution driven by the control.
inline double control_residual(const ControlPair& pair, const Grid1D& grid)
{
    const auto u = state_at(Potential::zero(grid), extend_zero(pair.f), grid, grid.half_index());
    const auto phi = pair.target.phi.sample(grid);
    return relative_l2_error(u, phi, grid);
}

} // namespace bcm
