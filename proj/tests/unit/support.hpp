#pragma once

#include <random>
#include <vector>

#include "bcm/core_types.hpp"

namespace bcm::test {

/// Coarse grid with the desk grid's Courant number dt/dx = 1/4.
inline Grid1D coarse_grid() { return {-1.0, 1.0, 101, 5.0, 2001}; }

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v)
        x = g(rng);
    return v;
}

inline BoundarySignal random_signal(std::size_t n, double dt, std::uint64_t seed)
{
    return {random_vector(n, seed), random_vector(n, seed + 1000), 0.0, dt};
}

inline double max_abs_diff(const std::vector<double>& u, const std::vector<double>& v)
{
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        m = std::max(m, std::abs(u[i] - v[i]));
    return m;
}

inline double max_abs(const std::vector<double>& u)
{
    double m = 0.0;
    for (double x : u)
        m = std::max(m, std::abs(x));
    return m;
}

} // namespace bcm::test
