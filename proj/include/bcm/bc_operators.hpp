#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

#include "bcm/core_types.hpp"
#include "bcm/wave_solver.hpp"

namespace bcm {

/// Any map from boundary data on [0,2T] to a boundary response on [0,2T]
/// (Lambda_q, Lambda_q0, the linearized map, a file-backed measurement, ...).
using MeasurementMap = std::function<BoundarySignal(const BoundarySignal&)>;

/// R u(t) = u(T - t) on [0,T].
inline BoundarySignal time_reverse(const BoundarySignal& u)
{
    BoundarySignal out = u;
    std::reverse(out.left.begin(), out.left.end());
    std::reverse(out.right.begin(), out.right.end());
    return out;
}

/// J f(t) = 1/2 int_t^{2T-t} f, for f sampled on [0,2T] (odd length); result on [0,T].
inline BoundarySignal lowpass_J(const BoundarySignal& f)
{
    f.check();
    const std::size_t n = f.size();
    if (n % 2 == 0)
        throw DimensionError("lowpass_J: signal on [0,2T] must have an odd number of samples");
    const std::size_t m = (n - 1) / 2;
    auto out = BoundarySignal::zeros(m + 1, f.dt);
    out.t0 = f.t0;
    std::vector<double> cum(n);
    for (Side s : {Side::left, Side::right})
    {
        const auto& g = f.side(s);
        cum[0] = 0.0;
        for (std::size_t i = 1; i < n; ++i)
            cum[i] = cum[i - 1] + 0.5 * f.dt * (g[i - 1] + g[i]);
        auto& o = out.side(s);
        for (std::size_t k = 0; k <= m; ++k)
            o[k] = 0.5 * (cum[n - 1 - k] - cum[k]);
    }
    return out;
}

/// P_T^*: extension by zero from [0,T] to [0,2T].
///
/// The sample at t = T sits on the jump and carries half of f(T), which makes
/// the trapezoid pairings on [0,T] and [0,2T] exactly adjoint.
inline BoundarySignal extend_zero(const BoundarySignal& f)
{
    f.check();
    const std::size_t m = f.size() - 1;
    auto out = BoundarySignal::zeros(2 * m + 1, f.dt);
    out.t0 = f.t0;
    for (Side s : {Side::left, Side::right})
    {
        const auto& src = f.side(s);
        auto& dst = out.side(s);
        std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(m), dst.begin());
        dst[m] = 0.5 * src[m];
    }
    return out;
}

/// P_T: restriction from [0,2T] to [0,T].
inline BoundarySignal restrict_T(const BoundarySignal& g)
{
    g.check();
    if (g.size() % 2 == 0)
        throw DimensionError("restrict_T: signal on [0,2T] must have an odd number of samples");
    const std::size_t m = (g.size() - 1) / 2;
    BoundarySignal out{{g.left.begin(), g.left.begin() + static_cast<std::ptrdiff_t>(m + 1)},
                       {g.right.begin(), g.right.begin() + static_cast<std::ptrdiff_t>(m + 1)},
                       g.t0,
                       g.dt};
    return out;
}

/// Second probe of the connecting operator: P_T^* R J P_T^* h.
inline BoundarySignal reversed_probe(const BoundarySignal& h)
{
    return extend_zero(time_reverse(lowpass_J(extend_zero(h))));
}

/// K h = J (Lambda P*h) - R P_T (Lambda P* R J P* h), given both responses.
inline BoundarySignal connecting_from_responses(const BoundarySignal& direct_response,
                                                const BoundarySignal& reversed_response)
{
    return lowpass_J(direct_response) - time_reverse(restrict_T(reversed_response));
}

/// K h = J Lambda P_T^* h - R Lambda_T R J P_T^* h for h on [0,T].
inline BoundarySignal apply_K(const MeasurementMap& map, const BoundarySignal& h)
{
    return connecting_from_responses(map(extend_zero(h)), map(reversed_probe(h)));
}

/// Measurement maps of the direct problem on a fixed grid.
inline MeasurementMap nd_map_of(Potential q, Grid1D grid)
{
    return [q = std::move(q), grid](const BoundarySignal& f) { return nd_map(q, f, grid); };
}

inline MeasurementMap linearized_map_of(Potential q0, Potential qdot, Grid1D grid)
{
    return [q0 = std::move(q0), qdot = std::move(qdot), grid](const BoundarySignal& f) {
        return linearized_nd_map(q0, qdot, f, grid);
    };
}

/// Memoizes responses per probe id. Safe for concurrent insert-or-get; a
/// racing duplicate computation keeps the first stored value.
class TraceCache
{
public:
    template <class Compute>
    BoundarySignal get_or_insert(const std::string& key, Compute&& compute)
    {
        {
            std::lock_guard lock(mutex_);
            if (auto it = store_.find(key); it != store_.end())
                return it->second;
        }
        BoundarySignal value = compute();
        std::lock_guard lock(mutex_);
        return store_.try_emplace(key, std::move(value)).first->second;
    }

    bool contains(const std::string& key) const
    {
        std::lock_guard lock(mutex_);
        return store_.count(key) != 0;
    }

    std::size_t size() const
    {
        std::lock_guard lock(mutex_);
        return store_.size();
    }

private:
    mutable std::mutex mutex_;
    std::map<std::string, BoundarySignal> store_;
};

/// Two independently computed sides of an identity and their discrepancy.
struct IdentityReport
{
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;          // |lhs - rhs|
    double relative_gap = 0.0; // gap / (||f|| ||h||), 0 when either control vanishes
};

namespace detail {

inline IdentityReport make_report(double lhs, double rhs, double scale)
{
    IdentityReport r{lhs, rhs, std::abs(lhs - rhs), 0.0};
    r.relative_gap = scale > 0.0 ? r.gap / scale : 0.0;
    return r;
}

} // namespace detail

/// (f, K h) from boundary traces against (u^f(T), u^h(T)) from interior solves.
inline IdentityReport verify_blagoveshchenskii(const Potential& q, const BoundarySignal& f, const BoundarySignal& h,
                                               const Grid1D& grid)
{
    const double lhs = inner_product_time_boundary(f, apply_K(nd_map_of(q, grid), h));
    const auto uf = state_at(q, extend_zero(f), grid, grid.half_index());
    const auto uh = state_at(q, extend_zero(h), grid, grid.half_index());
    const double rhs = inner_product_space(uf, uh, grid);
    return detail::make_report(lhs, rhs, norm_time_boundary(f) * norm_time_boundary(h));
}

/// (f_tt, K h) against (u_xx^f(T) - q u^f(T), u^h(T)), the interior operator
/// evaluated with the scheme's own ghost-node Laplacian and Neumann data f(T).
inline IdentityReport verify_corollary(const Potential& q, const BoundarySignal& f, const BoundarySignal& f_tt,
                                       const BoundarySignal& h, const Grid1D& grid)
{
    f.require_compatible(f_tt);
    const double lhs = inner_product_time_boundary(f_tt, apply_K(nd_map_of(q, grid), h));
    const std::size_t kT = grid.half_index();
    const auto uf = state_at(q, extend_zero(f), grid, kT);
    const auto uh = state_at(q, extend_zero(h), grid, kT);
    std::vector<double> op(grid.nx());
    apply_spatial_operator(uf, q.values(), f.left.back(), f.right.back(), grid.dx(), op);
    const double rhs = inner_product_space(op, uh, grid);
    return detail::make_report(lhs, rhs, norm_time_boundary(f_tt) * norm_time_boundary(h));
}

/// |(K f, h) - (f, K h)| for a given measurement map.
inline double symmetry_gap(const MeasurementMap& map, const BoundarySignal& f, const BoundarySignal& h)
{
    return std::abs(inner_product_time_boundary(apply_K(map, f), h) -
                    inner_product_time_boundary(f, apply_K(map, h)));
}

/// Random smooth data on [0,T]: sum_n c_n sin(n pi t / T) per side, c_n ~ N(0,1).
inline BoundarySignal random_boundary_signal(const Grid1D& grid, std::uint64_t seed, int modes = 4)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t kT = grid.half_index();
    auto f = BoundarySignal::zeros(kT + 1, grid.dt());
    for (Side side : {Side::left, Side::right})
    {
        for (int n = 1; n <= modes; ++n)
        {
            const double c = gauss(rng);
            for (std::size_t k = 0; k <= kT; ++k)
                f.side(side)[k] += c * std::sin(n * std::numbers::pi * static_cast<double>(k) / static_cast<double>(kT));
        }
    }
    return f;
}

} // namespace bcm
