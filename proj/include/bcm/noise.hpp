#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "bcm/core_types.hpp"

namespace bcm {

/// Where measurement noise is injected.
///  - difference_trace: on the returned (linearized or differenced) trace;
///  - each_map_trace: independently on Lambda_q f and Lambda_q0 f before
///    differencing (nonlinear-difference oracles only; elsewhere it acts like
///    difference_trace).
enum class NoiseTarget { none, difference_trace, each_map_trace };

inline std::string to_string(NoiseTarget t)
{
    switch (t)
    {
    case NoiseTarget::none: return "none";
    case NoiseTarget::difference_trace: return "difference-trace";
    case NoiseTarget::each_map_trace: return "each-map-trace";
    }
    return "none";
}

inline NoiseTarget noise_target_from_string(const std::string& s)
{
    if (s == "none")
        return NoiseTarget::none;
    if (s == "difference-trace" || s == "difference")
        return NoiseTarget::difference_trace;
    if (s == "each-map-trace" || s == "each-map" || s == "independent")
        return NoiseTarget::each_map_trace;
    throw ParameterError("unknown noise target '" + s + "'");
}

struct NoiseSpec
{
    double level = 0.0; // fraction of the pointwise magnitude of the clean trace
    NoiseTarget target = NoiseTarget::none;
    std::uint64_t seed = 0;

    bool active() const noexcept { return level > 0.0 && target != NoiseTarget::none; }

    friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

inline double rms(const std::vector<double>& v)
{
    if (v.empty())
        return 0.0;
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

/// trace(t) + level * |trace(t)| * g(t), with g i.i.d. standard normal drawn from a
/// stream seeded by (seed, repetition, stream, side). `stream` separates the
/// traces that make up one measurement set.
inline BoundarySignal add_noise(const BoundarySignal& trace, const NoiseSpec& spec, std::uint64_t repetition,
                                std::uint64_t stream = 0)
{
    if (spec.level < 0.0)
        throw ParameterError("noise level must be >= 0");
    if (spec.level == 0.0)
        return trace;
    BoundarySignal out = trace;
    for (Side side : {Side::left, Side::right})
    {
        const auto& clean = trace.side(side);
        std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                          static_cast<std::uint32_t>(repetition), static_cast<std::uint32_t>(repetition >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          side == Side::left ? 0u : 1u};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> gauss(0.0, 1.0);
        auto& dst = out.side(side);
        for (std::size_t k = 0; k < dst.size(); ++k)
            dst[k] += spec.level * std::abs(clean[k]) * gauss(rng);
    }
    return out;
}

} // namespace bcm
