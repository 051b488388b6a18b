#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "bcm/noise.hpp"
#include "bcm/reconstruction.hpp"

namespace bcm {

/// Ground truths of the three reproduction experiments, as functions of the
/// normalized coordinate xh in [-1,1].
namespace truths {

inline double smooth(double xh)
{
    using std::numbers::pi;
    return std::sin(pi * xh) + 2.0 * std::cos(2.0 * pi * xh) + 4.0 * std::sin(4.0 * pi * xh) - 3.0;
}

/// Takes the midpoint value 1/2 at the jump.
inline double heaviside(double xh) { return xh > 0.0 ? 1.0 : (xh < 0.0 ? 0.0 : 0.5); }

/// Truncated Fourier series of the Heaviside function with ceil(N/2) odd sines.
inline double heaviside_projection(double xh, int N)
{
    double s = 0.5;
    for (int n = 1; n <= (N + 1) / 2; ++n)
    {
        const double w = (2 * n - 1) * std::numbers::pi;
        s += 2.0 / w * std::sin(w * xh);
    }
    return s;
}

inline double oscillatory(double xh) { return 20.0 * std::cos(20.0 * std::numbers::pi * xh); }

} // namespace truths

struct ExperimentSettings
{
    int experiment = 1;
    Grid1D grid = Grid1D::desk();
    int basis_n = 10;
    int bump_p = 2;
    std::vector<double> noise_levels{0.0, 0.01, 0.05};
    NoiseTarget noise_target = NoiseTarget::difference_trace;
    int repetitions = 1; // per noisy level; noiseless levels run once
    std::vector<int> averaging_counts{1, 7, 14, 21};
    std::uint64_t seed = 0;
    double epsilon = 0.1; // experiment 3 only
};

/// All repetitions at one noise level.
struct NoiseRun
{
    NoiseSpec noise;
    std::vector<ReconstructionResult> repetitions;
    ReconstructionResult averaged;
    std::vector<double> rel_l2_errors;
    double averaged_error = 0.0;
    /// (M, error of the mean of the first M repetitions) for each averaging count <= repetitions.
    std::vector<std::pair<int, double>> averaging_curve;
    /// Mean profile of the first M repetitions, aligned with averaging_curve.
    std::vector<std::vector<double>> averaging_profiles;
};

struct ExperimentReport
{
    ExperimentSettings settings;
    std::string truth_label;
    std::vector<double> truth;
    std::vector<NoiseRun> runs;
};

/// Arithmetic mean of reconstructions (coefficients and samples).
inline ReconstructionResult average(const std::vector<ReconstructionResult>& rs, std::size_t count)
{
    if (count == 0 || count > rs.size())
        throw ParameterError("average: bad repetition count");
    ReconstructionResult m = rs.front();
    for (std::size_t i = 1; i < count; ++i)
    {
        m.fourier.mean += rs[i].fourier.mean;
        for (std::size_t n = 0; n < m.fourier.cos_coeffs.size(); ++n)
        {
            m.fourier.cos_coeffs[n] += rs[i].fourier.cos_coeffs[n];
            m.fourier.sin_coeffs[n] += rs[i].fourier.sin_coeffs[n];
        }
        for (std::size_t j = 0; j < m.qdot_values.size(); ++j)
            m.qdot_values[j] += rs[i].qdot_values[j];
    }
    const double inv = 1.0 / static_cast<double>(count);
    m.fourier.mean *= inv;
    for (std::size_t n = 0; n < m.fourier.cos_coeffs.size(); ++n)
    {
        m.fourier.cos_coeffs[n] *= inv;
        m.fourier.sin_coeffs[n] *= inv;
    }
    for (auto& v : m.qdot_values)
        v *= inv;
    m.rel_l2_error.reset();
    return m;
}

namespace detail {

inline std::uint64_t level_seed(std::uint64_t seed, std::size_t level_index)
{
    return seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(level_index + 1));
}

/// Runs every noise level against an oracle and scores against `truth`.
/// `offset` is added to each reconstruction (the known background potential).
inline ExperimentReport run_levels(const ExperimentSettings& s, const MeasurementOracle& oracle,
                                   std::vector<double> truth, std::string label, const std::vector<double>& offset)
{
    const auto& grid = s.grid;
    if (s.repetitions < 1)
        throw ParameterError("repetitions must be >= 1");
    const auto basis = HelmholtzBasis::make(s.basis_n, grid);
    const auto controls = synthesize_basis_controls(basis, s.bump_p, grid);
    oracle.prefetch(controls);

    ExperimentReport report;
    report.settings = s;
    report.truth_label = std::move(label);
    report.truth = std::move(truth);

    auto score = [&](ReconstructionResult& r) {
        for (std::size_t j = 0; j < r.qdot_values.size(); ++j)
            r.qdot_values[j] += offset[j];
        r.rel_l2_error = relative_l2_error(r.qdot_values, report.truth, grid);
    };

    for (std::size_t li = 0; li < s.noise_levels.size(); ++li)
    {
        const double level = s.noise_levels[li];
        if (level < 0.0)
            throw ParameterError("noise level must be >= 0");
        NoiseRun run;
        run.noise = {level, level > 0.0 ? s.noise_target : NoiseTarget::none, detail::level_seed(s.seed, li)};
        const auto noisy = oracle.with_noise(run.noise);
        const int reps = level > 0.0 ? s.repetitions : 1;
        run.repetitions.resize(static_cast<std::size_t>(reps));
        parallel_for(run.repetitions.size(), [&](std::size_t r) {
            auto rec = reconstruct(noisy, basis, controls, r);
            score(rec);
            run.repetitions[r] = std::move(rec);
        });
        for (const auto& rec : run.repetitions)
            run.rel_l2_errors.push_back(*rec.rel_l2_error);
        run.averaged = average(run.repetitions, run.repetitions.size());
        run.averaged_error = relative_l2_error(run.averaged.qdot_values, report.truth, grid);
        run.averaged.rel_l2_error = run.averaged_error;
        for (int M : s.averaging_counts)
        {
            if (M < 1 || M > reps)
                continue;
            auto mean = average(run.repetitions, static_cast<std::size_t>(M));
            run.averaging_curve.emplace_back(M, relative_l2_error(mean.qdot_values, report.truth, grid));
            run.averaging_profiles.push_back(std::move(mean.qdot_values));
        }
        report.runs.push_back(std::move(run));
    }
    return report;
}

template <class F>
std::vector<double> sample_normalized(const Grid1D& grid, F&& fn)
{
    std::vector<double> v(grid.nx());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = fn((grid.x(j) - grid.center()) / grid.half_width());
    return v;
}

} // namespace detail

/// Smooth perturbation, synthetic linearized measurements, errors against qdot.
inline ExperimentReport run_experiment1(ExperimentSettings s)
{
    s.experiment = 1;
    const auto& grid = s.grid;
    Potential qdot(detail::sample_normalized(grid, truths::smooth));
    auto oracle = MeasurementOracle::synthetic_linearized(grid, Potential::zero(grid), qdot);
    return detail::run_levels(s, oracle, {qdot.values().begin(), qdot.values().end()},
                              "sin(pi x) + 2 cos(2 pi x) + 4 sin(4 pi x) - 3", std::vector<double>(grid.nx(), 0.0));
}

/// Heaviside perturbation; errors against its projection H_N onto the reconstructible span.
inline ExperimentReport run_experiment2(ExperimentSettings s)
{
    s.experiment = 2;
    const auto& grid = s.grid;
    Potential qdot(detail::sample_normalized(grid, truths::heaviside));
    auto oracle = MeasurementOracle::synthetic_linearized(grid, Potential::zero(grid), qdot);
    const int N = s.basis_n;
    return detail::run_levels(s, oracle,
                              detail::sample_normalized(grid, [N](double xh) { return truths::heaviside_projection(xh, N); }),
                              "H_N", std::vector<double>(grid.nx(), 0.0));
}

/// q = q0 + eps qdot + eps^2 qddot with q0 = 0; Lambda_q - Lambda_q0 replaces the
/// linearized map and the reconstruction (plus q0) is scored against q.
inline ExperimentReport run_experiment3(ExperimentSettings s)
{
    s.experiment = 3;
    if (!(s.epsilon > 0.0))
        throw ParameterError("experiment 3 needs epsilon > 0");
    const auto& grid = s.grid;
    const double eps = s.epsilon;
    Potential q0 = Potential::zero(grid);
    Potential q(detail::sample_normalized(
        grid, [eps](double xh) { return eps * truths::smooth(xh) + eps * eps * truths::oscillatory(xh); }));
    auto oracle = MeasurementOracle::nonlinear_difference(grid, q0, q);
    return detail::run_levels(s, oracle, {q.values().begin(), q.values().end()}, "q0 + eps qdot + eps^2 qddot",
                              {q0.values().begin(), q0.values().end()});
}

inline ExperimentReport run_experiment(const ExperimentSettings& s)
{
    switch (s.experiment)
    {
    case 1: return run_experiment1(s);
    case 2: return run_experiment2(s);
    case 3: return run_experiment3(s);
    default: throw ParameterError("experiment must be 1, 2 or 3");
    }
}

} // namespace bcm
