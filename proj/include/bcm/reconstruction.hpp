#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bcm/bc_operators.hpp"
#include "bcm/control.hpp"
#include "bcm/core_types.hpp"
#include "bcm/noise.hpp"
#include "bcm/parallel.hpp"
#include "bcm/trace_archive.hpp"
#include "bcm/wave_solver.hpp"

namespace bcm {

/// Targets {1, sin(m k (x-c)), cos(m k (x-c)) : m = 1..N} with k = pi / (b - a),
/// i.e. sin(m pi x / 2), cos(m pi x / 2) on [-1,1]. Element 0 is the constant,
/// element 2m-1 is sin_m and element 2m is cos_m.
struct HelmholtzBasis
{
    int N = 0;
    std::vector<TrigPoly> elements;
    std::vector<double> lambdas;
    double center = 0.0;
    double half_width = 1.0;

    static HelmholtzBasis make(int N, const Grid1D& grid)
    {
        if (N < 0)
            throw ParameterError("basis size N must be >= 0");
        HelmholtzBasis basis;
        basis.N = N;
        basis.center = grid.center();
        basis.half_width = grid.half_width();
        const double k = std::numbers::pi / (2.0 * basis.half_width);
        basis.elements.push_back(TrigPoly::constant(1.0));
        basis.lambdas.push_back(0.0);
        for (int m = 1; m <= N; ++m)
        {
            const double lam = (m * k) * (m * k);
            basis.elements.push_back(TrigPoly::sine(static_cast<std::size_t>(m), k, basis.center));
            basis.lambdas.push_back(lam);
            basis.elements.push_back(TrigPoly::cosine(static_cast<std::size_t>(m), k, basis.center));
            basis.lambdas.push_back(lam);
        }
        return basis;
    }

    std::size_t size() const noexcept { return elements.size(); }
    static constexpr int sin_index(int m) noexcept { return 2 * m - 1; }
    static constexpr int cos_index(int m) noexcept { return 2 * m; }
};

inline std::vector<ControlPair> synthesize_basis_controls(const HelmholtzBasis& basis, int p, const Grid1D& grid)
{
    std::vector<ControlPair> controls(basis.size());
    parallel_for(basis.size(), [&](std::size_t i) {
        controls[i] = synthesize_control(extend(basis.elements[i], p, grid), grid, static_cast<int>(i));
        controls[i].lambda = basis.lambdas[i];
    });
    return controls;
}

/// q(x) = mean + sum_n cos_n cos(n pi xh) + sin_n sin(n pi xh),  xh = (x - c) / L.
struct FourierSeries
{
    double mean = 0.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;
    double center = 0.0;
    double half_width = 1.0;

    double operator()(double x) const
    {
        const double xh = (x - center) / half_width;
        double s = mean;
        for (std::size_t i = 0; i < cos_coeffs.size(); ++i)
        {
            const double w = static_cast<double>(i + 1) * std::numbers::pi * xh;
            s += cos_coeffs[i] * std::cos(w) + sin_coeffs[i] * std::sin(w);
        }
        return s;
    }

    std::vector<double> sample(const Grid1D& grid) const
    {
        std::vector<double> v(grid.nx());
        for (std::size_t j = 0; j < v.size(); ++j)
            v[j] = (*this)(grid.x(j));
        return v;
    }
};

struct ReconstructionResult
{
    FourierSeries fourier;
    std::vector<double> qdot_values;
    std::optional<double> rel_l2_error;
};

enum class OracleMode { synthetic_linearized, nonlinear_difference, file };

inline std::string to_string(OracleMode m)
{
    switch (m)
    {
    case OracleMode::synthetic_linearized: return "synthetic-linearized";
    case OracleMode::nonlinear_difference: return "nonlinear-difference";
    case OracleMode::file: return "file";
    }
    return "file";
}

inline OracleMode oracle_mode_from_string(const std::string& s)
{
    if (s == "synthetic-linearized" || s == "linearized")
        return OracleMode::synthetic_linearized;
    if (s == "nonlinear-difference" || s == "nonlinear")
        return OracleMode::nonlinear_difference;
    if (s == "file")
        return OracleMode::file;
    throw ParameterError("unknown oracle mode '" + s + "'");
}

/// Source of linearized boundary measurements  f -> (Lambda-dot f)  for the probes
/// of the basis controls:
///  - synthetic-linearized: the linearized ND map of (q0, qdot);
///  - nonlinear-difference: Lambda_q f - Lambda_q0 f from two nonlinear solves;
///  - file: traces read from an archive, looked up by control id.
/// Clean responses are memoized per control id (copies share the cache); noise
/// is redrawn per repetition on top of them, so a response depends only on
/// (mode, inputs, noise seed, repetition, control id).
class MeasurementOracle
{
public:
    static MeasurementOracle synthetic_linearized(const Grid1D& grid, Potential q0, Potential qdot,
                                                  NoiseSpec noise = {})
    {
        q0.check(grid);
        qdot.check(grid);
        return MeasurementOracle(OracleMode::synthetic_linearized, grid, std::move(q0), std::move(qdot), {}, noise);
    }

    /// Lambda_q - Lambda_q0 stands in for the linearized map.
    static MeasurementOracle nonlinear_difference(const Grid1D& grid, Potential q0, Potential q, NoiseSpec noise = {})
    {
        q0.check(grid);
        q.check(grid);
        return MeasurementOracle(OracleMode::nonlinear_difference, grid, std::move(q0), std::move(q), {}, noise);
    }

    static MeasurementOracle from_archive(const Grid1D& grid, TraceArchive archive, NoiseSpec noise = {})
    {
        for (const auto& [key, e] : archive.entries)
        {
            if (e.trace.size() != grid.nt())
                throw DimensionError("archive trace '" + key + "' has " + std::to_string(e.trace.size()) +
                                     " samples, grid has nt = " + std::to_string(grid.nt()));
        }
        MeasurementOracle o(OracleMode::file, grid, Potential::zero(grid), Potential::zero(grid), std::move(archive),
                            noise);
        return o;
    }

    OracleMode mode() const noexcept { return mode_; }
    const Grid1D& grid() const noexcept { return grid_; }
    const NoiseSpec& noise() const noexcept { return noise_; }

    /// Same data source and cache, different noise.
    MeasurementOracle with_noise(NoiseSpec noise) const
    {
        MeasurementOracle o = *this;
        o.noise_ = noise;
        return o;
    }

    /// Response to `probe` (boundary data on [0,2T]) identified as (control_id, kind).
    BoundarySignal respond(int control_id, ProbeKind kind, const BoundarySignal& probe, std::uint64_t repetition) const
    {
        const auto key = probe_key(control_id, kind);
        const std::uint64_t stream = 2 * static_cast<std::uint64_t>(control_id) + (kind == ProbeKind::direct ? 0 : 1);
        switch (mode_)
        {
        case OracleMode::synthetic_linearized: {
            auto clean = cache_->get_or_insert(key, [&] { return linearized_nd_map(q0_, q_, probe, grid_); });
            return noise_.active() ? add_noise(clean, noise_, repetition, stream) : clean;
        }
        case OracleMode::nonlinear_difference: {
            auto perturbed = cache_->get_or_insert(key + ":q", [&] { return nd_map(q_, probe, grid_); });
            auto background = cache_->get_or_insert(key + ":q0", [&] { return nd_map(q0_, probe, grid_); });
            if (noise_.active() && noise_.target == NoiseTarget::each_map_trace)
                return add_noise(perturbed, noise_, repetition, 2 * stream) -
                       add_noise(background, noise_, repetition, 2 * stream + 1);
            auto diff = perturbed - background;
            return noise_.active() ? add_noise(diff, noise_, repetition, stream) : diff;
        }
        case OracleMode::file: {
            const auto* e = archive_->find(key);
            if (e == nullptr)
                throw MissingControlError("no measurement for control '" + key + "' in the trace archive");
            return noise_.active() ? add_noise(e->trace, noise_, repetition, stream) : e->trace;
        }
        }
        throw InternalError("unknown oracle mode");
    }

    /// Noise-free response; what an archive stores for this control.
    BoundarySignal clean_response(int control_id, ProbeKind kind, const BoundarySignal& probe) const
    {
        return with_noise({}).respond(control_id, kind, probe, 0);
    }

    /// Computes and caches the clean responses of every control, in parallel.
    void prefetch(const std::vector<ControlPair>& controls) const
    {
        if (mode_ == OracleMode::file)
            return;
        parallel_for(2 * controls.size(), [&](std::size_t i) {
            const auto& c = controls[i / 2];
            if (i % 2 == 0)
                clean_response(c.id, ProbeKind::direct, extend_zero(c.f));
            else
                clean_response(c.id, ProbeKind::reversed, reversed_probe(c.f));
        });
    }

private:
    MeasurementOracle(OracleMode mode, const Grid1D& grid, Potential q0, Potential q, TraceArchive archive,
                      NoiseSpec noise)
        : mode_(mode), grid_(grid), q0_(std::move(q0)), q_(std::move(q)),
          archive_(std::make_shared<const TraceArchive>(std::move(archive))), noise_(noise),
          cache_(std::make_shared<TraceCache>())
    {
        if (noise.level < 0.0)
            throw ParameterError("noise level must be >= 0");
    }

    OracleMode mode_;
    Grid1D grid_;
    Potential q0_;
    Potential q_;
    std::shared_ptr<const TraceArchive> archive_;
    NoiseSpec noise_;
    std::shared_ptr<TraceCache> cache_;
};

/// B(f,h) = -(f_tt + lambda f, Kdot h) - sum_{x in {a,b}} (Lambda-dot f)(T,x) h(T,x),
/// with Kdot assembled from the oracle's responses. For targets phi_f, phi_h
/// sharing the eigenvalue lambda this approximates  int qdot phi_f phi_h dx.
inline double bilinear_form(const MeasurementOracle& oracle, const ControlPair& f, const ControlPair& h,
                            std::uint64_t repetition = 0)
{
    if (!(std::abs(f.lambda - h.lambda) <= 1e-12 * std::max(1.0, std::abs(f.lambda))))
        throw ParameterError("bilinear_form: controls have different Helmholtz eigenvalues (" +
                             std::to_string(f.lambda) + " vs " + std::to_string(h.lambda) + ")");
    if (f.id < 0 || h.id < 0)
        throw ParameterError("bilinear_form: controls need ids to address the measurement oracle");
    const auto direct_h = oracle.respond(h.id, ProbeKind::direct, extend_zero(h.f), repetition);
    const auto reversed_h = oracle.respond(h.id, ProbeKind::reversed, reversed_probe(h.f), repetition);
    const auto Kh = connecting_from_responses(direct_h, reversed_h);
    const auto direct_f = f.id == h.id ? direct_h : oracle.respond(f.id, ProbeKind::direct, extend_zero(f.f), repetition);

    BoundarySignal weight = f.f_tt;
    for (std::size_t k = 0; k < weight.size(); ++k)
    {
        weight.left[k] += f.lambda * f.f.left[k];
        weight.right[k] += f.lambda * f.f.right[k];
    }
    const std::size_t kT = h.f.size() - 1;
    const double at_T =
        direct_f.left[kT] * h.f.left[kT] + direct_f.right[kT] * h.f.right[kT];
    return -inner_product_time_boundary(weight, Kh) - at_T;
}

/// Fourier coefficients of qdot from same-eigenvalue pairs of basis controls:
///   1*1 = 1,  cos_m^2 = (1 + cos(m pi xh)) / 2,  sin_m^2 = (1 - cos(m pi xh)) / 2,
///   sin_m cos_m = sin(m pi xh) / 2.
inline ReconstructionResult reconstruct(const MeasurementOracle& oracle, const HelmholtzBasis& basis,
                                        const std::vector<ControlPair>& controls, std::uint64_t repetition = 0)
{
    if (controls.size() != basis.size())
        throw DimensionError("reconstruct: need one control per basis element");
    oracle.prefetch(controls);
    const double L = basis.half_width;
    ReconstructionResult r;
    r.fourier.center = basis.center;
    r.fourier.half_width = L;
    r.fourier.mean = bilinear_form(oracle, controls[0], controls[0], repetition) / (2.0 * L);
    r.fourier.cos_coeffs.resize(static_cast<std::size_t>(basis.N));
    r.fourier.sin_coeffs.resize(static_cast<std::size_t>(basis.N));
    for (int m = 1; m <= basis.N; ++m)
    {
        const auto& s = controls[static_cast<std::size_t>(HelmholtzBasis::sin_index(m))];
        const auto& c = controls[static_cast<std::size_t>(HelmholtzBasis::cos_index(m))];
        const double Bcc = bilinear_form(oracle, c, c, repetition);
        const double Bss = bilinear_form(oracle, s, s, repetition);
        const double Bsc = bilinear_form(oracle, s, c, repetition);
        r.fourier.cos_coeffs[static_cast<std::size_t>(m - 1)] = (Bcc - Bss) / L;
        r.fourier.sin_coeffs[static_cast<std::size_t>(m - 1)] = 2.0 * Bsc / L;
    }
    r.qdot_values = r.fourier.sample(oracle.grid());
    return r;
}

inline ReconstructionResult reconstruct(const MeasurementOracle& oracle, const HelmholtzBasis& basis, int p = 2,
                                        std::uint64_t repetition = 0)
{
    return reconstruct(oracle, basis, synthesize_basis_controls(basis, p, oracle.grid()), repetition);
}

/// L2 projection (trapezoid quadrature) of sampled qdot onto {1, cos(n pi xh), sin(n pi xh) : n <= N}.
inline FourierSeries fourier_project(const Potential& qdot, int N, const Grid1D& grid)
{
    qdot.check(grid);
    FourierSeries s;
    s.center = grid.center();
    s.half_width = grid.half_width();
    const double L = s.half_width;
    std::vector<double> ones(grid.nx(), 1.0), c(grid.nx()), sn(grid.nx());
    s.mean = inner_product_space(qdot.values(), ones, grid) / (2.0 * L);
    for (int n = 1; n <= N; ++n)
    {
        for (std::size_t j = 0; j < grid.nx(); ++j)
        {
            const double w = n * std::numbers::pi * (grid.x(j) - s.center) / L;
            c[j] = std::cos(w);
            sn[j] = std::sin(w);
        }
        s.cos_coeffs.push_back(inner_product_space(qdot.values(), c, grid) / L);
        s.sin_coeffs.push_back(inner_product_space(qdot.values(), sn, grid) / L);
    }
    return s;
}

/// The part of qdot the basis can see, sampled on the grid.
inline Potential project_ground_truth(const Potential& qdot, const HelmholtzBasis& basis, const Grid1D& grid)
{
    return Potential(fourier_project(qdot, basis.N, grid).sample(grid));
}

} // namespace bcm
