#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcm/experiments.hpp"
#include "bcm/trace_archive.hpp"

namespace bcm {

/// A potential described in the normalized coordinate xh = (x - c) / L in [-1,1].
///   kind = "zero" | "smooth" | "heaviside" | "fourier" | "perturbed"
/// "fourier" uses mean + sum cos[n] cos((n+1) pi xh) + sin[n] sin((n+1) pi xh);
/// "perturbed" is epsilon * smooth + epsilon^2 * 20 cos(20 pi xh).
struct PotentialSpec
{
    std::string kind = "zero";
    double scale = 1.0;
    double mean = 0.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;
    double epsilon = 0.1;

    double operator()(double xh) const
    {
        double v = 0.0;
        if (kind == "zero")
            v = 0.0;
        else if (kind == "smooth")
            v = truths::smooth(xh);
        else if (kind == "heaviside")
            v = truths::heaviside(xh);
        else if (kind == "perturbed")
            v = epsilon * truths::smooth(xh) + epsilon * epsilon * truths::oscillatory(xh);
        else if (kind == "fourier")
        {
            FourierSeries s{mean, cos_coeffs, sin_coeffs, 0.0, 1.0};
            s.cos_coeffs.resize(std::max(cos_coeffs.size(), sin_coeffs.size()), 0.0);
            s.sin_coeffs.resize(s.cos_coeffs.size(), 0.0);
            v = s(xh);
        }
        else
            throw ParameterError("unknown potential kind '" + kind + "'");
        return scale * v;
    }

    Potential sample(const Grid1D& grid) const
    {
        return Potential::sample(grid, [&](double x) { return (*this)((x - grid.center()) / grid.half_width()); });
    }

    friend bool operator==(const PotentialSpec&, const PotentialSpec&) = default;
};

/// Everything a CLI run needs; round-trips through JSON.
struct RunConfig
{
    std::string grid = "desk"; // "desk" | "paper" | "custom"
    double a = -1.0, b = 1.0, T = 5.0;
    std::size_t nx = 301, nt = 6001;
    int basis_n = 10;
    int bump_p = 2;
    std::vector<double> noise_levels{0.0};
    NoiseTarget noise_target = NoiseTarget::difference_trace;
    int repetitions = 1;
    std::vector<int> averaging_counts{1, 7, 14, 21};
    int experiment = 0; // 0: reconstruction of `perturbation` through `oracle`
    double epsilon = 0.1;
    OracleMode oracle = OracleMode::synthetic_linearized;
    PotentialSpec q0;
    PotentialSpec perturbation{"smooth", 1.0, 0.0, {}, {}, 0.1};
    std::string archive_path;
    std::string output_path;
    std::uint64_t seed = 0;

    Grid1D make_grid() const
    {
        if (grid == "desk")
            return Grid1D::desk();
        if (grid == "paper")
            return Grid1D::paper();
        if (grid == "custom")
            return {a, b, nx, T, nt};
        throw ParameterError("unknown grid preset '" + grid + "'");
    }

    ExperimentSettings experiment_settings() const
    {
        ExperimentSettings s;
        s.experiment = experiment;
        s.grid = make_grid();
        s.basis_n = basis_n;
        s.bump_p = bump_p;
        s.noise_levels = noise_levels;
        s.noise_target = noise_target;
        s.repetitions = repetitions;
        s.averaging_counts = averaging_counts;
        s.seed = seed;
        s.epsilon = epsilon;
        return s;
    }

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline nlohmann::json to_json(const PotentialSpec& p)
{
    return {{"kind", p.kind},       {"scale", p.scale}, {"mean", p.mean}, {"cos", p.cos_coeffs},
            {"sin", p.sin_coeffs}, {"epsilon", p.epsilon}};
}

inline PotentialSpec potential_from_json(const nlohmann::json& j)
{
    PotentialSpec p;
    if (j.is_string())
    {
        p.kind = j.get<std::string>();
        return p;
    }
    p.kind = j.value("kind", p.kind);
    p.scale = j.value("scale", p.scale);
    p.mean = j.value("mean", p.mean);
    p.cos_coeffs = j.value("cos", p.cos_coeffs);
    p.sin_coeffs = j.value("sin", p.sin_coeffs);
    p.epsilon = j.value("epsilon", p.epsilon);
    return p;
}

inline nlohmann::json to_json(const RunConfig& c)
{
    return {{"grid", c.grid},
            {"a", c.a},
            {"b", c.b},
            {"T", c.T},
            {"nx", c.nx},
            {"nt", c.nt},
            {"basis_n", c.basis_n},
            {"p", c.bump_p},
            {"noise_levels", c.noise_levels},
            {"noise_target", to_string(c.noise_target)},
            {"repetitions", c.repetitions},
            {"averaging_counts", c.averaging_counts},
            {"experiment", c.experiment},
            {"epsilon", c.epsilon},
            {"oracle", to_string(c.oracle)},
            {"q0", to_json(c.q0)},
            {"perturbation", to_json(c.perturbation)},
            {"archive", c.archive_path},
            {"output", c.output_path},
            {"seed", c.seed}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline RunConfig run_config_from_json(const nlohmann::json& j)
{
    static const std::vector<std::string> known{"grid",     "a",          "b",       "T",           "nx",
                                                "nt",       "basis_n",    "p",       "noise_target", "noise_levels",
                                                "repetitions", "averaging_counts", "experiment", "epsilon", "oracle",
                                                "q0",       "perturbation", "archive", "output",    "seed"};
    if (!j.is_object())
        throw ParseError("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ParseError("unknown config key '" + key + "'");
    RunConfig c;
    try
    {
        c.grid = j.value("grid", c.grid);
        c.a = j.value("a", c.a);
        c.b = j.value("b", c.b);
        c.T = j.value("T", c.T);
        c.nx = j.value("nx", c.nx);
        c.nt = j.value("nt", c.nt);
        c.basis_n = j.value("basis_n", c.basis_n);
        c.bump_p = j.value("p", c.bump_p);
        c.noise_levels = j.value("noise_levels", c.noise_levels);
        c.noise_target = noise_target_from_string(j.value("noise_target", to_string(c.noise_target)));
        c.repetitions = j.value("repetitions", c.repetitions);
        c.averaging_counts = j.value("averaging_counts", c.averaging_counts);
        c.experiment = j.value("experiment", c.experiment);
        c.epsilon = j.value("epsilon", c.epsilon);
        c.oracle = oracle_mode_from_string(j.value("oracle", to_string(c.oracle)));
        if (j.contains("q0"))
            c.q0 = potential_from_json(j.at("q0"));
        if (j.contains("perturbation"))
            c.perturbation = potential_from_json(j.at("perturbation"));
        c.archive_path = j.value("archive", c.archive_path);
        c.output_path = j.value("output", c.output_path);
        c.seed = j.value("seed", c.seed);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ParseError(std::string("config: ") + e.what());
    }
    return c;
}

inline RunConfig read_run_config(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("cannot open config '" + path.string() + "'");
    const std::string text{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
    try
    {
        return run_config_from_json(nlohmann::json::parse(text));
    }
    catch (const nlohmann::json::parse_error& e)
    {
        const auto end = std::min(text.size(), e.byte > 0 ? e.byte - 1 : 0);
        const long line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n');
        throw ParseError(path.string() + ": " + e.what(), line);
    }
}

inline void write_run_config(const RunConfig& c, const std::filesystem::path& path)
{
    std::ofstream os(path);
    if (!os)
        throw IoError("cannot write config '" + path.string() + "'");
    os << to_json(c).dump(2) << '\n';
}

inline nlohmann::json to_json(const FourierSeries& s)
{
    return {{"mean", s.mean}, {"cos", s.cos_coeffs}, {"sin", s.sin_coeffs}};
}

inline nlohmann::json to_json(const ExperimentSettings& s)
{
    return {{"experiment", s.experiment},
            {"grid", {{"a", s.grid.a()}, {"b", s.grid.b()}, {"T", s.grid.T()}, {"nx", s.grid.nx()}, {"nt", s.grid.nt()}}},
            {"basis_n", s.basis_n},
            {"p", s.bump_p},
            {"noise_levels", s.noise_levels},
            {"noise_target", to_string(s.noise_target)},
            {"repetitions", s.repetitions},
            {"averaging_counts", s.averaging_counts},
            {"seed", s.seed},
            {"epsilon", s.epsilon}};
}

/// Summary block: settings echo and errors per noise level and repetition count.
inline nlohmann::json report_summary(const ExperimentReport& r)
{
    nlohmann::json j;
    j["settings"] = to_json(r.settings);
    j["truth"] = r.truth_label;
    j["runs"] = nlohmann::json::array();
    for (std::size_t i = 0; i < r.runs.size(); ++i)
    {
        const auto& run = r.runs[i];
        nlohmann::json curve = nlohmann::json::array();
        for (const auto& [M, e] : run.averaging_curve)
            curve.push_back({{"repetitions", M}, {"rel_l2_error", e}});
        j["runs"].push_back({{"profile", "run" + std::to_string(i) + ".csv"},
                             {"noise", to_json(run.noise)},
                             {"rel_l2_errors", run.rel_l2_errors},
                             {"averaged_rel_l2_error", run.averaged_error},
                             {"averaging_curve", curve},
                             {"averaged_fourier", to_json(run.averaged.fourier)}});
    }
    return j;
}

/// <dir>/summary.json and, per noise level, <dir>/run<i>.csv with columns
/// x,truth,reconstruction,error[,mean_<M>...]: one row per spatial node.
inline void write_report(const ExperimentReport& r, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
    const auto& grid = r.settings.grid;
    for (std::size_t i = 0; i < r.runs.size(); ++i)
    {
        const auto& run = r.runs[i];
        const auto path = dir / ("run" + std::to_string(i) + ".csv");
        std::ofstream os(path);
        if (!os)
            throw IoError("cannot write '" + path.string() + "'");
        os << "x,truth,reconstruction,error";
        for (const auto& [M, _] : run.averaging_curve)
            os << ",mean_" << M;
        os << '\n';
        for (std::size_t j = 0; j < grid.nx(); ++j)
        {
            const double rec = run.averaged.qdot_values[j];
            detail::write_number(os, grid.x(j));
            os << ',';
            detail::write_number(os, r.truth[j]);
            os << ',';
            detail::write_number(os, rec);
            os << ',';
            detail::write_number(os, rec - r.truth[j]);
            for (const auto& profile : run.averaging_profiles)
            {
                os << ',';
                detail::write_number(os, profile[j]);
            }
            os << '\n';
        }
        if (!os)
            throw IoError("write failed for '" + path.string() + "'");
    }
    std::ofstream os(dir / "summary.json");
    if (!os)
        throw IoError("cannot write summary in '" + dir.string() + "'");
    os << report_summary(r).dump(2) << '\n';
    if (!os)
        throw IoError("write failed for summary.json");
}

/// Oracle described by a config; file mode reads `archive_path` and checks its grid.
inline MeasurementOracle make_oracle(const RunConfig& c, const Grid1D& grid)
{
    const Potential q0 = c.q0.sample(grid);
    const Potential dq = c.perturbation.sample(grid);
    switch (c.oracle)
    {
    case OracleMode::synthetic_linearized: return MeasurementOracle::synthetic_linearized(grid, q0, dq);
    case OracleMode::nonlinear_difference: return MeasurementOracle::nonlinear_difference(grid, q0, q0 + dq);
    case OracleMode::file: {
        if (c.archive_path.empty())
            throw ParameterError("file oracle needs an archive path");
        auto archive = read_trace_archive(c.archive_path);
        if (archive.nx != grid.nx() || archive.nt != grid.nt() || archive.a != grid.a() || archive.b != grid.b() ||
            archive.T != grid.T())
            throw DimensionError("archive grid does not match the configured grid");
        return MeasurementOracle::from_archive(grid, std::move(archive));
    }
    }
    throw InternalError("unknown oracle mode");
}

/// Clean responses of the basis controls to both probes, ready for write_trace_archive.
inline TraceArchive record_archive(const RunConfig& c)
{
    if (c.oracle == OracleMode::file)
        throw ParameterError("cannot record an archive from a file oracle");
    const auto grid = c.make_grid();
    const auto oracle = make_oracle(c, grid);
    const auto basis = HelmholtzBasis::make(c.basis_n, grid);
    const auto controls = synthesize_basis_controls(basis, c.bump_p, grid);
    oracle.prefetch(controls);
    TraceArchive archive;
    archive.mode = to_string(c.oracle);
    archive.basis_n = c.basis_n;
    archive.bump_p = c.bump_p;
    archive.a = grid.a();
    archive.b = grid.b();
    archive.T = grid.T();
    archive.nx = grid.nx();
    archive.nt = grid.nt();
    for (const auto& ctl : controls)
    {
        for (ProbeKind kind : {ProbeKind::direct, ProbeKind::reversed})
        {
            const auto probe = kind == ProbeKind::direct ? extend_zero(ctl.f) : reversed_probe(ctl.f);
            archive.entries.emplace(probe_key(ctl.id, kind),
                                    ArchiveEntry{ctl.id, kind, ctl.lambda, {}, oracle.clean_response(ctl.id, kind, probe)});
        }
    }
    return archive;
}

/// Runs a config: experiments 1-3 use their presets, experiment 0 reconstructs
/// `perturbation` (plus q0 when the data are nonlinear differences).
inline ExperimentReport run_config(const RunConfig& c)
{
    auto s = c.experiment_settings();
    if (c.experiment != 0)
        return run_experiment(s);
    const auto& grid = s.grid;
    const auto oracle = make_oracle(c, grid);
    bool nonlinear = c.oracle == OracleMode::nonlinear_difference;
    if (c.oracle == OracleMode::file)
        nonlinear = read_trace_archive(c.archive_path).mode == to_string(OracleMode::nonlinear_difference);
    const Potential dq = c.perturbation.sample(grid);
    const Potential q0 = c.q0.sample(grid);
    std::vector<double> offset(grid.nx(), 0.0);
    std::vector<double> truth(dq.values().begin(), dq.values().end());
    if (nonlinear)
    {
        offset.assign(q0.values().begin(), q0.values().end());
        for (std::size_t j = 0; j < truth.size(); ++j)
            truth[j] += offset[j];
    }
    return detail::run_levels(s, oracle, std::move(truth), nonlinear ? "q0 + perturbation" : "perturbation", offset);
}

/// Default seed from BCM_SEED, else 0.
inline std::uint64_t default_seed()
{
    if (const char* s = std::getenv("BCM_SEED"))
    {
        char* end = nullptr;
        const auto v = std::strtoull(s, &end, 10);
        if (end != s && *end == '\0')
            return v;
        throw ParameterError("BCM_SEED must be a non-negative integer");
    }
    return 0;
}

} // namespace bcm
