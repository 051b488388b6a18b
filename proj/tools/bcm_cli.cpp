// bcm: boundary-control reconstruction of wave-equation potentials.
//
//   bcm forward     --out DIR               record basis-control responses as a trace archive
//   bcm control     --index I [--out DIR]   synthesize one control, report its residual
//   bcm reconstruct --config FILE           full pipeline (file mode with --archive DIR)
//   bcm experiment  1|2|3                   presets of the three reproduction experiments
//   bcm verify [--strict]                   identity and symmetry gaps; control residuals are
//                                           reported, and fail the run only with --strict
//
// Exit codes: 0 success, 2 usage or input errors, 3 numerical guard failures.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bcm/io.hpp"

namespace {

using nlohmann::json;

struct Overrides
{
    std::string config;
    std::optional<std::string> grid;
    std::optional<int> basis_n;
    std::optional<int> p;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> oracle;
    std::optional<std::string> q0;
    std::optional<std::string> perturbation;
    std::optional<double> epsilon;
    std::vector<double> noise;
    std::optional<std::string> noise_target;
    std::optional<int> repetitions;
    std::vector<int> averaging;
    std::optional<std::string> archive;
    std::optional<std::string> out;
};

void add_common(CLI::App* sub, Overrides& o)
{
    sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--grid", o.grid, "grid preset: desk | paper | custom (custom takes a,b,T,nx,nt from the config)");
    sub->add_option("--N", o.basis_n, "number of Helmholtz frequencies in the basis");
    sub->add_option("--p", o.p, "bump smoothness exponent (>= 2)");
    sub->add_option("--seed", o.seed, "noise seed (default: $BCM_SEED or 0)");
}

void add_potentials(CLI::App* sub, Overrides& o)
{
    sub->add_option("--oracle", o.oracle, "synthetic-linearized | nonlinear-difference | file");
    sub->add_option("--q0", o.q0, "background potential kind: zero | smooth | heaviside | perturbed");
    sub->add_option("--perturbation", o.perturbation, "perturbation kind: zero | smooth | heaviside | perturbed");
    sub->add_option("--epsilon", o.epsilon, "epsilon of the 'perturbed' potential and of experiment 3");
}

void add_noise(CLI::App* sub, Overrides& o)
{
    sub->add_option("--noise", o.noise, "noise levels, e.g. 0,0.01,0.05")->delimiter(',');
    sub->add_option("--noise-target", o.noise_target, "difference-trace | each-map-trace");
    sub->add_option("--repetitions", o.repetitions, "noise repetitions per level");
    sub->add_option("--averaging", o.averaging, "repetition counts for the averaging curve, e.g. 1,7,14,21")
        ->delimiter(',');
}

bcm::RunConfig resolve(const Overrides& o)
{
    bcm::RunConfig c;
    if (!o.config.empty())
        c = bcm::read_run_config(o.config);
    else
        c.seed = bcm::default_seed();
    if (o.grid)
        c.grid = *o.grid;
    if (o.basis_n)
        c.basis_n = *o.basis_n;
    if (o.p)
        c.bump_p = *o.p;
    if (o.seed)
        c.seed = *o.seed;
    if (o.oracle)
        c.oracle = bcm::oracle_mode_from_string(*o.oracle);
    if (o.q0)
        c.q0.kind = *o.q0;
    if (o.perturbation)
        c.perturbation.kind = *o.perturbation;
    if (o.epsilon)
    {
        c.epsilon = *o.epsilon;
        c.q0.epsilon = *o.epsilon;
        c.perturbation.epsilon = *o.epsilon;
    }
    if (!o.noise.empty())
        c.noise_levels = o.noise;
    if (o.noise_target)
        c.noise_target = bcm::noise_target_from_string(*o.noise_target);
    if (o.repetitions)
        c.repetitions = *o.repetitions;
    if (!o.averaging.empty())
        c.averaging_counts = o.averaging;
    if (o.archive)
    {
        c.archive_path = *o.archive;
        c.oracle = bcm::OracleMode::file;
    }
    if (o.out)
        c.output_path = *o.out;
    if (c.basis_n < 0)
        throw bcm::ParameterError("--N must be >= 0");
    return c;
}

struct Check
{
    std::string name;
    double value;
    double threshold;
    bool guard = true; // failing decides the exit code
};

int report_checks(const std::vector<Check>& checks)
{
    json out;
    out["checks"] = json::array();
    bool ok = true;
    for (const auto& c : checks)
    {
        const bool pass = c.value <= c.threshold;
        ok = ok && (pass || !c.guard);
        out["checks"].push_back(
            {{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", pass}, {"guard", c.guard}});
    }
    out["pass"] = ok;
    std::cout << out.dump(2) << '\n';
    return ok ? 0 : 3;
}

int cmd_forward(const Overrides& o)
{
    const auto c = resolve(o);
    if (c.output_path.empty())
        throw bcm::ParameterError("forward needs --out DIR");
    const auto archive = bcm::record_archive(c);
    bcm::write_trace_archive(archive, c.output_path);
    std::cout << json{{"archive", c.output_path}, {"mode", archive.mode}, {"controls", archive.entries.size()}}.dump()
              << '\n';
    return 0;
}

int cmd_control(const Overrides& o, int index, std::optional<double> max_residual)
{
    const auto c = resolve(o);
    const auto grid = c.make_grid();
    const auto basis = bcm::HelmholtzBasis::make((index + 1) / 2, grid);
    if (index < 0 || static_cast<std::size_t>(index) >= basis.size())
        throw bcm::ParameterError("--index must be >= 0");
    auto pair = bcm::synthesize_control(bcm::extend(basis.elements[static_cast<std::size_t>(index)], c.bump_p, grid),
                                        grid, index);
    pair.lambda = basis.lambdas[static_cast<std::size_t>(index)];
    const double residual = bcm::control_residual(pair, grid);
    if (!c.output_path.empty())
    {
        std::filesystem::create_directories(c.output_path);
        bcm::write_trace_csv(pair.f, std::filesystem::path(c.output_path) / "f.csv");
        bcm::write_trace_csv(pair.f_tt, std::filesystem::path(c.output_path) / "f_tt.csv");
    }
    std::cout << json{{"basis_index", index}, {"lambda", pair.lambda}, {"residual", residual}}.dump() << '\n';
    if (max_residual)
        return report_checks({{"control residual", residual, *max_residual}});
    return 0;
}

int run_and_report(const bcm::RunConfig& c)
{
    const auto report = bcm::run_config(c);
    if (!c.output_path.empty())
        bcm::write_report(report, c.output_path);
    std::cout << bcm::report_summary(report).dump(2) << '\n';
    return 0;
}

int cmd_reconstruct(const Overrides& o)
{
    auto c = resolve(o);
    c.experiment = 0;
    return run_and_report(c);
}

int cmd_experiment(const Overrides& o, int which)
{
    auto c = resolve(o);
    c.experiment = which;
    if (o.noise.empty() && o.config.empty())
        c.noise_levels = {0.0, 0.01, 0.05};
    return run_and_report(c);
}

int cmd_verify(const Overrides& o, int pairs, int max_m, double residual_tol, double potential_scale, bool strict)
{
    const auto c = resolve(o);
    const auto grid = c.make_grid();
    const bcm::Potential q0 = c.q0.sample(grid);
    const bcm::Potential dq = c.perturbation.sample(grid).scaled(potential_scale);
    const bcm::Potential q = q0 + dq;
    std::vector<Check> checks;

    double blago = 0.0;
    double sym = 0.0;
    double sym_lin = 0.0;
    const auto nd = bcm::nd_map_of(q, grid);
    const auto lin = bcm::linearized_map_of(q0, dq, grid);
    for (int i = 0; i < pairs; ++i)
    {
        const auto f = bcm::random_boundary_signal(grid, c.seed + 2 * static_cast<std::uint64_t>(i));
        const auto h = bcm::random_boundary_signal(grid, c.seed + 2 * static_cast<std::uint64_t>(i) + 1);
        const double scale = bcm::norm_time_boundary(f) * bcm::norm_time_boundary(h);
        blago = std::max(blago, bcm::verify_blagoveshchenskii(q, f, h, grid).relative_gap);
        sym = std::max(sym, bcm::symmetry_gap(nd, f, h) / scale);
        sym_lin = std::max(sym_lin, bcm::symmetry_gap(lin, f, h) / scale);
    }
    checks.push_back({"blagoveshchenskii relative gap", blago, 1e-3});
    checks.push_back({"K symmetry (nonlinear map)", sym, 1e-8});
    checks.push_back({"K symmetry (linearized map)", sym_lin, 1e-8});

    const auto basis = bcm::HelmholtzBasis::make(std::max(max_m, 1), grid);
    const auto controls = bcm::synthesize_basis_controls(basis, c.bump_p, grid);
    const auto& f1 = controls[static_cast<std::size_t>(bcm::HelmholtzBasis::cos_index(1))];
    const auto& h1 = controls[static_cast<std::size_t>(bcm::HelmholtzBasis::sin_index(1))];
    checks.push_back({"corollary relative gap", bcm::verify_corollary(q, f1.f, f1.f_tt, h1.f, grid).relative_gap, 1e-3});

    std::vector<double> residuals(controls.size());
    bcm::parallel_for(controls.size(), [&](std::size_t i) { residuals[i] = bcm::control_residual(controls[i], grid); });
    for (std::size_t i = 0; i < controls.size(); ++i)
    {
        const int m = static_cast<int>((i + 1) / 2);
        const std::string name = i == 0 ? "control residual constant"
                                        : "control residual " + std::string(i % 2 == 1 ? "sin" : "cos") + " m=" +
                                              std::to_string(m);
        checks.push_back({name, residuals[i], residual_tol, strict});
    }
    return report_checks(checks);
}

int error_exit(const std::string& code, const std::string& message, long line, int status)
{
    json e{{"code", code}, {"message", message}, {"exit", status}};
    if (line > 0)
        e["line"] = line;
    std::cerr << json{{"error", e}}.dump() << '\n';
    return status;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Boundary-control reconstruction of potentials in the 1D wave equation"};
    app.require_subcommand(1);
    Overrides o;

    auto* forward = app.add_subcommand("forward", "solve for the basis controls and write their trace archive");
    add_common(forward, o);
    add_potentials(forward, o);
    forward->add_option("--out", o.out, "archive directory");

    int index = 0;
    std::optional<double> max_residual;
    auto* control = app.add_subcommand("control", "synthesize one basis control and report its residual");
    add_common(control, o);
    control->add_option("--index", index, "basis index: 0 constant, 2m-1 sin_m, 2m cos_m");
    control->add_option("--max-residual", max_residual, "exit 3 when the residual exceeds this");
    control->add_option("--out", o.out, "directory for f.csv and f_tt.csv");

    auto* reconstruct = app.add_subcommand("reconstruct", "reconstruct a perturbation from a configuration");
    add_common(reconstruct, o);
    add_potentials(reconstruct, o);
    add_noise(reconstruct, o);
    reconstruct->add_option("--archive", o.archive, "trace archive (selects the file oracle)");
    reconstruct->add_option("--out", o.out, "report directory");

    int which = 1;
    auto* experiment = app.add_subcommand("experiment", "run experiment 1, 2 or 3");
    add_common(experiment, o);
    add_noise(experiment, o);
    experiment->add_option("which", which, "experiment number")->required()->check(CLI::Range(1, 3));
    experiment->add_option("--epsilon", o.epsilon, "experiment 3 perturbation size");
    experiment->add_option("--out", o.out, "report directory");

    int pairs = 5;
    double potential_scale = 0.1;
    bool strict = false;
    int max_m = 10;
    double residual_tol = 1e-2;
    auto* verify = app.add_subcommand("verify", "check the discrete identities and the control residuals");
    add_common(verify, o);
    add_potentials(verify, o);
    verify->add_option("--pairs", pairs, "random control pairs for the identity checks")->check(CLI::Range(1, 1000));
    verify->add_option("--max-m", max_m, "highest basis frequency in the residual checks")->check(CLI::Range(0, 1000));
    verify->add_option("--residual-tol", residual_tol, "control residual threshold");
    verify->add_option("--potential-scale", potential_scale, "factor on the perturbation used by the identity checks");
    verify->add_flag("--strict", strict, "control residuals above the threshold also fail the run");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return error_exit("usage", e.what(), 0, 2);
    }

    try
    {
        if (*forward)
            return cmd_forward(o);
        if (*control)
            return cmd_control(o, index, max_residual);
        if (*reconstruct)
            return cmd_reconstruct(o);
        if (*experiment)
            return cmd_experiment(o, which);
        if (*verify)
            return cmd_verify(o, pairs, max_m, residual_tol, potential_scale, strict);
    }
    catch (const bcm::ParseError& e)
    {
        return error_exit(e.code(), e.what(), e.line(), 2);
    }
    catch (const bcm::Error& e)
    {
        const std::string code = e.code();
        const bool numerical = code == "stability" || code == "internal";
        return error_exit(code, e.what(), 0, numerical ? 3 : 2);
    }
    catch (const std::filesystem::filesystem_error& e)
    {
        return error_exit("io", e.what(), 0, 2);
    }
    catch (const std::exception& e)
    {
        return error_exit("internal", e.what(), 0, 3);
    }
    return 2;
}
