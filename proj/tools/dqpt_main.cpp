// dqpt: command line front end for the quench experiments.
#include "dqpt/error.hpp"
#include "dqpt/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalFault = 3;
constexpr int kIoError = 4;

struct Overrides {
    std::string config_path;
    std::optional<double> j;
    std::vector<double> j_grid;
    std::optional<double> h;
    std::string h_grid;
    std::optional<double> beta;
    std::vector<double> beta_grid;
    std::optional<double> h0, gamma, g, dt, t_max, T;
    std::optional<unsigned> workers;
    std::optional<std::uint64_t> seed;
    std::string out, initial_state, reference;
};

void add_options(CLI::App& cmd, Overrides& o)
{
    cmd.add_option("--config", o.config_path, "JSON config file; flags override its values");
    cmd.add_option("--j", o.j, "spin quantum number j (N = 2j)");
    cmd.add_option("--j-grid", o.j_grid, "several j values")->delimiter(',');
    cmd.add_option("--h", o.h, "final transverse field");
    cmd.add_option("--h-grid", o.h_grid, "final fields as a:b:steps (steps + 1 points)");
    cmd.add_option("--beta", o.beta, "inverse temperature of the initial Gibbs state");
    cmd.add_option("--beta-grid", o.beta_grid, "several beta values")->delimiter(',');
    cmd.add_option("--h0", o.h0, "initial field");
    cmd.add_option("--gamma", o.gamma, "anisotropy");
    cmd.add_option("--g", o.g, "coupling");
    cmd.add_option("--dt", o.dt, "time step");
    cmd.add_option("--t-max", o.t_max, "series horizon");
    cmd.add_option("--T", o.T, "averaging horizon for sweeps");
    cmd.add_option("--workers", o.workers, "worker threads");
    cmd.add_option("--seed", o.seed, "seed recorded with the run");
    cmd.add_option("--out", o.out, "CSV output path (metadata goes to <out>.meta.json)");
    cmd.add_option("--initial-state", o.initial_state, "symmetry-broken or parity-even");
    cmd.add_option("--reference", o.reference, "angle reference: initial or equilibrium");
}

dqpt::ExperimentConfig build_config(dqpt::Mode mode, const Overrides& o)
{
    dqpt::ExperimentConfig c;
    if (!o.config_path.empty()) {
        std::ifstream f(o.config_path);
        if (!f) {
            throw dqpt::DomainError("config: cannot read " + o.config_path);
        }
        std::stringstream text;
        text << f.rdbuf();
        c = dqpt::apply_config_json(text.str(), c);
    }
    c.mode = mode;
    if (o.j) {
        c.j_grid = {dqpt::SpinQuantumNumber::from_value(*o.j)};
    }
    if (!o.j_grid.empty()) {
        c.j_grid.clear();
        for (double j : o.j_grid) {
            c.j_grid.push_back(dqpt::SpinQuantumNumber::from_value(j));
        }
    }
    if (o.h && !o.h_grid.empty()) {
        throw dqpt::DomainError("config: --h and --h-grid are mutually exclusive");
    }
    if (o.h) {
        c.h_grid = {*o.h};
    }
    if (!o.h_grid.empty()) {
        c.h_grid = dqpt::parse_grid(o.h_grid);
    }
    if (o.beta) {
        c.beta_grid = {*o.beta};
    }
    if (!o.beta_grid.empty()) {
        c.beta_grid = o.beta_grid;
    }
    if (o.h0) c.h0 = *o.h0;
    if (o.gamma) c.gamma = *o.gamma;
    if (o.g) c.g = *o.g;
    if (o.dt) c.dt = *o.dt;
    if (o.t_max) c.t_max = *o.t_max;
    if (o.T) c.T_average = *o.T;
    if (o.workers) c.workers = *o.workers;
    if (o.seed) c.seed = *o.seed;
    if (!o.out.empty()) c.output_path = o.out;
    if (!o.initial_state.empty()) c.initial_state = dqpt::initial_state_from_string(o.initial_state);
    if (!o.reference.empty()) c.reference = dqpt::angle_reference_from_string(o.reference);
    return dqpt::resolve(c);
}

std::string one_line(std::string s)
{
    for (auto& ch : s) {
        if (ch == '\n' || ch == '\r') {
            ch = ' ';
        }
    }
    return s;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quench dynamics of the Lipkin-Meshkov-Glick model: echo, Bures angle, entropy bound"};
    app.set_version_flag("--version", std::string(dqpt::library_version()));
    app.require_subcommand(1);
    // -h is not a help alias: --h is the field.
    app.set_help_flag("--help", "print this help and exit");

    Overrides overrides;
    std::optional<dqpt::Mode> chosen;
    for (dqpt::Mode mode : {dqpt::Mode::echo, dqpt::Mode::bures, dqpt::Mode::entropy_bound, dqpt::Mode::s_curve,
                            dqpt::Mode::sweep}) {
        auto* cmd = app.add_subcommand(dqpt::to_string(mode));
        cmd->set_help_flag("--help", "print this help and exit");
        add_options(*cmd, overrides);
        cmd->callback([&chosen, mode] { chosen = mode; });
    }
    app.get_subcommand("echo")->description("Loschmidt echo and rate function (pure protocol)");
    app.get_subcommand("bures")->description("Bures angle series");
    app.get_subcommand("entropy-bound")->description("entropy-production lower bound series");
    app.get_subcommand("s-curve")->description("s(x) with its bounds on [0, 0.99]");
    app.get_subcommand("sweep")->description("time-averaged entropy bound over a field grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        std::cerr << "error: config: " << one_line(e.what()) << '\n';
        return kConfigError;
    }

    try {
        const auto config = build_config(*chosen, overrides);
        dqpt::run_experiment(config);
        std::cout << config.output_path << '\n';
    } catch (const dqpt::DomainError& e) {
        std::cerr << "error: " << one_line(e.what()) << '\n';
        return kConfigError;
    } catch (const dqpt::NumericalFault& e) {
        std::cerr << "error: numerical: " << one_line(e.what()) << '\n';
        return kNumericalFault;
    } catch (const std::exception& e) {
        std::cerr << "error: io: " << one_line(e.what()) << '\n';
        return kIoError;
    }
    return 0;
}
