#include "dqpt/error.hpp"
#include "dqpt/harness.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

using namespace dqpt;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("dqpt_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig small_echo()
{
    ExperimentConfig c;
    c.mode = Mode::echo;
    c.j_grid = {SpinQuantumNumber(20)};
    c.h_grid = {0.8};
    c.t_max = 1.0;
    c.dt = 0.1;
    return c;
}

} // namespace

TEST(Mode, Names)
{
    for (Mode m : {Mode::echo, Mode::bures, Mode::entropy_bound, Mode::s_curve, Mode::sweep}) {
        EXPECT_EQ(mode_from_string(to_string(m)), m);
    }
    EXPECT_EQ(to_string(Mode::entropy_bound), "entropy-bound");
    EXPECT_THROW((void)mode_from_string("bogus"), DomainError);
}

TEST(ParseGrid, StepsPlusOnePoints)
{
    const auto g = parse_grid("0:1:100");
    ASSERT_EQ(g.size(), 101u);
    EXPECT_DOUBLE_EQ(g.front(), 0.0);
    EXPECT_DOUBLE_EQ(g.back(), 1.0);
    EXPECT_DOUBLE_EQ(g[50], 0.5);
    EXPECT_THROW((void)parse_grid("0:1"), DomainError);
    EXPECT_THROW((void)parse_grid("0:1:0"), DomainError);
    EXPECT_THROW((void)parse_grid("a:b:c"), DomainError);
}

TEST(FormatNumber, RoundTrips)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 200; ++i) {
        const double v = u(rng);
        EXPECT_EQ(std::stod(format_number(v)), v);
    }
    EXPECT_EQ(format_number(0.5), "0.5");
}

TEST(Resolve, Defaults)
{
    ExperimentConfig c;
    c.mode = Mode::echo;
    const auto r = resolve(c);
    ASSERT_EQ(r.j_grid.size(), 1u);
    EXPECT_EQ(r.j_grid[0].twice_j(), 600);
    EXPECT_EQ(r.h_grid, std::vector<double>{0.8});
    EXPECT_DOUBLE_EQ(*r.dt, 0.01);
    EXPECT_EQ(r.output_path, "echo.csv");

    ExperimentConfig s;
    s.mode = Mode::sweep;
    const auto rs = resolve(s);
    EXPECT_EQ(rs.j_grid.size(), 3u);
    EXPECT_EQ(rs.h_grid.size(), 101u);
    EXPECT_DOUBLE_EQ(*rs.dt, 0.05);
    EXPECT_DOUBLE_EQ(rs.T_average, 1000.0);
}

TEST(Resolve, RejectsInvalid)
{
    auto c = small_echo();
    c.beta_grid = {1.0};
    EXPECT_THROW((void)resolve(c), DomainError);
    c = small_echo();
    c.mode = Mode::bures;
    c.reference = AngleReference::equilibrium;
    EXPECT_THROW((void)resolve(c), DomainError);
    c = small_echo();
    c.dt = -0.1;
    EXPECT_THROW((void)resolve(c), DomainError);
    c = small_echo();
    c.t_max = 0.0;
    EXPECT_THROW((void)resolve(c), DomainError);
}

TEST(ConfigJson, RoundTripAndAliases)
{
    const auto c = resolve(small_echo());
    EXPECT_EQ(apply_config_json(config_to_json(c), ExperimentConfig{}), c);

    const auto a = apply_config_json(R"({"mode": "bures", "j": 50, "h": 0.3, "beta": 2, "T": 10})", {});
    EXPECT_EQ(a.mode, Mode::bures);
    EXPECT_EQ(a.j_grid.front().twice_j(), 100);
    EXPECT_EQ(a.h_grid, std::vector<double>{0.3});
    EXPECT_EQ(a.beta_grid, std::vector<double>{2.0});
    EXPECT_DOUBLE_EQ(a.T_average, 10.0);

    EXPECT_EQ(apply_config_json(R"({"h_grid": "0:1:4"})", {}).h_grid.size(), 5u);
    EXPECT_TRUE(apply_config_json(R"({"beta_grid": null})", {}).beta_grid.empty());
    EXPECT_THROW((void)apply_config_json(R"({"beta_grid": []})", {}), DomainError);
    EXPECT_THROW((void)apply_config_json(R"({"colour": 1})", {}), DomainError);
    EXPECT_THROW((void)apply_config_json("{not json", {}), DomainError);
    EXPECT_THROW((void)apply_config_json(R"({"j": 0.3})", {}), DomainError);
}

TEST(ConfigJson, CanonicalSortedKeys)
{
    const auto j = nlohmann::json::parse(config_to_json(resolve(small_echo())));
    std::string prev;
    for (const auto& [key, value] : j.items()) {
        EXPECT_LT(prev, key);
        prev = key;
    }
    EXPECT_TRUE(j.at("beta_grid").is_null());
}

TEST(Fingerprint, IgnoresOutputAndWorkers)
{
    auto a = resolve(small_echo());
    auto b = a;
    b.output_path = "elsewhere.csv";
    b.workers = 7;
    EXPECT_EQ(config_fingerprint(a), config_fingerprint(b));
    EXPECT_EQ(config_fingerprint(a).size(), 16u);
    b.h_grid = {0.81};
    EXPECT_NE(config_fingerprint(a), config_fingerprint(b));
}

TEST(Render, EchoSchema)
{
    const auto out = render_experiment(resolve(small_echo()));
    EXPECT_EQ(out.csv.substr(0, out.csv.find('\n')), "j,h,t,echo,rate,echo_rate,sector_rate_0,sector_rate_1,active_sector");
    EXPECT_EQ(std::count(out.csv.begin(), out.csv.end(), '\n'), 12);
    const auto meta = nlohmann::json::parse(out.metadata);
    EXPECT_TRUE(meta.is_object());
}

TEST(Render, OtherSchemas)
{
    auto c = small_echo();
    c.mode = Mode::bures;
    c.beta_grid = {1.0};
    auto out = render_experiment(resolve(c));
    EXPECT_EQ(out.csv.substr(0, out.csv.find('\n')), "j,beta,h,t,angle,log_complement");
    c.mode = Mode::entropy_bound;
    out = render_experiment(resolve(c));
    EXPECT_EQ(out.csv.substr(0, out.csv.find('\n')), "j,beta,h,t,angle,sigma_lower");
    c.mode = Mode::sweep;
    c.beta_grid.clear();
    c.h_grid = {0.2, 0.8};
    c.T_average = 2.0;
    out = render_experiment(resolve(c));
    EXPECT_EQ(out.csv.substr(0, out.csv.find('\n')), "j,beta,h,quantity,value");
    EXPECT_EQ(std::count(out.csv.begin(), out.csv.end(), '\n'), 3);
}

TEST(Render, DeterministicAcrossWorkers)
{
    ExperimentConfig c;
    c.mode = Mode::sweep;
    c.j_grid = {SpinQuantumNumber(10), SpinQuantumNumber(16)};
    c.h_grid = parse_grid("0:1:4");
    c.T_average = 5.0;
    c.workers = 1;
    const auto a = render_experiment(resolve(c));
    c.workers = 4;
    const auto b = render_experiment(resolve(c));
    EXPECT_EQ(a.csv, b.csv);
}

TEST(RunExperiment, WritesCsvAndMetadata)
{
    const auto dir = scratch_dir("run");
    auto c = small_echo();
    c.output_path = (dir / "echo.csv").string();
    run_experiment(resolve(c));
    ASSERT_TRUE(fs::exists(dir / "echo.csv"));
    const auto meta = nlohmann::json::parse(slurp(dir / "echo.csv.meta.json"));
    EXPECT_EQ(meta.at("tool"), "dqpt");
    EXPECT_EQ(meta.at("config_fingerprint"), config_fingerprint(resolve(c)));
    EXPECT_TRUE(meta.at("results").at(0).contains("critical_times"));
    for (const auto& e : fs::directory_iterator(dir)) {
        EXPECT_EQ(e.path().extension() == ".tmp", false) << e.path();
    }
}

TEST(RunExperiment, UnwritableDestinationLeavesNothing)
{
    // The parent "directory" is a regular file, so nothing can be created under it.
    const auto dir = scratch_dir("unwritable");
    std::ofstream(dir / "blocker") << "x";
    auto c = small_echo();
    c.output_path = (dir / "blocker" / "echo.csv").string();
    EXPECT_ANY_THROW(run_experiment(resolve(c)));
    EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator()), 1);
}

#ifdef DQPT_CLI_PATH
namespace {
int run_cli(const std::string& args)
{
    const int status = std::system((std::string(DQPT_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
} // namespace

TEST(Cli, SuccessAndFlagsOverrideConfig)
{
    const auto dir = scratch_dir("cli");
    {
        std::ofstream cfg(dir / "cfg.json");
        cfg << R"({"j": 10, "h": 0.3, "t_max": 1, "dt": 0.1})";
    }
    const auto out = dir / "e.csv";
    ASSERT_EQ(run_cli("echo --config " + (dir / "cfg.json").string() + " --h 0.9 --out " + out.string()), 0);
    const auto csv = slurp(out);
    EXPECT_NE(csv.find("\n10,0.9,"), std::string::npos);
    const auto meta = nlohmann::json::parse(slurp(out.string() + ".meta.json"));
    EXPECT_EQ(meta.at("config").at("h_grid"), nlohmann::json::array({0.9}));
    EXPECT_EQ(run_cli("s-curve --out " + (dir / "s.csv").string()), 0);
    EXPECT_EQ(run_cli("--help"), 0);
}

TEST(Cli, ExitCodes)
{
    const auto dir = scratch_dir("cli_codes");
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("echo --j 0.3 --out " + (dir / "a.csv").string()), 2);
    EXPECT_EQ(run_cli("echo --j 10 --beta 1 --out " + (dir / "a.csv").string()), 2);
    EXPECT_EQ(run_cli("echo --config " + (dir / "missing.json").string()), 2);
    std::ofstream(dir / "blocker") << "x";
    EXPECT_EQ(run_cli("echo --j 10 --t-max 1 --out " + (dir / "blocker" / "a.csv").string()), 4);
    EXPECT_EQ(run_cli("bogus"), 2);
}
#endif
