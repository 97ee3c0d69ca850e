#include "dqpt/harness.hpp"

#include "dqpt/error.hpp"
#include "dqpt/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#ifndef DQPT_VERSION
#define DQPT_VERSION "unknown"
#endif

namespace dqpt {
namespace {

using nlohmann::json;

constexpr double kPureDt = 0.01;
constexpr double kCoarseDt = 0.05;

[[noreturn]] void config_error(const std::string& what)
{
    throw DomainError("config: " + what);
}

double number_field(const json& value, const std::string& key)
{
    if (!value.is_number()) {
        config_error("'" + key + "' must be a number");
    }
    return value.get<double>();
}

std::vector<double> number_list(const json& value, const std::string& key)
{
    if (value.is_number()) {
        return {value.get<double>()};
    }
    if (!value.is_array()) {
        config_error("'" + key + "' must be a number or an array of numbers");
    }
    std::vector<double> out;
    for (const auto& item : value) {
        out.push_back(number_field(item, key));
    }
    return out;
}

std::uint64_t unsigned_field(const json& value, const std::string& key)
{
    if (!value.is_number_integer() || value.get<long long>() < 0) {
        config_error("'" + key + "' must be a non-negative integer");
    }
    return value.get<std::uint64_t>();
}

std::string string_field(const json& value, const std::string& key)
{
    if (!value.is_string()) {
        config_error("'" + key + "' must be a string");
    }
    return value.get<std::string>();
}

json to_json_object(const ExperimentConfig& c)
{
    json j = json::object();
    j["mode"] = to_string(c.mode);
    json js = json::array();
    for (const auto& spin : c.j_grid) {
        js.push_back(spin.value());
    }
    j["j_grid"] = js;
    j["gamma"] = c.gamma;
    j["g"] = c.g;
    j["h0"] = c.h0;
    j["h_grid"] = c.h_grid;
    j["beta_grid"] = c.beta_grid.empty() ? json(nullptr) : json(c.beta_grid);
    j["dt"] = c.dt ? json(*c.dt) : json(nullptr);
    j["t_max"] = c.t_max;
    j["T_average"] = c.T_average;
    j["output_path"] = c.output_path;
    j["workers"] = c.workers;
    j["seed"] = c.seed;
    j["initial_state"] = to_string(c.initial_state);
    j["reference"] = to_string(c.reference);
    return j;
}

std::string fnv1a_hex(std::string_view bytes)
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string optional_number(const std::optional<double>& v)
{
    return v ? format_number(*v) : std::string();
}

// One (j, beta, h) unit of work, in output order.
struct Task {
    SpinQuantumNumber j;
    std::optional<double> beta;
    double h;
};

std::vector<Task> tasks_of(const ExperimentConfig& c)
{
    std::vector<std::optional<double>> betas;
    if (c.beta_grid.empty()) {
        betas.emplace_back();
    } else {
        betas.assign(c.beta_grid.begin(), c.beta_grid.end());
    }
    std::vector<Task> out;
    for (const auto& j : c.j_grid) {
        for (const auto& beta : betas) {
            for (double h : c.h_grid) {
                out.push_back(Task{j, beta, h});
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Task& a, const Task& b) {
        return std::make_tuple(a.j.twice_j(), a.beta.has_value(), a.beta.value_or(0.0), a.h) <
               std::make_tuple(b.j.twice_j(), b.beta.has_value(), b.beta.value_or(0.0), b.h);
    });
    return out;
}

QuenchSpec quench_of(const ExperimentConfig& c, const Task& task, double horizon)
{
    QuenchSpec q{LMGParams{c.h0, c.gamma, c.g, task.j}, LMGParams{task.h, c.gamma, c.g, task.j}, task.beta,
                 TimeGrid::from_horizon(horizon, *c.dt), c.initial_state};
    q.validate();
    return q;
}

// Precise ground manifolds of H(h0), one per j, built before the parallel phase.
std::map<int, precise::PreciseGroundManifold> manifolds_for(const ExperimentConfig& c, const std::vector<Task>& tasks)
{
    std::map<int, precise::PreciseGroundManifold> out;
    for (const auto& task : tasks) {
        if (task.beta || out.contains(task.j.twice_j())) {
            continue;
        }
        out.emplace(task.j.twice_j(), initial_manifold(quench_of(c, task, 0.0)));
    }
    return out;
}

const precise::PreciseGroundManifold* lookup(const std::map<int, precise::PreciseGroundManifold>& cache,
                                             const Task& task)
{
    const auto it = cache.find(task.j.twice_j());
    return it == cache.end() ? nullptr : &it->second;
}

void append_row(std::string& csv, std::initializer_list<std::string> fields)
{
    bool first = true;
    for (const auto& f : fields) {
        if (!first) {
            csv += ',';
        }
        csv += f;
        first = false;
    }
    csv += '\n';
}

json task_json(const Task& task)
{
    json j = json::object();
    j["j"] = task.j.value();
    j["h"] = task.h;
    j["beta"] = task.beta ? json(*task.beta) : json(nullptr);
    return j;
}

ExperimentOutput render_echo(const ExperimentConfig& c)
{
    const auto tasks = tasks_of(c);
    const auto cache = manifolds_for(c, tasks);
    const auto results = parallel_map(tasks.size(), c.workers, [&](std::size_t i) {
        return loschmidt_series(quench_of(c, tasks[i], c.t_max), lookup(cache, tasks[i]));
    });

    ExperimentOutput out;
    const std::size_t n_sectors = results.front().sector_rates.size();
    std::string header = "j,h,t,echo,rate,echo_rate";
    for (std::size_t s = 0; s < n_sectors; ++s) {
        header += ",sector_rate_" + std::to_string(s);
    }
    out.csv = header + ",active_sector\n";
    json series = json::array();
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& r = results[i];
        const std::string j = format_number(tasks[i].j.value());
        const std::string h = format_number(tasks[i].h);
        for (std::size_t n = 0; n < r.times.size(); ++n) {
            std::string line = j + ',' + h + ',' + format_number(r.times[n]) + ',' + format_number(r.echo[n]) + ',' +
                               format_number(r.rate[n]) + ',' + format_number(r.echo_rate[n]);
            for (const auto& sector : r.sector_rates) {
                line += ',' + format_number(sector[n]);
            }
            line += ',' + std::to_string(r.active_sector[n]) + '\n';
            out.csv += line;
        }
        json meta = task_json(tasks[i]);
        meta["critical_times"] = detect_critical_times(r);
        meta["min_echo"] = *std::min_element(r.echo.begin(), r.echo.end());
        meta["min_log_echo"] = 2.0 * *std::min_element(r.log_amplitude.begin(), r.log_amplitude.end());
        meta["echo_underflow_points"] = std::count(r.echo_underflow.begin(), r.echo_underflow.end(), true);
        meta["below_resolution"] = r.below_resolution;
        meta["precision_bits"] = r.precision_bits;
        meta["sector_labels"] = r.sector_labels;
        series.push_back(meta);
    }
    out.metadata = series.dump();
    return out;
}

ExperimentOutput render_angle_modes(const ExperimentConfig& c)
{
    const auto tasks = tasks_of(c);
    const auto cache = manifolds_for(c, tasks);
    const unsigned inner = tasks.size() == 1 ? c.workers : 1;
    const auto results = parallel_map(tasks.size(), tasks.size() == 1 ? 1 : c.workers, [&](std::size_t i) {
        return bures_series(quench_of(c, tasks[i], c.t_max), c.reference, inner, lookup(cache, tasks[i]));
    });

    const bool entropy = c.mode == Mode::entropy_bound;
    ExperimentOutput out;
    out.csv = entropy ? "j,beta,h,t,angle,sigma_lower\n" : "j,beta,h,t,angle,log_complement\n";
    json series = json::array();
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& b = results[i];
        const std::string prefix =
            format_number(tasks[i].j.value()) + ',' + optional_number(tasks[i].beta) + ',' + format_number(tasks[i].h);
        json meta = task_json(tasks[i]);
        meta["protocol"] = to_string(b.protocol);
        meta["reference"] = to_string(b.reference);
        std::vector<double> last;
        if (entropy) {
            const auto e = entropy_bound_series(b);
            last = e.sigma_lower;
            meta["time_average"] = e.time_average;
            meta["horizon_T"] = e.horizon_T;
        } else {
            last = b.log_complement;
        }
        for (std::size_t n = 0; n < b.times.size(); ++n) {
            append_row(out.csv, {prefix, format_number(b.times[n]), format_number(b.angle[n]), format_number(last[n])});
        }
        series.push_back(meta);
    }
    out.metadata = series.dump();
    return out;
}

ExperimentOutput render_s_curve()
{
    ExperimentOutput out;
    out.csv = "x,s,lower,upper\n";
    for (const auto& p : s_curve()) {
        append_row(out.csv, {format_number(p.x), format_number(p.s), format_number(p.lower), format_number(p.upper)});
    }
    out.metadata = "[]";
    return out;
}

ExperimentOutput render_sweep(const ExperimentConfig& c)
{
    const auto result = run_sweep_parallel(c);
    ExperimentOutput out;
    out.csv = "j,beta,h,quantity,value\n";
    for (const auto& row : result.rows) {
        append_row(out.csv, {format_number(row.j.value()), optional_number(row.beta), format_number(row.h),
                             row.quantity, format_number(row.value)});
    }
    out.metadata = "[]";
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& contents)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    f << contents;
    f.close();
    if (!f) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

} // namespace

std::string to_string(Mode m)
{
    switch (m) {
    case Mode::echo:
        return "echo";
    case Mode::bures:
        return "bures";
    case Mode::entropy_bound:
        return "entropy-bound";
    case Mode::s_curve:
        return "s-curve";
    case Mode::sweep:
        return "sweep";
    }
    return "unknown";
}

Mode mode_from_string(const std::string& name)
{
    for (Mode m : {Mode::echo, Mode::bures, Mode::entropy_bound, Mode::s_curve, Mode::sweep}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    config_error("unknown mode '" + name + "'");
}

ExperimentConfig default_config(Mode mode)
{
    ExperimentConfig c;
    c.mode = mode;
    return resolve(c);
}

ExperimentConfig resolve(ExperimentConfig c)
{
    if (c.j_grid.empty()) {
        if (c.mode == Mode::sweep) {
            c.j_grid = {SpinQuantumNumber(200), SpinQuantumNumber(400), SpinQuantumNumber(1000)};
        } else {
            c.j_grid = {SpinQuantumNumber(600)};
        }
    }
    if (c.h_grid.empty()) {
        c.h_grid = c.mode == Mode::sweep ? parse_grid("0:1:100") : std::vector<double>{0.8};
    }
    if (!c.dt) {
        c.dt = (c.mode == Mode::sweep || !c.beta_grid.empty()) ? kCoarseDt : kPureDt;
    }
    if (c.output_path.empty()) {
        c.output_path = to_string(c.mode) + ".csv";
    }

    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(c.gamma) || !finite(c.h0)) {
        config_error("gamma and h0 must be finite");
    }
    if (!finite(c.g) || c.g == 0.0) {
        config_error("g must be finite and nonzero");
    }
    if (!(*c.dt > 0.0) || !finite(*c.dt)) {
        config_error("dt must be positive");
    }
    if (!(c.t_max > 0.0) || !finite(c.t_max)) {
        config_error("t_max must be positive");
    }
    if (!(c.T_average > 0.0) || !finite(c.T_average)) {
        config_error("T_average must be positive");
    }
    if (c.workers < 1) {
        config_error("workers must be >= 1");
    }
    if (!std::all_of(c.h_grid.begin(), c.h_grid.end(), finite)) {
        config_error("h values must be finite");
    }
    for (double b : c.beta_grid) {
        if (!(b >= 0.0) || !finite(b)) {
            config_error("beta values must be finite and >= 0");
        }
    }
    if (c.mode == Mode::echo && !c.beta_grid.empty()) {
        config_error("echo mode is defined for the pure protocol; remove beta");
    }
    if (c.reference == AngleReference::equilibrium && c.beta_grid.empty() && c.mode != Mode::s_curve) {
        config_error("the equilibrium reference needs beta");
    }
    return c;
}

ExperimentConfig apply_config_json(std::string_view json_text, ExperimentConfig c)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        config_error(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        config_error("top level must be a JSON object");
    }
    auto spins = [](const std::vector<double>& values) {
        std::vector<SpinQuantumNumber> out;
        for (double v : values) {
            out.push_back(SpinQuantumNumber::from_value(v));
        }
        return out;
    };
    for (const auto& [key, value] : doc.items()) {
        if (key == "mode") {
            c.mode = mode_from_string(string_field(value, key));
        } else if (key == "j" || key == "j_grid") {
            c.j_grid = spins(number_list(value, key));
        } else if (key == "gamma") {
            c.gamma = number_field(value, key);
        } else if (key == "g") {
            c.g = number_field(value, key);
        } else if (key == "h0") {
            c.h0 = number_field(value, key);
        } else if (key == "h") {
            c.h_grid = {number_field(value, key)};
        } else if (key == "h_grid") {
            c.h_grid = value.is_string() ? parse_grid(value.get<std::string>()) : number_list(value, key);
            if (c.h_grid.empty()) {
                config_error("h_grid is empty");
            }
        } else if (key == "beta" || key == "beta_grid") {
            if (value.is_null()) {
                c.beta_grid.clear();
            } else {
                c.beta_grid = number_list(value, key);
                if (c.beta_grid.empty()) {
                    config_error("beta_grid is empty; use null for the pure protocol");
                }
            }
        } else if (key == "dt") {
            c.dt = value.is_null() ? std::nullopt : std::optional<double>(number_field(value, key));
        } else if (key == "t_max") {
            c.t_max = number_field(value, key);
        } else if (key == "T_average" || key == "T") {
            c.T_average = number_field(value, key);
        } else if (key == "output_path") {
            c.output_path = string_field(value, key);
        } else if (key == "workers") {
            c.workers = static_cast<unsigned>(unsigned_field(value, key));
        } else if (key == "seed") {
            c.seed = unsigned_field(value, key);
        } else if (key == "initial_state") {
            c.initial_state = initial_state_from_string(string_field(value, key));
        } else if (key == "reference") {
            c.reference = angle_reference_from_string(string_field(value, key));
        } else {
            config_error("unknown key '" + key + "'");
        }
    }
    return c;
}

std::string config_to_json(const ExperimentConfig& config)
{
    return to_json_object(config).dump();
}

std::string config_fingerprint(const ExperimentConfig& config)
{
    json j = to_json_object(config);
    j.erase("output_path");
    j.erase("workers");
    return fnv1a_hex(j.dump());
}

std::vector<double> parse_grid(std::string_view spec)
{
    const auto first = spec.find(':');
    const auto second = first == std::string_view::npos ? first : spec.find(':', first + 1);
    if (second == std::string_view::npos || spec.find(':', second + 1) != std::string_view::npos) {
        config_error("grid '" + std::string(spec) + "' must look like a:b:steps");
    }
    auto parse_double = [&](std::string_view s) {
        double v = 0.0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) {
            config_error("bad number '" + std::string(s) + "' in grid '" + std::string(spec) + "'");
        }
        return v;
    };
    const double a = parse_double(spec.substr(0, first));
    const double b = parse_double(spec.substr(first + 1, second - first - 1));
    const auto steps_text = spec.substr(second + 1);
    long steps = 0;
    const auto [p, ec] = std::from_chars(steps_text.data(), steps_text.data() + steps_text.size(), steps);
    if (ec != std::errc() || p != steps_text.data() + steps_text.size() || steps < 0) {
        config_error("grid '" + std::string(spec) + "' needs a non-negative integer step count");
    }
    if (steps == 0) {
        if (a != b) {
            config_error("grid '" + std::string(spec) + "' with 0 steps needs a == b");
        }
        return {a};
    }
    std::vector<double> out;
    for (long i = 0; i <= steps; ++i) {
        out.push_back(i == steps ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(steps));
    }
    return out;
}

std::string format_number(double value)
{
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) {
        throw NumericalFault("cannot format number");
    }
    return std::string(buf, p);
}

SweepResult run_sweep_parallel(const ExperimentConfig& config)
{
    const ExperimentConfig c = resolve(config);
    const auto tasks = tasks_of(c);
    const auto cache = manifolds_for(c, tasks);
    const auto values = parallel_map(tasks.size(), c.workers, [&](std::size_t i) {
        const auto& task = tasks[i];
        const QuenchSpec base = quench_of(c, task, c.T_average);
        return time_averaged_entropy_vs_h({task.h}, base, c.T_average, 1, lookup(cache, task)).rows.front();
    });
    SweepResult out;
    out.rows = values;
    sort_rows(out.rows);
    out.config_fingerprint = config_fingerprint(c);
    return out;
}

ExperimentOutput render_experiment(const ExperimentConfig& config)
{
    const ExperimentConfig c = resolve(config);
    ExperimentOutput out;
    switch (c.mode) {
    case Mode::echo:
        out = render_echo(c);
        break;
    case Mode::bures:
    case Mode::entropy_bound:
        out = render_angle_modes(c);
        break;
    case Mode::s_curve:
        out = render_s_curve();
        break;
    case Mode::sweep:
        out = render_sweep(c);
        break;
    }
    json meta = json::object();
    meta["tool"] = "dqpt";
    meta["version"] = library_version();
    meta["config"] = to_json_object(c);
    meta["config_fingerprint"] = config_fingerprint(c);
    meta["results"] = json::parse(out.metadata);
    out.metadata = meta.dump(2) + "\n";
    return out;
}

void run_experiment(const ExperimentConfig& config)
{
    const ExperimentConfig c = resolve(config);
    const ExperimentOutput out = render_experiment(c);

    namespace fs = std::filesystem;
    const fs::path csv_path = c.output_path;
    const fs::path meta_path = c.output_path + ".meta.json";
    if (csv_path.has_parent_path()) {
        fs::create_directories(csv_path.parent_path());
    }
    const fs::path csv_tmp = csv_path.string() + ".tmp";
    const fs::path meta_tmp = meta_path.string() + ".tmp";
    try {
        write_file(csv_tmp, out.csv);
        write_file(meta_tmp, out.metadata);
        fs::rename(csv_tmp, csv_path);
        fs::rename(meta_tmp, meta_path);
    } catch (...) {
        std::error_code ignored;
        fs::remove(csv_tmp, ignored);
        fs::remove(meta_tmp, ignored);
        fs::remove(csv_path, ignored);
        throw;
    }
}

const char* library_version() noexcept
{
    return DQPT_VERSION;
}

} // namespace dqpt
