#pragma once

// Declarative experiments: JSON config in, CSV tables and a manifest out.
//
// The config format is documented in configs/README.md. Every experiment
// computes all of its rows in memory before anything is written, so a config
// that fails validation leaves the output directory untouched.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "brainval/budget.hpp"
#include "brainval/errors.hpp"
#include "brainval/hash.hpp"
#include "brainval/linmodel.hpp"
#include "brainval/model_io.hpp"
#include "brainval/montecarlo.hpp"
#include "brainval/theory.hpp"
#include "brainval/valuation.hpp"

namespace brainval::exp {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind { savings_sweep, robustness_sweep, budget_sweep, lambda_curve, validate_empirical };

inline const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::savings_sweep: return "savings_sweep";
        case ExperimentKind::robustness_sweep: return "robustness_sweep";
        case ExperimentKind::budget_sweep: return "budget_sweep";
        case ExperimentKind::lambda_curve: return "lambda_curve";
        case ExperimentKind::validate_empirical: return "validate_empirical";
    }
    return "unknown";
}

/// Model block of a config. Presets fill defaults; explicit keys override them.
struct ModelConfig {
    std::string preset = "fmri";  // fmri | small | random | file
    std::string file;
    Eigen::Index d_x = 4096;
    Eigen::Index d_l = 410;
    Eigen::Index d_r = 10000;
    double m = 0.05;
    std::optional<double> snr_task;
    std::optional<double> snr_ratio;  // SNR_T / SNR_B; takes precedence over snr_task
    double latent_var = kFmriLatentVar;
    double sigma_r2 = kFmriRecordingVar;
    Eigen::Index pool_width = kFmriPoolWidth;
    double pool_weight = 1.0;
    std::uint64_t seed = 0;
    std::optional<double> hours;      // brain samples as recording hours (1800 per hour)
    std::optional<std::int64_t> n_B;  // or as an explicit count
};

struct TestConfig {
    double c_on = 1.0;
    double c_off = 1.0;
    std::optional<double> sigma_test2;  // defaults to the model's sigma_y2
};

struct McConfig {
    std::size_t trials = 1000;
    std::size_t replicates = 10;
    std::uint64_t seed = 0;
    SamplingMode sampling = SamplingMode::moments;
    std::size_t bootstrap_resamples = 10000;
};

struct SavingsAxes {
    std::vector<double> n_T;
    std::vector<double> hours;
    std::vector<double> n_B;
    std::vector<double> m;
    std::vector<double> snr_ratio;
    std::vector<double> dim_ratio;
};

struct RobustnessAxes {
    std::vector<double> tau;
    std::vector<double> n_B;
    std::vector<double> hours;
    std::vector<double> n_T;
};

struct BudgetAxes {
    std::vector<double> cost_ratio;
    std::vector<double> budget;
    double c_T = BudgetSpec::kLabelCost;
    std::vector<std::string> methods{"grid", "asymptotic"};
    std::string risk_source = "finite";  // finite | empirical
    std::size_t grid_points = 64;
};

struct LambdaAxes {
    std::vector<double> n_T;
    double lambda_min = 1e-2;
    double lambda_ratio = 1.25;
    std::size_t lambda_points = 60;
};

struct ValidateAxes {
    std::vector<double> n_T;
    std::vector<std::string> policies{"tos", "theory_optimal"};
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::savings_sweep;
    std::string name;
    std::uint64_t seed = 0;
    std::string output = "out";
    unsigned threads = 0;
    ModelConfig model;
    TestConfig test;
    McConfig mc;
    SavingsAxes savings;
    RobustnessAxes robustness;
    BudgetAxes budget;
    LambdaAxes lambda;
    ValidateAxes validate;
    json canonical;  // config after overrides, used for hashing and the manifest

    std::string config_hash() const {
        ConfigHasher h;
        h.add(std::string_view(canonical.dump()));
        return h.hex();
    }
};

struct Overrides {
    std::optional<std::string> output_dir;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
};

// Config parsing

namespace detail {

/// Reads typed keys from one JSON object and rejects keys nobody asked for.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key) && !obj_.at(key).is_null();
    }

    template <typename T>
    std::optional<T> get(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return convert<T>(obj_.at(key), key);
    }

    template <typename T>
    void read(const std::string& key, T& out) {
        if (auto v = get<T>(key)) out = *v;
    }

    std::vector<double> numbers(const std::string& key) {
        std::vector<double> out;
        if (!has(key)) return out;
        const json& v = obj_.at(key);
        if (!v.is_array()) throw ConfigError(where(key) + ": expected a list of numbers");
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(where(key) + ": expected a list of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<std::string> strings(const std::string& key) {
        std::vector<std::string> out;
        const json& v = obj_.at(key);
        if (!v.is_array()) throw ConfigError(where(key) + ": expected a list of strings");
        for (const auto& e : v) {
            if (!e.is_string()) throw ConfigError(where(key) + ": expected a list of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    const json& child(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    std::string where(const std::string& key = {}) const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() const {
        for (const auto& [key, _] : obj_.items()) {
            if (!seen_.count(key)) throw ConfigError(where(key) + ": unknown key");
        }
    }

private:
    template <typename T>
    T convert(const json& v, const std::string& key) const {
        if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
            return v.get<double>();
        } else {
            static_assert(std::is_integral_v<T>);
            if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0)) {
                throw ConfigError(where(key) + ": expected a " +
                                  std::string(std::is_unsigned_v<T> ? "nonnegative " : "") + "integer");
            }
            return v.get<T>();
        }
    }

    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

inline ExperimentKind parse_kind(const std::string& s) {
    for (auto k : {ExperimentKind::savings_sweep, ExperimentKind::robustness_sweep, ExperimentKind::budget_sweep,
                   ExperimentKind::lambda_curve, ExperimentKind::validate_empirical}) {
        if (s == kind_name(k)) return k;
    }
    throw ConfigError("experiment: unknown kind '" + s +
                      "' (expected savings_sweep, robustness_sweep, budget_sweep, lambda_curve or validate_empirical)");
}

inline void apply_preset(ModelConfig& m) {
    if (m.preset == "fmri") {
        m.d_x = 4096;
        m.d_l = 410;
        m.d_r = 10000;
        m.m = 0.05;
        m.snr_ratio = 0.1;
        m.pool_weight = fmri_pool_weight();
        m.hours = 1000.0;
    } else if (m.preset == "small") {
        m.d_x = 8;
        m.d_l = 5;
        m.d_r = 8;
        m.m = 0.05;
        m.snr_task = 1.0;
        m.pool_weight = fmri_pool_weight();
        m.n_B = 10000;
    } else if (m.preset == "random") {
        m.d_x = 8;
        m.d_l = 5;
        m.d_r = 8;
        m.snr_task = 1.0;
        m.pool_weight = 1.0;
    } else if (m.preset != "file") {
        throw ConfigError("model.preset: unknown preset '" + m.preset + "' (expected fmri, small, random or file)");
    }
}

inline ModelConfig parse_model(const json& j, std::uint64_t root_seed) {
    ObjectReader r(j, "model");
    ModelConfig m;
    r.read("preset", m.preset);
    apply_preset(m);
    m.seed = root_seed;
    r.read("file", m.file);
    if (m.preset == "file" && m.file.empty()) throw ConfigError("model.file: required when preset is 'file'");
    r.read("d_x", m.d_x);
    r.read("d_l", m.d_l);
    r.read("d_r", m.d_r);
    r.read("m", m.m);
    if (auto v = r.get<double>("snr_task")) {
        m.snr_task = v;
        m.snr_ratio.reset();
    }
    if (auto v = r.get<double>("snr_ratio")) m.snr_ratio = v;
    r.read("latent_var", m.latent_var);
    r.read("sigma_r2", m.sigma_r2);
    r.read("pool_width", m.pool_width);
    if (r.has("pool_weight")) {
        const json& w = r.child("pool_weight");
        if (w.is_string() && w.get<std::string>() == "fmri") {
            m.pool_weight = fmri_pool_weight();
        } else if (w.is_number()) {
            m.pool_weight = w.get<double>();
        } else {
            throw ConfigError("model.pool_weight: expected a number or \"fmri\"");
        }
    }
    r.read("seed", m.seed);
    if (auto v = r.get<double>("hours")) {
        m.hours = v;
        m.n_B.reset();
    }
    if (auto v = r.get<std::int64_t>("n_B")) {
        m.n_B = v;
        m.hours.reset();
    }
    r.finish();
    return m;
}

inline TestConfig parse_test(const json& j) {
    ObjectReader r(j, "test");
    TestConfig t;
    if (auto tau = r.get<double>("tau")) {
        if (!(*tau >= 0.0 && *tau <= 1.0)) throw ConfigError("test.tau: must lie in [0, 1]");
        t.c_on = 1.0 - *tau;
        t.c_off = *tau;
    }
    r.read("c_on", t.c_on);
    r.read("c_off", t.c_off);
    t.sigma_test2 = r.get<double>("sigma_test2");
    r.finish();
    return t;
}

inline McConfig parse_mc(const json& j, std::uint64_t root_seed) {
    ObjectReader r(j, "mc");
    McConfig mc;
    mc.seed = root_seed;
    r.read("trials", mc.trials);
    r.read("replicates", mc.replicates);
    r.read("seed", mc.seed);
    r.read("bootstrap_resamples", mc.bootstrap_resamples);
    if (auto s = r.get<std::string>("sampling")) {
        if (*s == "moments") {
            mc.sampling = SamplingMode::moments;
        } else if (*s == "full_data") {
            mc.sampling = SamplingMode::full_data;
        } else {
            throw ConfigError("mc.sampling: expected \"moments\" or \"full_data\"");
        }
    }
    if (mc.trials < 1 || mc.replicates < 1) throw ConfigError("mc: trials and replicates must be >= 1");
    r.finish();
    return mc;
}

inline void parse_axes(ExperimentConfig& cfg, const json& j) {
    ObjectReader r(j, "axes");
    switch (cfg.kind) {
        case ExperimentKind::savings_sweep: {
            auto& a = cfg.savings;
            a.n_T = r.numbers("n_T");
            a.hours = r.numbers("hours");
            a.n_B = r.numbers("n_B");
            a.m = r.numbers("m");
            a.snr_ratio = r.numbers("snr_ratio");
            a.dim_ratio = r.numbers("dim_ratio");
            break;
        }
        case ExperimentKind::robustness_sweep: {
            auto& a = cfg.robustness;
            a.tau = r.numbers("tau");
            a.n_B = r.numbers("n_B");
            a.hours = r.numbers("hours");
            a.n_T = r.numbers("n_T");
            break;
        }
        case ExperimentKind::budget_sweep: {
            auto& a = cfg.budget;
            a.cost_ratio = r.numbers("cost_ratio");
            a.budget = r.numbers("budget");
            r.read("c_T", a.c_T);
            if (r.has("methods")) a.methods = r.strings("methods");
            for (const auto& m : a.methods) {
                if (m != "grid" && m != "asymptotic") throw ConfigError("axes.methods: unknown method '" + m + "'");
            }
            r.read("risk_source", a.risk_source);
            if (a.risk_source != "finite" && a.risk_source != "empirical") {
                throw ConfigError("axes.risk_source: expected \"finite\" or \"empirical\"");
            }
            r.read("grid_points", a.grid_points);
            break;
        }
        case ExperimentKind::lambda_curve: {
            auto& a = cfg.lambda;
            a.n_T = r.numbers("n_T");
            r.read("lambda_min", a.lambda_min);
            r.read("lambda_ratio", a.lambda_ratio);
            r.read("lambda_points", a.lambda_points);
            if (!(a.lambda_min > 0.0) || !(a.lambda_ratio > 1.0) || a.lambda_points < 1) {
                throw ConfigError("axes: lambda grid needs lambda_min > 0, lambda_ratio > 1, lambda_points >= 1");
            }
            break;
        }
        case ExperimentKind::validate_empirical: {
            auto& a = cfg.validate;
            a.n_T = r.numbers("n_T");
            if (r.has("policies")) a.policies = r.strings("policies");
            for (const auto& p : a.policies) {
                if (p != "tos" && p != "theory_optimal" && p != "hard") {
                    throw ConfigError("axes.policies: unknown policy '" + p + "'");
                }
            }
            break;
        }
    }
    r.finish();
}

inline bool uses_monte_carlo(const ExperimentConfig& cfg) {
    return cfg.kind == ExperimentKind::lambda_curve || cfg.kind == ExperimentKind::validate_empirical ||
           (cfg.kind == ExperimentKind::budget_sweep && cfg.budget.risk_source == "empirical");
}

}  // namespace detail

/// Parses config text. Errors name the line/column (syntax) or key path (content).
inline ExperimentConfig parse_config(const std::string& text, const Overrides& ov = {}) {
    json j;
    try {
        j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("syntax: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");

    if (ov.seed) {
        // A seed override replaces every seed in the file.
        j["seed"] = *ov.seed;
        if (j.contains("model") && j["model"].is_object()) j["model"].erase("seed");
        if (j.contains("mc") && j["mc"].is_object()) j["mc"].erase("seed");
    }
    if (ov.output_dir) j["output"] = *ov.output_dir;
    if (ov.threads) j["threads"] = *ov.threads;

    detail::ObjectReader r(j, "");
    ExperimentConfig cfg;
    const auto kind = r.get<std::string>("experiment");
    if (!kind) throw ConfigError("experiment: required key missing");
    cfg.kind = detail::parse_kind(*kind);
    r.read("name", cfg.name);
    r.read("seed", cfg.seed);
    r.read("output", cfg.output);
    r.read("threads", cfg.threads);
    cfg.model = r.has("model") ? detail::parse_model(r.child("model"), cfg.seed) : ModelConfig{};
    if (!r.has("model")) {
        detail::apply_preset(cfg.model);
        cfg.model.seed = cfg.seed;
    }
    if (r.has("test")) cfg.test = detail::parse_test(r.child("test"));
    cfg.mc.seed = cfg.seed;
    if (r.has("mc")) cfg.mc = detail::parse_mc(r.child("mc"), cfg.seed);
    if (!r.has("axes")) throw ConfigError("axes: required key missing");
    detail::parse_axes(cfg, r.child("axes"));
    r.finish();

    cfg.canonical = j;
    // Neither the thread count nor the destination changes any number.
    cfg.canonical.erase("threads");
    cfg.canonical.erase("output");
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path, const Overrides& ov = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), ov);
}

// Model construction

struct BuiltModel {
    ModelParams params;
    Eigen::Index n_B = 0;
};

inline Eigen::Index brain_count(const ModelConfig& m) {
    if (m.n_B) {
        if (*m.n_B < 0) throw RegimeError("n_B must be nonnegative");
        return static_cast<Eigen::Index>(*m.n_B);
    }
    if (m.hours) return fmri_brain_samples(*m.hours);
    return 0;
}

inline BuiltModel build_model(const ModelConfig& m) {
    BuiltModel out;
    if (m.preset == "file") {
        out.params = read_model_file(m.file);
        if (m.snr_ratio) out.params.sigma_y2 = out.params.beta_star.squaredNorm() / (*m.snr_ratio * snr_brain(out.params));
        if (m.snr_task) out.params.sigma_y2 = out.params.beta_star.squaredNorm() / *m.snr_task;
    } else {
        RandomModelSpec s;
        s.d_x = m.d_x;
        s.d_l = m.d_l;
        s.d_r = m.d_r;
        s.m = m.m;
        s.snr_task = m.snr_task.value_or(1.0);
        s.latent_var = m.latent_var;
        s.sigma_r2 = m.sigma_r2;
        s.pool_width = m.pool_width;
        s.pool_weight = m.pool_weight;
        s.seed = m.seed;
        out.params = build_random_model(s);
        if (m.snr_ratio) {
            if (!(*m.snr_ratio > 0.0)) throw DimensionError("snr_ratio must be positive");
            out.params.sigma_y2 = out.params.beta_star.squaredNorm() / (*m.snr_ratio * snr_brain(out.params));
        }
    }
    out.n_B = brain_count(m);
    return out;
}

inline TestSpec make_test(const TestConfig& t, const ModelParams& p) {
    TestSpec spec{t.c_on, t.c_off, t.sigma_test2.value_or(p.sigma_y2)};
    validate(spec, p.d_x, p.d_l);
    return spec;
}

inline MonteCarloConfig make_mc(const McConfig& mc, unsigned threads) {
    MonteCarloConfig out;
    out.trials = mc.trials;
    out.replicates = mc.replicates;
    out.seed = mc.seed;
    out.threads = threads;
    out.sampling = mc.sampling;
    out.bootstrap_resamples = mc.bootstrap_resamples;
    return out;
}

// Tables

struct Table {
    std::string file;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    void write(std::ostream& os) const {
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
            os << '\n';
        }
    }
};

struct PointError {
    std::string table;
    std::string point;
    std::string message;
};

struct RunResult {
    std::vector<Table> tables;
    std::vector<PointError> errors;
    std::size_t points = 0;
};

inline std::string num(double v) { return format_double(v); }

inline std::string count(double v) { return std::to_string(static_cast<long long>(std::llround(v))); }

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

namespace detail {

/// Evaluates fn(i) for i in [0, n) on a worker pool; results keep index order.
template <typename Fn>
auto parallel_map(std::size_t n, unsigned threads, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
    std::vector<decltype(fn(std::size_t{}))> out(n);
    const unsigned workers = brainval::detail::worker_count(threads, n);
    auto body = [&](unsigned w) {
        for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
    };
    if (workers <= 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
        for (auto& t : pool) t.join();
    }
    return out;
}

struct Outcome {
    std::vector<std::string> row;
    std::string error;
};

}  // namespace detail

// Experiments

/// Percent of task data saved along each savings panel:
/// brain hours (or n_B), misalignment, SNR ratio and latent/input dimension ratio.
inline RunResult run_savings(const ExperimentConfig& cfg) {
    RunResult res;
    const auto& ax = cfg.savings;
    struct Panel {
        std::string name;
        std::vector<double> values;
    };
    std::vector<Panel> panels;
    if (!ax.hours.empty()) panels.push_back({"hours", ax.hours});
    if (!ax.n_B.empty()) panels.push_back({"n_B", ax.n_B});
    if (!ax.m.empty()) panels.push_back({"misalignment", ax.m});
    if (!ax.snr_ratio.empty()) panels.push_back({"snr_ratio", ax.snr_ratio});
    if (!ax.dim_ratio.empty()) panels.push_back({"dim_ratio", ax.dim_ratio});

    for (const auto& panel : panels) {
        Table table;
        table.file = "savings_" + panel.name + ".csv";
        table.columns = {panel.name, "n_B", "n_T", "v_T_asymptotic", "percent_saved_asymptotic", "v_T_finite",
                         "percent_saved_finite", "status"};
        const std::size_t per_value = ax.n_T.size();
        auto outcomes = detail::parallel_map(panel.values.size(), cfg.threads, [&](std::size_t i) {
            std::vector<detail::Outcome> rows(per_value);
            const double value = panel.values[i];
            ModelConfig mc = cfg.model;
            std::string model_error;
            std::optional<BuiltModel> built;
            std::optional<TheoryQuantities> q;
            try {
                if (panel.name == "hours") {
                    mc.hours = value;
                    mc.n_B.reset();
                } else if (panel.name == "n_B") {
                    mc.n_B = static_cast<std::int64_t>(std::llround(value));
                    mc.hours.reset();
                } else if (panel.name == "misalignment") {
                    mc.m = value;
                } else if (panel.name == "snr_ratio") {
                    mc.snr_ratio = value;
                } else {
                    if (!(value > 0.0 && value < 1.0)) throw DimensionError("dim_ratio must lie in (0, 1)");
                    mc.d_l = std::max<Eigen::Index>(1, std::llround(value * static_cast<double>(mc.d_x)));
                }
                built = build_model(mc);
                q = derive_quantities(built->params);
            } catch (const Error& e) {
                model_error = e.what();
            }
            for (std::size_t k = 0; k < per_value; ++k) {
                const double n_t = ax.n_T[k];
                auto& out = rows[k];
                const double n_b = built ? static_cast<double>(built->n_B) : 0.0;
                out.row = {num(value), built ? count(n_b) : "", count(n_t), "", "", "", "", "ok"};
                if (!model_error.empty()) {
                    out.error = model_error;
                } else {
                    try {
                        const TestSpec test = make_test(cfg.test, built->params);
                        if (!(n_b >= 1.0)) throw RegimeError("n_B must be >= 1 for a brain-data value");
                        const auto a = asymptotic_value_report(*q, test, n_b, n_t);
                        const auto f = finite_value(*q, test, n_b, n_t);
                        out.row[3] = num(a.v_T);
                        out.row[4] = num(a.percent_saved);
                        out.row[5] = num(f.v_T);
                        out.row[6] = num(f.percent_saved);
                    } catch (const Error& e) {
                        out.error = e.what();
                    }
                }
                if (!out.error.empty()) out.row.back() = "error";
            }
            return rows;
        });
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            for (std::size_t k = 0; k < outcomes[i].size(); ++k) {
                auto& o = outcomes[i][k];
                ++res.points;
                if (!o.error.empty()) {
                    res.errors.push_back({table.file, panel.name + "=" + num(panel.values[i]) + " n_T=" + count(ax.n_T[k]),
                                          o.error});
                }
                table.add(std::move(o.row));
            }
        }
        res.tables.push_back(std::move(table));
    }
    return res;
}

/// Value of brain data under the shifted test covariance (1 - tau) P_A + tau P_Aperp.
inline RunResult run_robustness(const ExperimentConfig& cfg) {
    RunResult res;
    const auto& ax = cfg.robustness;
    const BuiltModel built = build_model(cfg.model);
    const TheoryQuantities q = derive_quantities(built.params);
    std::vector<double> n_bs = ax.n_B;
    for (double h : ax.hours) n_bs.push_back(static_cast<double>(fmri_brain_samples(h)));
    if (ax.n_B.empty() && ax.hours.empty()) n_bs.push_back(static_cast<double>(built.n_B));
    const double sigma_test2 = cfg.test.sigma_test2.value_or(built.params.sigma_y2);

    Table table;
    table.file = "robustness.csv";
    table.columns = {"n_B", "n_T", "tau_or_test_id", "v_T", "rho", "percent_saved", "source", "status"};
    struct Point {
        double n_b, n_t, tau;
    };
    std::vector<Point> pts;
    for (double n_b : n_bs) {
        for (double n_t : ax.n_T) {
            for (double tau : ax.tau) pts.push_back({n_b, n_t, tau});
        }
    }
    auto outcomes = detail::parallel_map(pts.size(), cfg.threads, [&](std::size_t i) {
        const auto& pt = pts[i];
        std::vector<detail::Outcome> rows(2);
        const ValueSource sources[2] = {ValueSource::asymptotic, ValueSource::finite_theory};
        for (int s = 0; s < 2; ++s) {
            auto& o = rows[s];
            o.row = {count(pt.n_b), count(pt.n_t), num(pt.tau), "", "", "", source_name(sources[s]), "ok"};
            try {
                if (!(pt.tau >= 0.0 && pt.tau <= 1.0)) throw DimensionError("tau must lie in [0, 1]");
                const TestSpec test = TestSpec::shift(pt.tau, sigma_test2);
                validate(test, q.d_x, q.d_l);
                if (!(pt.n_t > static_cast<double>(q.d_x) + 1.0)) throw RegimeError("n_T must exceed d_x + 1");
                const ValueReport r = s == 0 ? asymptotic_value_report(q, test, pt.n_b, pt.n_t)
                                             : finite_value(q, test, pt.n_b, pt.n_t);
                o.row[3] = num(r.v_T);
                o.row[4] = num(r.rho);
                o.row[5] = num(r.percent_saved);
            } catch (const Error& e) {
                o.error = e.what();
                o.row.back() = "error";
            }
        }
        return rows;
    });
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        for (auto& o : outcomes[i]) {
            ++res.points;
            if (!o.error.empty()) {
                res.errors.push_back({table.file,
                                      "n_B=" + count(pts[i].n_b) + " n_T=" + count(pts[i].n_t) + " tau=" + num(pts[i].tau),
                                      o.error});
            }
            table.add(std::move(o.row));
        }
    }
    res.tables.push_back(std::move(table));
    return res;
}

/// Empirical grid allocation: risks from Monte Carlo at the theory-optimal lambda.
inline BudgetReport grid_allocation_empirical(const ModelParams& p, const TheoryQuantities& q, const TestSpec& test,
                                              const BudgetSpec& spec, const BudgetGridSpec& grid,
                                              const MonteCarloConfig& mc) {
    return grid_allocation(q, test, spec, grid, [&](std::int64_t n_b, std::int64_t n_t) {
        const auto policy = n_b == 0 ? LambdaPolicy::tos() : LambdaPolicy::theory_optimal();
        return estimate_risk(p, test, static_cast<Eigen::Index>(n_b), static_cast<Eigen::Index>(n_t), policy, mc).mean;
    });
}

inline RunResult run_budget(const ExperimentConfig& cfg) {
    RunResult res;
    const auto& ax = cfg.budget;
    const BuiltModel built = build_model(cfg.model);
    const TheoryQuantities q = derive_quantities(built.params);
    const TestSpec test = make_test(cfg.test, built.params);
    const MonteCarloConfig mc = make_mc(cfg.mc, cfg.threads);

    Table table;
    table.file = "budget.csv";
    table.columns = {"B", "c_B", "c_T", "F", "n_B_opt", "n_T_opt", "risk", "extra_budget", "percent_budget_saved",
                     "method", "status"};
    struct Point {
        double ratio, budget;
        std::string method;
    };
    std::vector<Point> pts;
    for (double ratio : ax.cost_ratio) {
        for (double b : ax.budget) {
            for (const auto& m : ax.methods) pts.push_back({ratio, b, m});
        }
    }
    const bool empirical = ax.risk_source == "empirical";
    // Empirical points parallelize inside the Monte Carlo; closed forms over points.
    auto outcomes = detail::parallel_map(pts.size(), empirical ? 1u : cfg.threads, [&](std::size_t i) {
        const auto& pt = pts[i];
        detail::Outcome o;
        const BudgetSpec spec{pt.ratio * ax.c_T, ax.c_T, pt.budget};
        o.row = {num(spec.B), num(spec.c_B), num(spec.c_T), "", "", "", "", "", "", pt.method, "ok"};
        try {
            if (!(pt.ratio > 0.0)) throw BudgetError("cost_ratio must be positive");
            BudgetReport r;
            if (pt.method == "asymptotic") {
                r = asymptotic_allocation(q, spec, test);
            } else if (empirical) {
                r = grid_allocation_empirical(built.params, q, test, spec, {ax.grid_points, true}, mc);
            } else {
                r = grid_allocation(q, test, spec, {ax.grid_points, true});
            }
            o.row[3] = num(r.F);
            o.row[4] = std::to_string(r.n_B_opt);
            o.row[5] = std::to_string(r.n_T_opt);
            o.row[6] = num(r.risk_at_opt);
            o.row[7] = num(r.extra_budget);
            o.row[8] = num(r.percent_budget_saved);
        } catch (const Error& e) {
            o.error = e.what();
            o.row.back() = "error";
        }
        return o;
    });
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        ++res.points;
        if (!outcomes[i].error.empty()) {
            res.errors.push_back({table.file,
                                  "cost_ratio=" + num(pts[i].ratio) + " B=" + num(pts[i].budget) + " method=" + pts[i].method,
                                  outcomes[i].error});
        }
        table.add(std::move(outcomes[i].row));
    }
    res.tables.push_back(std::move(table));
    return res;
}

/// Empirical risk over a lambda grid at each n_T, and the selected lambda next
/// to the theory schedule.
inline RunResult run_lambda(const ExperimentConfig& cfg) {
    RunResult res;
    const auto& ax = cfg.lambda;
    const BuiltModel built = build_model(cfg.model);
    const TheoryQuantities q = derive_quantities(built.params);
    const TestSpec test = make_test(cfg.test, built.params);
    const MonteCarloConfig mc = make_mc(cfg.mc, cfg.threads);
    const auto grid = LambdaGridSpec::from_ratio(ax.lambda_min, ax.lambda_ratio, ax.lambda_points);
    const double n_b = static_cast<double>(built.n_B);

    Table curve;
    curve.file = "lambda_curve.csv";
    curve.columns = {"n_B", "n_T", "lambda", "mean", "ci_low", "ci_high", "theory_risk"};
    Table schedule;
    schedule.file = "lambda_schedule.csv";
    schedule.columns = {"config_hash", "n_B", "n_T", "best_lambda", "theory_lambda", "grid_steps_from_theory",
                        "best_mean", "best_ci_low", "best_ci_high", "trials", "replicates", "seed", "status"};
    for (double n_t : ax.n_T) {
        ++res.points;
        try {
            if (!(n_t > static_cast<double>(q.d_x) + 1.0)) throw RegimeError("n_T must exceed d_x + 1");
            if (built.n_B < 1) throw RegimeError("lambda_curve needs n_B >= 1");
            const auto c = grid_search_lambda(built.params, test, built.n_B, static_cast<Eigen::Index>(n_t), grid, mc);
            for (std::size_t g = 0; g < c.grid.size(); ++g) {
                const auto& r = c.risks[g];
                curve.add({count(n_b), count(n_t), num(c.grid[g]), num(r.mean), num(r.ci_low), num(r.ci_high),
                           num(befs_finite_risk(q, test, n_b, n_t, c.grid[g]))});
            }
            const double lam = optimal_lambda(q, n_b, n_t);
            const auto& best = c.risks[c.best_index];
            schedule.add({best.config_hash, count(n_b), count(n_t), num(c.best_lambda), num(lam),
                          num(std::log(c.best_lambda / lam) / std::log(ax.lambda_ratio)), num(best.mean),
                          num(best.ci_low), num(best.ci_high), std::to_string(mc.trials),
                          std::to_string(mc.replicates), std::to_string(mc.seed), "ok"});
        } catch (const Error& e) {
            res.errors.push_back({schedule.file, "n_T=" + count(n_t), e.what()});
            schedule.add({"", count(n_b), count(n_t), "", "", "", "", "", "", std::to_string(mc.trials),
                          std::to_string(mc.replicates), std::to_string(mc.seed), "error"});
        }
    }
    res.tables.push_back(std::move(curve));
    res.tables.push_back(std::move(schedule));
    return res;
}

/// Empirical risks and values next to the finite and asymptotic laws.
inline RunResult run_validate(const ExperimentConfig& cfg) {
    RunResult res;
    const auto& ax = cfg.validate;
    const BuiltModel built = build_model(cfg.model);
    const TheoryQuantities q = derive_quantities(built.params);
    const TestSpec test = make_test(cfg.test, built.params);
    const MonteCarloConfig mc = make_mc(cfg.mc, cfg.threads);
    const double n_b = static_cast<double>(built.n_B);

    Table risks;
    risks.file = "validate_risk.csv";
    risks.columns = {"config_hash", "n_B", "n_T", "lambda_policy", "lambda", "mean", "ci_low", "ci_high",
                     "trials", "replicates", "seed", "theory_risk", "theory_in_ci", "status"};
    Table values;
    values.file = "validate_value.csv";
    values.columns = {"n_B", "n_T", "v_T_empirical", "v_T_empirical_ci_low", "v_T_empirical_ci_high",
                      "v_T_finite", "v_T_asymptotic", "percent_saved_empirical", "percent_saved_finite",
                      "percent_saved_asymptotic", "status"};

    for (double n_t : ax.n_T) {
        const auto n_t_i = static_cast<Eigen::Index>(n_t);
        std::optional<RiskEstimate> soft;
        for (const auto& name : ax.policies) {
            ++res.points;
            const PolicyKind kind = name == "tos" ? PolicyKind::tos
                                    : name == "hard" ? PolicyKind::hard
                                                     : PolicyKind::theory_optimal;
            try {
                if (!(n_t > static_cast<double>(q.d_x) + 1.0)) throw RegimeError("n_T must exceed d_x + 1");
                if (kind != PolicyKind::tos && built.n_B < 1) throw RegimeError("brain policies need n_B >= 1");
                const LambdaPolicy policy{kind, 0.0};
                const auto est = estimate_risk(built.params, test, built.n_B, n_t_i, policy, mc);
                double lambda = 0.0;
                std::string theory, covered;
                if (kind == PolicyKind::tos) {
                    const double t = tos_risk(q, test, n_t);
                    theory = num(t);
                    covered = est.covers(t) ? "1" : "0";
                } else if (kind == PolicyKind::theory_optimal) {
                    lambda = optimal_lambda(q, n_b, n_t);
                    const double t = befs_finite_risk(q, test, n_b, n_t, lambda);
                    theory = num(t);
                    covered = est.covers(t) ? "1" : "0";
                    soft = est;
                }
                // The hard-constraint law is conditional on the fitted encoding; no unconditional column.
                auto row = risk_csv_row(est, built.n_B, n_t_i, kind, lambda);
                std::vector<std::string> cells;
                std::stringstream ss(row);
                for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
                while (cells.size() < 11) cells.emplace_back();
                cells.push_back(theory);
                cells.push_back(covered);
                cells.push_back("ok");
                risks.add(std::move(cells));
            } catch (const Error& e) {
                res.errors.push_back({risks.file, "n_T=" + count(n_t) + " policy=" + name, e.what()});
                risks.add({"", count(n_b), count(n_t), name, "", "", "", "", std::to_string(mc.trials),
                           std::to_string(mc.replicates), std::to_string(mc.seed), "", "", "error"});
            }
        }
        if (!soft) continue;
        ++res.points;
        std::vector<std::string> row{count(n_b), count(n_t), "", "", "", "", "", "", "", "", "ok"};
        try {
            const double scale = q.sigma_y2 * test.trace(q.d_x, q.d_l);
            auto invert = [&](double risk) {
                const double excess = risk - test.sigma_test2;
                return excess > 0.0 ? scale / excess - (n_t - static_cast<double>(q.d_x) - 1.0) : kInfinity;
            };
            if (!(soft->mean > test.sigma_test2)) throw InversionError("empirical risk at or below the noise floor");
            const double v_emp = invert(soft->mean);
            const auto fin = finite_value(q, test, n_b, n_t);
            const auto asy = asymptotic_value_report(q, test, n_b, n_t);
            row[2] = num(v_emp);
            row[3] = num(invert(soft->ci_high));
            row[4] = num(invert(soft->ci_low));
            row[5] = num(fin.v_T);
            row[6] = num(asy.v_T);
            row[7] = num(percent_saved(n_t, v_emp));
            row[8] = num(fin.percent_saved);
            row[9] = num(asy.percent_saved);
        } catch (const Error& e) {
            res.errors.push_back({values.file, "n_T=" + count(n_t), e.what()});
            row.back() = "error";
        }
        values.add(std::move(row));
    }
    res.tables.push_back(std::move(risks));
    res.tables.push_back(std::move(values));
    return res;
}

inline RunResult execute(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::savings_sweep: return run_savings(cfg);
        case ExperimentKind::robustness_sweep: return run_robustness(cfg);
        case ExperimentKind::budget_sweep: return run_budget(cfg);
        case ExperimentKind::lambda_curve: return run_lambda(cfg);
        case ExperimentKind::validate_empirical: return run_validate(cfg);
    }
    throw ConfigError("unknown experiment");
}

// Output

namespace detail {

inline void write_atomically(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp + "'");
        out << content;
        if (!out) throw Error("write failed for '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline std::string render(const Table& t) {
    std::ostringstream os;
    t.write(os);
    return os.str();
}

}  // namespace detail

struct RunSummary {
    std::filesystem::path output;
    std::size_t points = 0;
    std::size_t failed = 0;
    std::vector<std::string> files;
    bool total_failure() const { return points > 0 && failed >= points; }
};

inline std::string compiler_id() {
#if defined(__clang__)
    return "clang " __clang_version__;
#elif defined(__GNUC__)
    return "gcc " __VERSION__;
#else
    return "unknown";
#endif
}

/// Runs an experiment and writes its tables, errors.csv (when any point
/// failed) and manifest.json. Nothing is written if the experiment throws
/// before producing rows.
inline RunSummary run(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunResult result = execute(cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    RunSummary summary;
    summary.output = cfg.output;
    summary.points = result.points;
    summary.failed = result.errors.size();
    std::filesystem::create_directories(summary.output);

    std::vector<std::pair<std::string, std::string>> files;
    if (!summary.total_failure()) {
        for (const auto& t : result.tables) files.emplace_back(t.file, detail::render(t));
    }
    const std::string hash = cfg.config_hash();
    if (!result.errors.empty()) {
        Table errors;
        errors.file = "errors.csv";
        errors.columns = {"table", "point", "message"};
        for (const auto& e : result.errors) errors.add({e.table, csv_quote(e.point), csv_quote(e.message)});
        files.emplace_back(errors.file, detail::render(errors));
    }

    json manifest;
    manifest["tool"] = "brainval";
    manifest["version"] = kVersion;
    manifest["experiment"] = kind_name(cfg.kind);
    manifest["name"] = cfg.name;
    manifest["config_hash"] = hash;
    manifest["seed"] = cfg.seed;
    manifest["model_seed"] = cfg.model.seed;
    if (detail::uses_monte_carlo(cfg)) manifest["mc_seed"] = cfg.mc.seed;
    manifest["threads"] = cfg.threads;
    manifest["versions"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                          "." + std::to_string(EIGEN_MINOR_VERSION)},
                            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                            {"compiler", compiler_id()}};
    manifest["wall_time_seconds"] = wall;
    manifest["points"] = result.points;
    manifest["failed_points"] = result.errors.size();
    json list = json::array();
    for (const auto& t : result.tables) {
        if (summary.total_failure()) break;
        list.push_back({{"file", t.file}, {"rows", t.rows.size()}, {"columns", t.columns}});
    }
    manifest["files"] = list;
    manifest["config"] = cfg.canonical;

    for (const auto& [name, content] : files) {
        detail::write_atomically(summary.output / name, content);
        summary.files.push_back(name);
    }
    detail::write_atomically(summary.output / "manifest.json", manifest.dump(2) + "\n");
    summary.files.push_back("manifest.json");
    return summary;
}

// Describe

namespace detail {

inline void warn_n_t(std::vector<std::string>& w, const std::vector<double>& n_ts, Eigen::Index d_x) {
    for (double n_t : n_ts) {
        if (!(n_t > static_cast<double>(d_x) + 1.0)) {
            w.push_back("n_T = " + num(n_t) + " is out of regime (needs n_T > d_x + 1 = " + std::to_string(d_x + 1) + ")");
        }
    }
}

inline void warn_empty(std::vector<std::string>& w, const std::string& axis, const std::vector<double>& v) {
    if (v.empty()) w.push_back("axis '" + axis + "' is empty: zero points");
}

}  // namespace detail

/// Human-readable plan: points per table, estimated cost and regime warnings.
/// Evaluates no risks.
inline std::string describe(const ExperimentConfig& cfg) {
    std::ostringstream os;
    std::vector<std::string> warnings;
    Eigen::Index d_x = cfg.model.d_x;
    Eigen::Index d_l = cfg.model.d_l;
    if (cfg.model.preset == "file") {
        try {
            const auto doc = read_text_document(cfg.model.file);
            d_x = static_cast<Eigen::Index>(doc.scalar("d_x"));
            d_l = static_cast<Eigen::Index>(doc.scalar("d_l"));
        } catch (const Error& e) {
            warnings.push_back(std::string("model file: ") + e.what());
        }
    }
    const auto n_b = [&]() -> std::string {
        try {
            return std::to_string(brain_count(cfg.model));
        } catch (const Error& e) {
            warnings.push_back(e.what());
            return "?";
        }
    }();

    os << "experiment: " << kind_name(cfg.kind) << (cfg.name.empty() ? "" : " (" + cfg.name + ")") << '\n';
    os << "config hash: " << cfg.config_hash() << '\n';
    os << "model: preset " << cfg.model.preset;
    if (cfg.model.preset == "file") os << " '" << cfg.model.file << "'";
    os << ", d_x=" << d_x << ", d_l=" << d_l;
    if (cfg.model.preset != "file") os << ", d_r=" << cfg.model.d_r << ", m=" << num(cfg.model.m);
    os << ", n_B=" << n_b << ", seed=" << cfg.model.seed << '\n';
    if (cfg.model.m < 0.0 || cfg.model.m > 1.0) warnings.push_back("model.m must lie in [0, 1]");
    if (!(d_l >= 1 && d_l < d_x)) warnings.push_back("model dimensions need 1 <= d_l < d_x");

    std::size_t closed_form = 0;
    double trials = 0.0;
    const double mc_per_point = static_cast<double>(cfg.mc.trials) * static_cast<double>(cfg.mc.replicates);
    switch (cfg.kind) {
        case ExperimentKind::savings_sweep: {
            const auto& a = cfg.savings;
            detail::warn_empty(warnings, "n_T", a.n_T);
            detail::warn_n_t(warnings, a.n_T, d_x);
            const std::pair<const char*, const std::vector<double>*> panels[] = {
                {"hours", &a.hours}, {"n_B", &a.n_B}, {"misalignment", &a.m}, {"snr_ratio", &a.snr_ratio},
                {"dim_ratio", &a.dim_ratio}};
            std::size_t used = 0;
            for (const auto& [name, values] : panels) {
                if (values->empty()) continue;
                ++used;
                const std::size_t pts = values->size() * a.n_T.size();
                closed_form += pts;
                os << "  savings_" << name << ".csv: " << values->size() << " values x " << a.n_T.size()
                   << " n_T = " << pts << " points\n";
            }
            for (double h : a.hours) {
                if (h < 0.0) warnings.push_back("hours = " + num(h) + " is negative");
            }
            for (double m : a.m) {
                if (m < 0.0 || m > 1.0) warnings.push_back("misalignment " + num(m) + " outside [0, 1]");
            }
            for (double r : a.dim_ratio) {
                if (!(r > 0.0 && r < 1.0)) warnings.push_back("dim_ratio " + num(r) + " outside (0, 1)");
            }
            if (used == 0) warnings.push_back("no panel axis (hours, n_B, m, snr_ratio, dim_ratio) given: zero points");
            break;
        }
        case ExperimentKind::robustness_sweep: {
            const auto& a = cfg.robustness;
            detail::warn_empty(warnings, "tau", a.tau);
            detail::warn_empty(warnings, "n_T", a.n_T);
            detail::warn_n_t(warnings, a.n_T, d_x);
            for (double t : a.tau) {
                if (t < 0.0 || t > 1.0) warnings.push_back("tau " + num(t) + " outside [0, 1]");
            }
            const std::size_t nb = a.n_B.size() + a.hours.size() + ((a.n_B.empty() && a.hours.empty()) ? 1 : 0);
            const std::size_t pts = nb * a.n_T.size() * a.tau.size() * 2;
            closed_form += pts;
            os << "  robustness.csv: " << nb << " n_B x " << a.n_T.size() << " n_T x " << a.tau.size()
               << " tau x 2 sources = " << pts << " rows\n";
            break;
        }
        case ExperimentKind::budget_sweep: {
            const auto& a = cfg.budget;
            detail::warn_empty(warnings, "cost_ratio", a.cost_ratio);
            detail::warn_empty(warnings, "budget", a.budget);
            const std::size_t pts = a.cost_ratio.size() * a.budget.size() * a.methods.size();
            os << "  budget.csv: " << a.cost_ratio.size() << " cost ratios x " << a.budget.size() << " budgets x "
               << a.methods.size() << " methods = " << pts << " rows\n";
            const bool grid = std::find(a.methods.begin(), a.methods.end(), "grid") != a.methods.end();
            const std::size_t evals = grid ? a.cost_ratio.size() * a.budget.size() * (a.grid_points + 12) : 0;
            if (a.risk_source == "empirical") {
                trials += static_cast<double>(evals) * mc_per_point;
            } else {
                closed_form += evals;
            }
            closed_form += pts;
            for (double b : a.budget) {
                if (b < a.c_T * (static_cast<double>(d_x) + 2.0)) {
                    warnings.push_back("budget " + num(b) + " cannot buy d_x + 2 task samples");
                }
            }
            break;
        }
        case ExperimentKind::lambda_curve: {
            const auto& a = cfg.lambda;
            detail::warn_empty(warnings, "n_T", a.n_T);
            detail::warn_n_t(warnings, a.n_T, d_x);
            os << "  lambda_curve.csv: " << a.n_T.size() << " n_T x " << a.lambda_points << " lambdas\n";
            os << "  lambda_schedule.csv: " << a.n_T.size() << " rows\n";
            trials += static_cast<double>(a.n_T.size()) * mc_per_point;
            break;
        }
        case ExperimentKind::validate_empirical: {
            const auto& a = cfg.validate;
            detail::warn_empty(warnings, "n_T", a.n_T);
            detail::warn_n_t(warnings, a.n_T, d_x);
            os << "  validate_risk.csv: " << a.n_T.size() << " n_T x " << a.policies.size() << " policies\n";
            os << "  validate_value.csv: " << a.n_T.size() << " rows\n";
            trials += static_cast<double>(a.n_T.size() * a.policies.size()) * mc_per_point;
            break;
        }
    }
    os << "estimated cost: " << closed_form << " closed-form evaluations";
    if (trials > 0.0) {
        os << ", " << num(trials) << " Monte Carlo trials (" << cfg.mc.trials << " x " << cfg.mc.replicates
           << " per point, seed " << cfg.mc.seed << ")";
    }
    os << '\n';
    if (cfg.model.preset == "fmri" || d_x >= 1024) {
        os << "note: building a d_x=" << d_x << " model takes about a second per distinct model\n";
    }
    os << "output: " << cfg.output << '\n';
    if (warnings.empty()) {
        os << "warnings: none\n";
    } else {
        os << "warnings:\n";
        for (const auto& w : warnings) os << "  - " << w << '\n';
    }
    return os.str();
}

}  // namespace brainval::exp
