#pragma once

// Command-line experiment runner. Parameters resolve as flags > config file > defaults;
// commands produce ResultRow tables written as CSV.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "afscale/analysis.hpp"
#include "afscale/errors.hpp"
#include "afscale/model.hpp"
#include "afscale/montecarlo.hpp"
#include "afscale/optimizer.hpp"
#include "afscale/report.hpp"

namespace afscale::cli {

enum class Command { Simulate, Asymptotic, Exact, OptimizePower, OptimizeThreshold, Bounds, Reproduce };
enum class PowerMode { Constant, Optimal };
enum class ThresholdMode { Default, Optimal, Value };

inline constexpr std::uint64_t kFigureGrid[] = {2, 5, 10, 20, 50, 100, 200, 500, 1000};

struct ExperimentSpec {
    Command command = Command::Simulate;
    NetworkParams params;
    Scheme scheme = Scheme::Diversity;
    PowerMode power = PowerMode::Constant;
    double budget = 1.0;  ///< normalized P / (sigma_theta2 + sigma_v2)
    ThresholdMode threshold_mode = ThresholdMode::Default;
    double threshold_value = 0.0;
    std::vector<std::uint64_t> m_list;
    std::uint64_t trials = kDefaultTrials;
    RngSeed seed{1};
    int figure = 0;
    std::string out;  ///< empty: standard output
    unsigned threads = 0;
    std::optional<AsymmetricRanges> ranges;
    BoundKind bound_kind = BoundKind::Both;
};

/// Bad flags or an inconsistent request; maps to exit status 2.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

using Settings = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// key = value lines; '#' starts a comment. Keys use underscores.
inline Settings read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    Settings s;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(n) + ": expected key = value");
        auto key = trim(line.substr(0, eq));
        std::replace(key.begin(), key.end(), '-', '_');
        s[key] = trim(line.substr(eq + 1));
    }
    return s;
}

inline double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw UsageError(key + ": not a number: '" + v + "'");
    return d;
}

inline std::uint64_t to_count(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    unsigned long long n = 0;
    try {
        n = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || v.front() == '-') throw UsageError(key + ": not a count: '" + v + "'");
    return n;
}

inline std::vector<std::uint64_t> to_m_list(const std::string& v) {
    std::vector<std::uint64_t> ms;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) ms.push_back(to_count("m_list", trim(item)));
    if (ms.empty()) throw UsageError("m_list: empty");
    for (std::size_t i = 0; i < ms.size(); ++i) {
        if (ms[i] < 1) throw UsageError("m_list: sensor counts must be >= 1");
        if (i > 0 && ms[i] <= ms[i - 1]) throw UsageError("m_list: must be strictly increasing");
    }
    return ms;
}

inline Command to_command(const std::string& s) {
    static const std::map<std::string, Command> names{
        {"simulate", Command::Simulate},       {"asymptotic", Command::Asymptotic},
        {"exact", Command::Exact},             {"optimize-power", Command::OptimizePower},
        {"optimize-threshold", Command::OptimizeThreshold}, {"bounds", Command::Bounds},
        {"reproduce", Command::Reproduce}};
    const auto it = names.find(s);
    if (it == names.end()) throw UsageError("unknown command '" + s + "'");
    return it->second;
}

// Resolved settings -> spec. Every key is optional; unknown keys are rejected.
inline ExperimentSpec build_spec(Command command, const Settings& s) {
    static const char* known[] = {"scheme", "m_list", "M", "trials", "seed", "sigma_theta2", "sigma_v2",
                                  "sigma_n2", "lambda", "power", "budget", "power_budget", "threshold", "figure",
                                  "out", "threads", "sigma_min2", "sigma_max2", "mu_min", "mu_max"};
    for (const auto& [k, v] : s) {
        if (std::find_if(std::begin(known), std::end(known), [&](const char* n) { return k == n; }) == std::end(known)) {
            throw UsageError("unknown setting '" + k + "'");
        }
    }
    auto get = [&](const char* k) -> std::optional<std::string> {
        const auto it = s.find(k);
        return it == s.end() ? std::nullopt : std::optional<std::string>(it->second);
    };

    ExperimentSpec spec;
    spec.command = command;
    auto& p = spec.params;
    if (auto v = get("sigma_theta2")) p.sigma_theta2 = to_double("sigma_theta2", *v);
    if (auto v = get("sigma_v2")) p.sigma_v2 = to_double("sigma_v2", *v);
    if (auto v = get("sigma_n2")) p.sigma_n2 = to_double("sigma_n2", *v);
    if (auto v = get("lambda")) p.lambda = to_double("lambda", *v);
    if (auto v = get("budget")) {
        spec.budget = to_double("budget", *v);
    } else if (auto raw = get("power_budget")) {
        spec.budget = to_double("power_budget", *raw) / (p.sigma_theta2 + p.sigma_v2);
    }
    if (!(spec.budget > 0.0)) throw UsageError("budget must be > 0");
    p.power_budget = spec.budget * (p.sigma_theta2 + p.sigma_v2);
    try {
        p.validate();
    } catch (const ParameterError& e) {
        throw UsageError(e.what());
    }

    if (auto v = get("scheme")) {
        const auto sc = parse_scheme(*v);
        if (!sc) throw UsageError("unknown scheme '" + *v + "'");
        spec.scheme = *sc;
    }
    if (auto v = get("m_list")) {
        spec.m_list = to_m_list(*v);
    } else if (auto m = get("M")) {
        spec.m_list = to_m_list(*m);
    }
    if (auto v = get("trials")) spec.trials = to_count("trials", *v);
    if (auto v = get("seed")) spec.seed = RngSeed{to_count("seed", *v)};
    if (auto v = get("threads")) spec.threads = unsigned(to_count("threads", *v));
    if (auto v = get("out")) spec.out = *v;
    if (auto v = get("power")) {
        if (*v == "constant") spec.power = PowerMode::Constant;
        else if (*v == "optimal") spec.power = PowerMode::Optimal;
        else throw UsageError("power must be constant or optimal");
    }
    if (auto v = get("threshold")) {
        if (*v == "default") {
            spec.threshold_mode = ThresholdMode::Default;
        } else if (*v == "optimal") {
            spec.threshold_mode = ThresholdMode::Optimal;
        } else {
            spec.threshold_mode = ThresholdMode::Value;
            spec.threshold_value = to_double("threshold", *v);
            if (!(spec.threshold_value >= 0.0)) throw UsageError("threshold must be >= 0");
        }
    }
    if (auto v = get("figure")) spec.figure = int(to_count("figure", *v));

    const auto smin = get("sigma_min2"), smax = get("sigma_max2"), mmin = get("mu_min"), mmax = get("mu_max");
    if (smin || smax || mmin || mmax) {
        if (bool(smin) != bool(smax) || bool(mmin) != bool(mmax)) {
            throw UsageError("ranges need both ends: sigma_min2/sigma_max2, mu_min/mu_max");
        }
        const bool sig = bool(smin), mu = bool(mmin);
        AsymmetricRanges r{p.sigma_v2, p.sigma_v2, 1.0 / p.lambda, 1.0 / p.lambda};
        if (sig) r.sigma_min2 = to_double("sigma_min2", *smin), r.sigma_max2 = to_double("sigma_max2", *smax);
        if (mu) r.mu_min = to_double("mu_min", *mmin), r.mu_max = to_double("mu_max", *mmax);
        spec.ranges = r;
        spec.bound_kind = sig && mu ? BoundKind::Both : sig ? BoundKind::NoiseVariance : BoundKind::FadingScale;
    }

    // Command-specific checks.
    if (command == Command::Reproduce) {
        if (spec.figure < 1 || spec.figure > 8) throw UsageError("reproduce: --figure must be in 1..8");
        if (spec.m_list.empty()) spec.m_list.assign(std::begin(kFigureGrid), std::end(kFigureGrid));
    } else if (spec.m_list.empty()) {
        throw UsageError("--m-list is required");
    }
    if ((command == Command::Simulate || command == Command::Reproduce) && spec.trials < kMinTrials) {
        throw UsageError("trials must be >= 100");
    }
    if (command == Command::Bounds && !spec.ranges) {
        throw UsageError("bounds: give --sigma-min2/--sigma-max2 and/or --mu-min/--mu-max");
    }
    return spec;
}

}  // namespace detail

/// Parses `afscale <command> [flags]`. Returns nullopt when help was printed.
inline std::optional<ExperimentSpec> parse_args(const std::vector<std::string>& args, std::ostream& out = std::cout) {
    CLI::App app{"Expected-distortion scaling experiments for amplify-and-forward sensor networks", "afscale"};
    app.require_subcommand(1);
    std::map<std::string, std::string> flags;
    std::string config;

    auto add_common = [&](CLI::App* sub) {
        auto opt = [&](const std::string& name, const std::string& key, const std::string& help) {
            sub->add_option_function<std::string>(name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
        };
        opt("--scheme", "scheme", "diversity | aloha | mac | orthogonal");
        opt("--m-list", "m_list", "comma-separated, strictly increasing sensor counts");
        opt("--trials", "trials", "Monte Carlo trials per M (>= 100)");
        opt("--seed", "seed", "64-bit experiment seed");
        opt("--sigma-theta2", "sigma_theta2", "source variance");
        opt("--sigma-v2", "sigma_v2", "sensor noise variance");
        opt("--sigma-n2", "sigma_n2", "receiver noise variance");
        opt("--lambda", "lambda", "fading rate (gains have mean 1/lambda)");
        opt("--power", "power", "constant | optimal");
        opt("--budget", "budget", "normalized power budget P/(sigma_theta2+sigma_v2)");
        opt("--threshold", "threshold", "ALOHA threshold: default | optimal | <value>");
        opt("--figure", "figure", "figure number 1..8 (reproduce)");
        opt("--out", "out", "output CSV path (default: stdout)");
        opt("--threads", "threads", "Monte Carlo worker threads (0: all cores)");
        opt("--sigma-min2", "sigma_min2", "lower sensor noise variance (bounds)");
        opt("--sigma-max2", "sigma_max2", "upper sensor noise variance (bounds)");
        opt("--mu-min", "mu_min", "smallest fading scale (bounds)");
        opt("--mu-max", "mu_max", "largest fading scale (bounds)");
        sub->add_option("--config", config, "key = value settings file; flags take precedence");
    };
    for (const char* name : {"simulate", "asymptotic", "exact", "optimize-power", "optimize-threshold", "bounds",
                             "reproduce"}) {
        add_common(app.add_subcommand(name));
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return std::nullopt;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    const auto* sub = app.get_subcommands().front();
    detail::Settings settings = config.empty() ? detail::Settings{} : detail::read_config(config);
    for (const auto& [k, v] : flags) settings[k] = v;
    if (flags.count("m_list")) settings.erase("M");
    return detail::build_spec(detail::to_command(sub->get_name()), settings);
}

// ---------------------------------------------------------------------------
// Execution

namespace detail {

inline std::string policy_label(PowerMode power, bool optimal_threshold) {
    std::string s = power == PowerMode::Constant ? "constant" : "optimal";
    if (optimal_threshold) s += "/t-opt";
    return s;
}

class Runner {
public:
    explicit Runner(const ExperimentSpec& spec) : spec_(spec) {}

    std::vector<ResultRow> rows;

    void add(Scheme s, std::uint64_t m, const std::string& policy, std::optional<double> t, Quantity q, double v) {
        rows.push_back({std::string(to_string(s)), m, policy, t, q, v});
    }

    NetworkParams params(std::uint64_t m) const { return spec_.params.with_sensors(m); }

    // The asymptotic laws take a unit normalized budget; distortion depends on alpha^2 / sigma_n2 only,
    // so a budget B is equivalent to receiver noise sigma_n2 / B.
    NetworkParams unit_budget_params(std::uint64_t m) const {
        auto p = params(m);
        p.sigma_n2 /= spec_.budget;
        p.power_budget = p.sigma_theta2 + p.sigma_v2;
        return p;
    }

    void require_power_scheme(Scheme s) const {
        if (s == Scheme::Mac || s == Scheme::Orthogonal) {
            throw UsageError("optimal power and thresholds are defined only for diversity and aloha");
        }
    }

    void require_m(Scheme s, std::uint64_t m, const char* what) const {
        if ((s == Scheme::Diversity || s == Scheme::Aloha) && m < 2) {
            throw UsageError(std::string(what) + ": needs M >= 2 for " + std::string(to_string(s)));
        }
    }

    // Resolved ALOHA operating point: threshold, and nu when power is water-filled.
    struct AlohaPoint {
        double threshold;
        std::optional<WaterFillSolution> wf;
        double expected_distortion;
    };

    AlohaPoint aloha_point(std::uint64_t m, PowerMode power, ThresholdMode mode, double value) const {
        const auto p = params(m);
        const double per_sensor = spec_.budget / double(m);
        if (mode == ThresholdMode::Optimal) {
            require_m(Scheme::Aloha, m, "optimal threshold");
            if (power == PowerMode::Constant) {
                const auto s = optimize_threshold_constant_power(p, m, spec_.budget);
                return {s.t_star, std::nullopt, s.expected_distortion};
            }
            const auto s = optimize_threshold_joint(p, m, spec_.budget);
            return {s.t_star, s.joint, s.expected_distortion};
        }
        const double t = mode == ThresholdMode::Value ? value : default_threshold(p.lambda, m);
        if (power == PowerMode::Constant) return {t, std::nullopt, expected_distortion_aloha_threshold(p, m, t, spec_.budget)};
        const auto wf = solve_nu_aloha(p, m, t, per_sensor);
        return {t, wf, wf.expected_distortion};
    }

    void simulate(Scheme s, std::uint64_t m, PowerMode power, ThresholdMode mode, RngSeed seed) {
        const auto p = params(m);
        const bool topt = mode == ThresholdMode::Optimal;
        const auto label = policy_label(power, topt && s == Scheme::Aloha);
        SchemeConfig cfg{s, std::nullopt};
        PowerPolicy policy;
        std::optional<double> t;
        switch (s) {
            case Scheme::Diversity:
                policy = power == PowerMode::Constant
                             ? PowerPolicy::constant(PolicyKind::ConstantDiversity, spec_.budget)
                             : PowerPolicy::water_filling(solve_nu_diversity(p, m, spec_.budget).nu);
                break;
            case Scheme::Aloha: {
                const auto pt = aloha_point(m, power, mode, spec_.threshold_value);
                t = pt.threshold;
                cfg.threshold = pt.threshold;
                policy = pt.wf ? PowerPolicy::water_filling(pt.wf->nu)
                               : PowerPolicy::constant(PolicyKind::ConstantThresholdNormalized, spec_.budget);
                break;
            }
            case Scheme::Mac:
            case Scheme::Orthogonal:
                if (power == PowerMode::Optimal) require_power_scheme(s);
                policy = PowerPolicy::constant(PolicyKind::ConstantSqrtM, spec_.budget);
                break;
        }
        const auto est = estimate_expected_distortion(cfg, p, policy, spec_.trials, seed, {spec_.threads});
        add(s, m, label, t, Quantity::McMean, est.mean);
        add(s, m, label, t, Quantity::McStderr, est.std_error);
    }

    void asymptotic(Scheme s, std::uint64_t m) {
        require_m(s, m, "asymptotic");
        const auto p = unit_budget_params(m);
        double v = 0.0;
        std::optional<double> t;
        switch (s) {
            case Scheme::Diversity: v = asymptotic_diversity(p, m).value; break;
            case Scheme::Aloha:
                v = asymptotic_aloha(p, m).value;
                t = default_threshold(p.lambda, m);
                break;
            case Scheme::Mac: v = asymptotic_mac(p, m).value; break;
            case Scheme::Orthogonal: v = asymptotic_orthogonal(p, m).value; break;
        }
        add(s, m, "constant", t, Quantity::Asymptotic, v);
    }

    // Finite-M expected distortion from the quadrature or closed-form oracles.
    void exact(Scheme s, std::uint64_t m, PowerMode power, ThresholdMode mode, bool with_nu) {
        if (s == Scheme::Mac || s == Scheme::Orthogonal) {
            throw UsageError("finite-M expectations are available for diversity and aloha only");
        }
        const auto p = params(m);
        const bool topt = mode == ThresholdMode::Optimal && s == Scheme::Aloha;
        const auto label = policy_label(power, topt);
        if (s == Scheme::Diversity) {
            if (power == PowerMode::Constant) {
                add(s, m, label, std::nullopt, Quantity::Quadrature,
                    quadrature_expected_distortion_diversity(p, m, spec_.budget));
            } else {
                const auto wf = solve_nu_diversity(p, m, spec_.budget);
                if (with_nu) add(s, m, label, std::nullopt, Quantity::Nu, wf.nu);
                add(s, m, label, std::nullopt, Quantity::Quadrature, wf.expected_distortion);
            }
            return;
        }
        const auto pt = aloha_point(m, power, mode, spec_.threshold_value);
        if (topt) add(s, m, label, pt.threshold, Quantity::TStar, pt.threshold);
        if (pt.wf && with_nu) add(s, m, label, pt.threshold, Quantity::Nu, pt.wf->nu);
        add(s, m, label, pt.threshold, Quantity::Quadrature, pt.expected_distortion);
    }

    void bounds(Scheme s, std::uint64_t m) {
        if (m < 2) throw UsageError("bounds: needs M >= 2");
        const auto b = asymptotic_bounds(s, unit_budget_params(m), *spec_.ranges, spec_.bound_kind, m);
        add(s, m, "constant", std::nullopt, Quantity::BoundLower, b.lower);
        add(s, m, "constant", std::nullopt, Quantity::BoundUpper, b.upper);
    }

private:
    const ExperimentSpec& spec_;
};

inline PlotSpec figure_plot(int n, const std::string& csv) {
    PlotSpec ps;
    ps.csv = csv;
    auto sim_vs_asym = [&](Scheme s, const char* title, bool with_exact) {
        const std::string name(to_string(s));
        ps.title = title;
        ps.series.push_back({"Simulation", name, "constant", Quantity::McMean, Quantity::McStderr});
        ps.series.push_back({"Asymptotic expression", name, "constant", Quantity::Asymptotic, std::nullopt});
        if (with_exact) ps.series.push_back({"Exact (quadrature)", name, "constant", Quantity::Quadrature, std::nullopt});
    };
    auto power_cmp = [&](Scheme s, const char* title) {
        const std::string name(to_string(s));
        ps.title = title;
        ps.series.push_back({"Constant power", name, "constant", Quantity::Quadrature, std::nullopt});
        ps.series.push_back({"Optimal power", name, "optimal", Quantity::Quadrature, std::nullopt});
        ps.series.push_back({"Constant power (simulation)", name, "constant", Quantity::McMean, Quantity::McStderr});
        ps.series.push_back({"Optimal power (simulation)", name, "optimal", Quantity::McMean, Quantity::McStderr});
    };
    switch (n) {
        case 1: sim_vs_asym(Scheme::Diversity, "Multi-sensor diversity: simulation vs asymptotic", true); break;
        case 2: sim_vs_asym(Scheme::Aloha, "Channel-aware ALOHA: simulation vs asymptotic", true); break;
        case 3: sim_vs_asym(Scheme::Mac, "Coherent multi-access: simulation vs asymptotic", false); break;
        case 4: sim_vs_asym(Scheme::Orthogonal, "Orthogonal access: simulation vs asymptotic", false); break;
        case 5: power_cmp(Scheme::Diversity, "Multi-sensor diversity: constant vs optimal power"); break;
        case 6: power_cmp(Scheme::Aloha, "Channel-aware ALOHA: constant vs optimal power"); break;
        case 7:
            ps.title = "Channel-aware ALOHA: simple and optimal thresholding";
            ps.series.push_back({"Threshold ln(M)/lambda", "aloha", "constant", Quantity::Quadrature, std::nullopt});
            ps.series.push_back({"Optimal threshold", "aloha", "constant/t-opt", Quantity::Quadrature, std::nullopt});
            ps.series.push_back({"Threshold ln(M)/lambda (simulation)", "aloha", "constant", Quantity::McMean,
                                 Quantity::McStderr});
            ps.series.push_back({"Optimal threshold (simulation)", "aloha", "constant/t-opt", Quantity::McMean,
                                 Quantity::McStderr});
            break;
        case 8:
            ps.title = "Channel-aware ALOHA: simple vs joint threshold and power";
            ps.series.push_back({"Constant power, threshold ln(M)/lambda", "aloha", "constant", Quantity::Quadrature,
                                 std::nullopt});
            ps.series.push_back({"Joint optimum", "aloha", "optimal/t-opt", Quantity::Quadrature, std::nullopt});
            ps.series.push_back({"Joint optimum (simulation)", "aloha", "optimal/t-opt", Quantity::McMean,
                                 Quantity::McStderr});
            break;
        default: break;
    }
    return ps;
}

}  // namespace detail

/// Evaluates the experiment; pure apart from Monte Carlo worker threads.
inline std::vector<ResultRow> execute(const ExperimentSpec& spec) {
    detail::Runner r(spec);
    const Scheme s = spec.scheme;
    for (const std::uint64_t m : spec.m_list) {
        const RngSeed seed = derive_seed(spec.seed, m);
        switch (spec.command) {
            case Command::Simulate: r.simulate(s, m, spec.power, spec.threshold_mode, seed); break;
            case Command::Asymptotic: r.asymptotic(s, m); break;
            case Command::Exact: r.exact(s, m, spec.power, spec.threshold_mode, false); break;
            case Command::OptimizePower:
                r.require_power_scheme(s);
                r.exact(s, m, PowerMode::Optimal, spec.threshold_mode, true);
                break;
            case Command::OptimizeThreshold:
                if (s != Scheme::Aloha) throw UsageError("optimize-threshold applies to the aloha scheme");
                r.exact(s, m, spec.power, ThresholdMode::Optimal, true);
                break;
            case Command::Bounds: r.bounds(s, m); break;
            case Command::Reproduce: {
                // Each series draws from its own stream so figures are independent of one another.
                auto series_seed = [&](std::uint64_t k) { return derive_seed(seed, k); };
                switch (spec.figure) {
                    case 1:
                    case 2:
                    case 3:
                    case 4: {
                        const Scheme fs = spec.figure == 1   ? Scheme::Diversity
                                          : spec.figure == 2 ? Scheme::Aloha
                                          : spec.figure == 3 ? Scheme::Mac
                                                             : Scheme::Orthogonal;
                        r.simulate(fs, m, PowerMode::Constant, ThresholdMode::Default, series_seed(0));
                        if (fs == Scheme::Mac || fs == Scheme::Orthogonal || m >= 2) r.asymptotic(fs, m);
                        if (fs == Scheme::Diversity || fs == Scheme::Aloha) {
                            r.exact(fs, m, PowerMode::Constant, ThresholdMode::Default, false);
                        }
                        break;
                    }
                    case 5:
                    case 6: {
                        const Scheme fs = spec.figure == 5 ? Scheme::Diversity : Scheme::Aloha;
                        r.exact(fs, m, PowerMode::Constant, ThresholdMode::Default, false);
                        r.exact(fs, m, PowerMode::Optimal, ThresholdMode::Default, true);
                        r.simulate(fs, m, PowerMode::Constant, ThresholdMode::Default, series_seed(0));
                        r.simulate(fs, m, PowerMode::Optimal, ThresholdMode::Default, series_seed(1));
                        break;
                    }
                    case 7:
                        r.exact(Scheme::Aloha, m, PowerMode::Constant, ThresholdMode::Default, false);
                        r.exact(Scheme::Aloha, m, PowerMode::Constant, ThresholdMode::Optimal, false);
                        r.simulate(Scheme::Aloha, m, PowerMode::Constant, ThresholdMode::Default, series_seed(0));
                        r.simulate(Scheme::Aloha, m, PowerMode::Constant, ThresholdMode::Optimal, series_seed(1));
                        break;
                    case 8:
                        r.exact(Scheme::Aloha, m, PowerMode::Constant, ThresholdMode::Default, false);
                        r.exact(Scheme::Aloha, m, PowerMode::Optimal, ThresholdMode::Optimal, true);
                        r.simulate(Scheme::Aloha, m, PowerMode::Optimal, ThresholdMode::Optimal, series_seed(1));
                        break;
                    default: throw UsageError("reproduce: --figure must be in 1..8");
                }
                break;
            }
        }
    }
    return std::move(r.rows);
}

/// Runs the experiment and writes CSV (plus a plot sidecar for `reproduce`).
/// Returns the process exit status: 0 success, 1 numerical failure, 2 usage error.
inline int run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
    try {
        const auto rows = execute(spec);
        const std::string csv = to_csv(rows);
        if (spec.out.empty()) {
            out << csv;
        } else {
            std::ofstream f(spec.out, std::ios::binary);
            if (!f) throw UsageError("cannot write '" + spec.out + "'");
            f << csv;
        }
        if (spec.command == Command::Reproduce) {
            const std::string csv_name =
                spec.out.empty() ? "figure" + std::to_string(spec.figure) + ".csv"
                                 : std::filesystem::path(spec.out).filename().string();
            const std::string sidecar =
                spec.out.empty() ? "figure" + std::to_string(spec.figure) + ".plot.json" : spec.out + ".plot.json";
            std::ofstream j(sidecar, std::ios::binary);
            if (!j) throw UsageError("cannot write '" + sidecar + "'");
            j << to_json(detail::figure_plot(spec.figure, csv_name)).dump(2) << '\n';
        }
        return 0;
    } catch (const UsageError& e) {
        err << "afscale: " << e.what() << '\n';
        return 2;
    } catch (const ParameterError& e) {
        err << "afscale: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "afscale: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "afscale: numerical failure: " << e.what() << " (residual " << e.residual() << ")\n";
        return 1;
    }
}

/// Full entry point: parse, run, map errors to exit codes.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::optional<ExperimentSpec> spec;
    try {
        spec = parse_args(args, out);
    } catch (const UsageError& e) {
        err << "afscale: " << e.what() << "\nRun 'afscale --help' for usage.\n";
        return 2;
    }
    if (!spec) return 0;
    return run(*spec, out, err);
}

}  // namespace afscale::cli
