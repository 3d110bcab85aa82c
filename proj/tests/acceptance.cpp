// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "afscale/afscale.hpp"
#include "afscale/cli.hpp"

using namespace afscale;

namespace {

const NetworkParams kP0 = NetworkParams::p0();

class Criterion {
public:
    explicit Criterion(std::string name) : name_(std::move(name)) {}

    void check(bool ok, const char* fmt, auto... args) {
        char buf[512];
        std::snprintf(buf, sizeof buf, fmt, args...);
        std::printf("    [%s] %s\n", ok ? "ok" : "FAIL", buf);
        ok_ = ok_ && ok;
    }

    bool ok() const { return ok_; }
    const std::string& name() const { return name_; }

private:
    std::string name_;
    bool ok_ = true;
};

DistortionEstimate mc(Scheme s, std::uint64_t m, std::uint64_t trials, std::uint64_t seed,
                      std::optional<double> threshold = std::nullopt) {
    const auto policy = s == Scheme::Diversity ? PowerPolicy::constant(PolicyKind::ConstantDiversity)
                        : s == Scheme::Aloha   ? PowerPolicy::constant(PolicyKind::ConstantAloha)
                                               : PowerPolicy::constant(PolicyKind::ConstantSqrtM);
    return estimate_expected_distortion({s, threshold}, kP0.with_sensors(m), policy, trials, RngSeed{seed});
}

const std::uint64_t kFigureGrid[] = {2, 5, 10, 50, 100, 500, 1000};

void fixed_point_constants(Criterion& c) {
    const double div = asymptotic_diversity(kP0, 2).limit_value;
    const double orth = asymptotic_orthogonal(kP0, 2).limit_value;
    const double aloha = asymptotic_aloha(kP0, 2).limit_value;
    c.check(std::abs(div - 0.1667) < 5e-5, "diversity limit %.6f rounds to 0.1667", div);
    c.check(std::abs(orth - 0.1667) < 5e-5, "orthogonal limit %.6f rounds to 0.1667", orth);
    c.check(std::abs(aloha - 0.6934) < 5e-5, "ALOHA limit %.6f rounds to 0.6934", aloha);
    const double target = std::sqrt(std::numbers::pi / 8);
    const double closed = GainMoments::exponential(kP0.lambda).mean_sqrt;
    const double lambda = kP0.lambda;
    const double integrated =
        integrate_upper_tail([&](double x) { return std::sqrt(x) * lambda * std::exp(-lambda * x); }, 0.0, {1e-14});
    c.check(std::abs(closed - target) <= 1e-12, "E[sqrt g] closed form %.15f vs sqrt(pi/8) %.15f", closed, target);
    c.check(std::abs(integrated - target) <= 1e-12, "E[sqrt g] by quadrature %.15f (|diff| %.2e)", integrated,
            std::abs(integrated - target));
}

void diversity_figure(Criterion& c) {
    for (const auto m : kFigureGrid) {
        const auto e = mc(Scheme::Diversity, m, 100000, 100 + m);
        const double oracle = quadrature_expected_distortion_diversity(kP0.with_sensors(m), m);
        c.check(std::abs(e.mean - oracle) <= 3 * e.std_error, "M=%llu MC %.6f vs quadrature %.6f (%.2f stderr)",
                (unsigned long long)m, e.mean, oracle, std::abs(e.mean - oracle) / e.std_error);
    }
    auto gap = [&](std::uint64_t m, std::uint64_t trials) {
        const auto e = mc(Scheme::Diversity, m, trials, 7 * m + 1);
        const double law = asymptotic_diversity(kP0, m).value;
        return std::abs(e.mean - law) / law;
    };
    const double g3 = gap(1000, 100000), g6 = gap(1000000, 1000000);
    c.check(g6 < g3, "relative gap to the asymptotic curve: M=1e3 %.4f, M=1e6 %.4f", g3, g6);
}

void aloha_figure(Criterion& c) {
    for (const auto m : kFigureGrid) {
        const double t = default_threshold(kP0.lambda, m);
        const auto e = mc(Scheme::Aloha, m, 100000, 200 + m);
        const double oracle = quadrature_expected_distortion_aloha(kP0.with_sensors(m), m, t);
        c.check(std::abs(e.mean - oracle) <= 3 * e.std_error, "M=%llu MC %.6f vs closed form %.6f (%.2f stderr)",
                (unsigned long long)m, e.mean, oracle, std::abs(e.mean - oracle) / e.std_error);
    }
}

void mac_figure(Criterion& c) {
    std::vector<double> rel;
    for (const std::uint64_t m : {10ull, 100ull, 1000ull}) {
        const auto e = mc(Scheme::Mac, m, 100000, 300 + m);
        const double law = asymptotic_mac(kP0, m).value;
        rel.push_back(std::abs(e.mean - law) / law);
        std::printf("    M=%llu MC %.7f asymptotic %.7f relative error %.4f\n", (unsigned long long)m, e.mean, law,
                    rel.back());
    }
    c.check(rel[2] < 0.05, "relative error at M=1000 %.4f < 0.05", rel[2]);
    c.check(rel[2] < rel[0], "relative error improves from M=10 (%.4f) to M=1000 (%.4f)", rel[0], rel[2]);
}

void orthogonal_figure(Criterion& c) {
    const double limit = asymptotic_orthogonal(kP0, 1).limit_value;
    std::vector<double> rel, scaled;
    for (const std::uint64_t m : {10ull, 100ull, 1000ull}) {
        const auto e = mc(Scheme::Orthogonal, m, 100000, 400 + m);
        const double law = asymptotic_orthogonal(kP0, m).value;
        rel.push_back(std::abs(e.mean - law) / law);
        scaled.push_back((e.mean - limit) * double(m));
        std::printf("    M=%llu MC %.7f asymptotic %.7f relative error %.2e (E-L)*M %.4f\n", (unsigned long long)m,
                    e.mean, law, rel.back(), scaled.back());
    }
    c.check(rel[0] > rel[1] && rel[1] > rel[2], "relative error decreasing: %.2e, %.2e, %.2e", rel[0], rel[1],
            rel[2]);
    const auto [lo, hi] = std::minmax({scaled[0], scaled[1], scaled[2]});
    c.check(lo > 0 && hi / lo <= 1.3, "(E-L)*M within 30%%: min %.4f max %.4f", lo, hi);
}

void inverse_moment(Criterion& c) {
    const double lambda = 2.0, b = 1.0 / 12.0;
    double prev = HUGE_VAL;
    for (double m : {1e2, 1e3, 1e4, 1e5, 1e6}) {
        const double r = gmax_inverse_moment_quadrature(lambda, b, std::uint64_t(m)) * (lambda * b + std::log(m)) / lambda;
        c.check(std::abs(r - 1) < prev, "M=%.0e |r-1| = %.5f", m, std::abs(r - 1));
        prev = std::abs(r - 1);
    }
    double worst = 0.0;
    for (std::uint64_t m = 1; m <= kExactSumMaxSensors; ++m) {
        worst = std::max(worst, std::abs(gmax_inverse_moment_exact_sum(lambda, b, m) -
                                         gmax_inverse_moment_quadrature(lambda, b, m)));
    }
    c.check(worst <= 1e-8, "alternating sum vs quadrature, M <= 15: max |diff| %.2e", worst);
}

void water_filling(Criterion& c) {
    double prev_div = HUGE_VAL, prev_aloha = HUGE_VAL;
    for (const std::uint64_t m : {10ull, 100ull, 1000ull}) {
        const auto p = kP0.with_sensors(m);
        const auto d = solve_nu_diversity(p, m, 1.0);
        const double t = default_threshold(p.lambda, m);
        const auto a = solve_nu_aloha(p, m, t, 1.0 / double(m));
        c.check(d.relative_residual <= 1e-8 && a.relative_residual <= 1e-8,
                "M=%llu power residual: diversity %.1e, ALOHA %.1e", (unsigned long long)m, d.relative_residual,
                a.relative_residual);
        const double dc = quadrature_expected_distortion_diversity(p, m, 1.0);
        const double ac = quadrature_expected_distortion_aloha(p, m, t, 1.0);
        c.check(d.expected_distortion < dc && a.expected_distortion < ac,
                "M=%llu optimal < constant: diversity %.6f < %.6f, ALOHA %.6f < %.6f", (unsigned long long)m,
                d.expected_distortion, dc, a.expected_distortion, ac);
        c.check(dc - d.expected_distortion < prev_div && ac - a.expected_distortion < prev_aloha,
                "M=%llu gap shrinks: diversity %.2e, ALOHA %.2e", (unsigned long long)m, dc - d.expected_distortion,
                ac - a.expected_distortion);
        prev_div = dc - d.expected_distortion;
        prev_aloha = ac - a.expected_distortion;
    }
}

void nu_asymptotics(Criterion& c) {
    double prev = HUGE_VAL;
    for (double m : {1e3, 1e4, 1e5, 1e6}) {
        const auto mm = std::uint64_t(m);
        const double nu = solve_nu_diversity(kP0.with_sensors(mm), mm, 1.0).nu;
        const double dev = std::abs(nu * std::log(m) / kP0.lambda - 1);
        c.check(dev < prev, "M=%.0e nu=%.6e |nu ln M / lambda - 1| = %.4f", m, nu, dev);
        prev = dev;
    }
    const double b = DerivedConstants::from(kP0).b_shift;
    bool all = true;
    double min_margin = HUGE_VAL;
    for (std::uint64_t m = 10; m <= 1000000; m = m < 100 ? m + 1 : m * 10 / 9 + 1) {
        const double t = default_threshold(kP0.lambda, m);
        const double nu = solve_nu_aloha(kP0.with_sensors(m), m, t, 1.0 / double(m)).nu;
        all = all && t > b * b * nu;
        min_margin = std::min(min_margin, t - b * b * nu);
    }
    c.check(all, "T_default > b^2 nu for M in [10, 1e6]; smallest margin %.4f", min_margin);
}

void threshold_optimality(Criterion& c) {
    for (const std::uint64_t m : {10ull, 100ull, 1000ull, 10000ull}) {
        const auto s = optimize_threshold_constant_power(kP0.with_sensors(m), m);
        const double def = expected_distortion_aloha_threshold(kP0, m, default_threshold(kP0.lambda, m));
        c.check(s.expected_distortion <= def, "M=%llu E[D](T*) %.6f <= E[D](ln M/lambda) %.6f (T*=%.4f)",
                (unsigned long long)m, s.expected_distortion, def, s.t_star);
    }
    double prev = HUGE_VAL;
    for (double m : {1e2, 1e3, 1e4}) {
        const double dev =
            std::abs(optimize_threshold_constant_power(kP0, std::uint64_t(m)).t_star * kP0.lambda / std::log(m) - 1);
        c.check(dev < prev, "M=%.0e |T* lambda / ln M - 1| = %.4f", m, dev);
        prev = dev;
    }
    for (const std::uint64_t m : {10ull, 100ull, 1000ull}) {
        const double joint = optimize_threshold_joint(kP0, m, 1.0).expected_distortion;
        const double power_only = expected_distortion_aloha_optimal(kP0, m, default_threshold(kP0.lambda, m), 1.0);
        const double threshold_only = optimize_threshold_constant_power(kP0, m).expected_distortion;
        c.check(joint <= power_only && joint <= threshold_only,
                "M=%llu joint %.6f <= power-only %.6f, threshold-only %.6f", (unsigned long long)m, joint, power_only,
                threshold_only);
    }
    // epsilon reaches zero once E[D](T*) sits inside the bracket, so the trend is non-increasing.
    double prev_eps = HUGE_VAL, first_eps = 0.0, last_eps = 0.0;
    bool first = true;
    for (const std::uint64_t m : {10ull, 100ull, 1000ull, 10000ull}) {
        const auto s = optimize_threshold_constant_power(kP0, m);
        const auto r = threshold_sandwich(kP0, m, s.expected_distortion);
        const bool inside = r.lower_limit - 1e-4 <= s.expected_distortion * (1 + r.epsilon) &&
                            s.expected_distortion <= r.upper * (1 + r.epsilon);
        c.check(inside && r.epsilon <= prev_eps, "M=%llu %.4f <= E[D](T*) (1 + eps), E[D](T*) %.6f <= %.6f (1 + eps), eps=%.2e",
                (unsigned long long)m, r.lower_limit, s.expected_distortion, r.upper, r.epsilon);
        if (first) first_eps = r.epsilon, first = false;
        last_eps = r.epsilon;
        prev_eps = r.epsilon;
    }
    c.check(last_eps < first_eps, "eps tightens from %.2e to %.2e", first_eps, last_eps);
}

void determinism(Criterion& c) {
    for (const char* scheme : {"diversity", "aloha", "mac", "orthogonal"}) {
        auto run = [&](const char* threads) {
            std::ostringstream out, err;
            const int status = cli::main_entry({"simulate", "--scheme", scheme, "--m-list", "3,30,300", "--trials",
                                                "20000", "--seed", "2024", "--threads", threads},
                                               out, err);
            return status == 0 ? out.str() : "error: " + err.str();
        };
        const auto ref = run("1");
        const bool same = ref == run("1") && ref == run("2") && ref == run("5") && ref == run("16");
        c.check(same && ref.rfind("scheme,", 0) == 0, "%s: CSV byte-identical for 1, 2, 5, 16 workers (%zu bytes)",
                scheme, ref.size());
    }
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void(Criterion&)>>> criteria{
        {"fixed-point constants", fixed_point_constants},
        {"diversity: simulation vs quadrature and asymptotic convergence", diversity_figure},
        {"ALOHA: simulation vs closed form", aloha_figure},
        {"MAC: simulation vs asymptotic", mac_figure},
        {"orthogonal: simulation vs asymptotic and 1/M approach", orthogonal_figure},
        {"inverse moment of the maximum gain", inverse_moment},
        {"water-filling constraint, dominance and gap", water_filling},
        {"multiplier asymptotics and cutoff ordering", nu_asymptotics},
        {"threshold optimality and sandwich", threshold_optimality},
        {"simulate determinism across worker counts", determinism},
    };
    int failed = 0;
    std::vector<std::string> summary;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Criterion c(criteria[i].first);
        std::printf("criterion %zu: %s\n", i + 1, c.name().c_str());
        const auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].second(c);
        } catch (const std::exception& e) {
            c.check(false, "exception: %s", e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        char line[256];
        std::snprintf(line, sizeof line, "%s criterion %zu: %s (%.1f s)", c.ok() ? "PASS" : "FAIL", i + 1,
                      c.name().c_str(), secs);
        std::printf("%s\n", line);
        std::fflush(stdout);
        summary.push_back(line);
        failed += !c.ok();
    }
    std::printf("\n");
    for (const auto& s : summary) std::printf("%s\n", s.c_str());
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
