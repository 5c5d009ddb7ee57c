// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion passes, or when the only failures are
// criteria listed with --expect-fail. Expected failures still print FAIL.

#include "oracles.hpp"

#include "rough_llg/experiments.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace rllg;
using namespace rllg::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

class Clock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

struct Context {
    fs::path configs;
    fs::path out;

    RunConfig config(const std::string& name) const { return load_config(configs / (name + ".json")); }

    RunResult run(const std::string& name) const { return run_experiment(config(name), out / name); }
};

const Check& find(const RunResult& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return c;
    throw std::runtime_error("missing check " + name);
}

std::string describe(const RunResult& r) {
    std::ostringstream os;
    for (std::size_t i = 0; i < r.checks.size(); ++i) {
        const auto& c = r.checks[i];
        os << (i ? ", " : "") << c.name << " " << fmt(c.value) << " " << c.relation;
    }
    return os.str();
}

Outcome driver_structure(const Context& ctx) {
    const Clock clock;
    const RunResult r = ctx.run("driver-check");
    const double secs = clock.seconds();
    return {r.passed() && secs < 30.0, describe(r) + ", runtime " + fmt(secs) + " s < 30"};
}

Outcome sphere_constraint(const Context& ctx) {
    const RunResult projected = ctx.run("simulate");
    const RunResult free = ctx.run("simulate-unprojected");
    const Check& a = find(projected, "sphere_constraint");
    const Check& b = find(free, "unprojected_norm_drift");
    return {a.passed && b.passed, "projected " + fmt(a.value) + " " + a.relation + ", unprojected " + fmt(b.value) +
                                      " " + b.relation};
}

Outcome stationary_map(const Context& ctx) {
    const Clock clock;
    const RunResult r = ctx.run("simulate-equator");
    const double secs = clock.seconds();
    return {r.passed() && secs < 10.0, describe(r) + ", runtime " + fmt(secs) + " s < 10"};
}

Outcome energy_dissipation(const Context& ctx) {
    const RunResult r = ctx.run("simulate-tilted");
    const RunConfig cfg = ctx.config("simulate-tilted");
    const Grid grid(cfg.n_space);
    const GridField u0 = cfg.u0.evaluate(grid);
    std::vector<std::pair<double, double>> points;
    bool ratios_ok = true;
    std::string ratios;
    for (int halvings = 0; halvings < 3; ++halvings) {
        const int steps = cfg.steps << halvings;
        const Trajectory traj = solve_deterministic(u0, TimeGrid(cfg.T, steps), cfg.solver);
        const DissipationReport rep = dissipation_check(traj);
        points.emplace_back(traj.grid.dt(), rep.max_defect);
        if (halvings > 0) {
            const double ratio = points[halvings - 1].second / points[halvings].second;
            ratios_ok = ratios_ok && ratio >= 3.2 && ratio <= 4.8;
            ratios += (halvings > 1 ? "/" : "") + fmt(ratio);
        }
    }
    const RateFit fit = fit_rate(points);
    return {r.passed() && ratios_ok, describe(r) + ", halving ratios " + ratios + " in [3.2, 4.8], fitted order " +
                                         fmt(fit.slope)};
}

Outcome rotation_oracle(const Context&) {
    const Grid grid(8);
    SolverOptions opts;
    opts.drift_enabled = false;
    const Vec3 exact(0.0, std::cos(1.0), -std::sin(1.0));
    std::vector<std::pair<double, double>> points;
    for (int steps : {1000, 2000, 4000}) {
        const TimeGrid tg(1.0, steps);
        const CameronMartinPath h = CameronMartinPath::from_function(tg, 3, [](double t) -> Eigen::VectorXd {
            return Eigen::VectorXd(t * Vec3::UnitX());
        });
        const SpaceRoughDriver d = lift_simple(std::vector<double>(grid.size(), 1.0), grid, piecewise_linear_lift(h));
        const Trajectory traj = solve(constant_field(grid, Vec3::UnitY()), d, opts);
        double err = 0.0;
        for (const auto& v : traj.states.back().values) err = std::max(err, (v - exact).norm());
        points.emplace_back(tg.dt(), err);
    }
    const RateFit fit = fit_rate(points);
    const double e0 = points[0].second;
    return {e0 <= 1e-4 && std::abs(fit.slope - 2.0) <= 0.3,
            "error at dt 1e-3 " + fmt(e0) + " <= 1e-4, slope " + fmt(fit.slope) + " in [1.7, 2.3]"};
}

Outcome wong_zakai(const Context& ctx) {
    const Clock clock;
    const RunResult r = ctx.run("wongzakai");
    const double secs = clock.seconds();
    return {r.passed() && secs < 300.0, describe(r) + ", runtime " + fmt(secs) + " s < 300"};
}

Outcome remainder(const Context& ctx) {
    const RunResult r = ctx.run("remainder");
    return {r.passed(), describe(r)};
}

Outcome apriori(const Context& ctx) {
    const RunConfig cfg = ctx.config("simulate");
    const Grid grid(cfg.n_space);
    const std::vector<double> g = cfg.g_profile.evaluate(grid);
    const GridField u0 = cfg.u0.evaluate(grid);
    double worst_change = 0.0, max_log_ratio = -HUGE_VAL;
    bool finite = true;
    for (int seed = 1; seed <= 10; ++seed) {
        const BMSample bm = sample_bm(seed, TimeGrid(cfg.T, 2 * cfg.steps), cfg.q);
        const SpaceRoughDriver fine = dilate(build_driver(g, grid, piecewise_linear_lift(bm)), cfg.noise_scale);
        const SpaceRoughDriver coarse = coarsen(fine, 2);
        const double omega = driver_omega(coarse, cfg.p, cfg.k);
        const AprioriReport a = apriori_report(solve(u0, coarse, cfg.solver), omega, cfg.k);
        const AprioriReport b = apriori_report(solve(u0, fine, cfg.solver), driver_omega(fine, cfg.p, cfg.k), cfg.k);
        const double qa = a.sup_H1 + a.diss, qb = b.sup_H1 + b.diss;
        finite = finite && std::isfinite(qa) && std::isfinite(qb) && std::isfinite(a.log_ratio);
        worst_change = std::max(worst_change, std::abs(qb - qa) / qa);
        max_log_ratio = std::max({max_log_ratio, a.log_ratio, b.log_ratio});
    }
    return {finite && worst_change < 0.1, "max relative change under dt/2 " + fmt(worst_change) +
                                              " < 0.1, max log ratio to exp(omega)||u0||^2 " +
                                              fmt(max_log_ratio) + " (constant exp of this)"};
}

Outcome small_noise(const Context& ctx) {
    const RunResult r = ctx.run("smallnoise");
    return {r.passed(), describe(r)};
}

Outcome oracles(const Context&) {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> N(0.0, 1.0);
    long cases = 0, mismatches = 0;
    for (int len = 2; len <= 12; ++len)
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> x(len);
            for (int i = 1; i < len; ++i) x[i] = x[i - 1] + N(rng);
            for (double p : {1.0, 2.0, 2.5, 3.0})
                for (int s = 0; s < len; ++s)
                    for (int t = s + 1; t < len; ++t, ++cases)
                        if (dp_pvar_power(x, p, s, t) != brute_pvar_power(x, p, s, t)) ++mismatches;
        }
    const ProductRuleDefects d = product_rule_defects(2024, 1000);
    const double worst = std::max({d.vector, d.product, d.general});

    const TimeGrid tg(1.0, 1024);
    auto rate = [&](Eigen::Vector3d v) {
        return cm_rate(CameronMartinPath::from_function(tg, 3, [v](double t) -> Eigen::VectorXd { return t * v; }));
    };
    const bool rates = rate(Eigen::Vector3d::Zero()) == 0.0 && rate(Eigen::Vector3d(1, 0, 0)) == 1.0 &&
                       rate(Eigen::Vector3d(1, 2, 0)) == 5.0;
    return {mismatches == 0 && worst <= 1e-12 && rates,
            "p-variation mismatches " + std::to_string(mismatches) + "/" + std::to_string(cases) +
                ", product rule defect " + fmt(worst) + " <= 1e-12, cm_rate exact " + (rates ? "yes" : "no")};
}

Outcome not_reproducible(const Context& ctx) {
    const RunResult sk = ctx.run("skeleton");
    const RunConfig cfg = ctx.config("wongzakai");
    const Grid grid(32);
    const std::vector<double> g = cfg.g_profile.evaluate(grid);
    const GridField u0 = cfg.u0.evaluate(grid);
    const BMSample bm = sample_bm(cfg.seed, TimeGrid(cfg.T, 1 << 10), cfg.q);
    bool solvable = true;
    for (int level = 0; level <= 10; ++level) {
        const Trajectory traj = solve(u0, build_driver(g, grid, dyadic_approx(bm, level).lift), cfg.solver);
        solvable = solvable && traj.states.back().all_finite();
    }
    return {sk.passed() && solvable,
            "LDP probabilities and the full support theorem are not estimated (stated, not reproducible at desk "
            "scale); substitutes: skeleton " +
                describe(sk) + ", dyadic drivers solvable at levels 0..10 " + (solvable ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance suite"};
    std::string configs = ROUGH_LLG_CONFIGS;
    std::string out = (fs::temp_directory_path() / "rough_llg_acceptance").string();
    std::vector<int> expect_fail, only;
    app.add_option("--configs", configs, "directory of experiment configs");
    app.add_option("--out", out, "scratch directory for experiment artifacts");
    app.add_option("--expect-fail", expect_fail, "criteria whose failure is documented");
    app.add_option("--only", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);

    const Context ctx{configs, out};
    fs::create_directories(ctx.out);
    const std::map<int, std::pair<std::string, Outcome (*)(const Context&)>> criteria{
        {1, {"driver structure", driver_structure}},
        {2, {"sphere constraint", sphere_constraint}},
        {3, {"stationary harmonic map", stationary_map}},
        {4, {"energy dissipation", energy_dissipation}},
        {5, {"rotation oracle", rotation_oracle}},
        {6, {"Wong-Zakai rate", wong_zakai}},
        {7, {"remainder scaling", remainder}},
        {8, {"a priori stability", apriori}},
        {9, {"small-noise convergence", small_noise}},
        {10, {"oracle equivalences", oracles}},
        {11, {"not reproducible at desk scale", not_reproducible}},
    };
    const std::set<int> expected(expect_fail.begin(), expect_fail.end());
    const std::set<int> selected(only.begin(), only.end());

    int unexpected = 0, failed = 0;
    for (const auto& [id, entry] : criteria) {
        if (!selected.empty() && !selected.count(id)) continue;
        Outcome o;
        try {
            o = entry.second(ctx);
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << id << " (" << entry.first << "): " << o.detail;
        if (!o.passed && expected.count(id)) std::cout << " [documented deviation]";
        if (o.passed && expected.count(id)) std::cout << " [listed as expected failure but passed]";
        std::cout << std::endl;
        if (!o.passed) {
            ++failed;
            if (!expected.count(id)) ++unexpected;
        }
    }
    std::cout << failed << " criteria failed, " << unexpected << " unexpectedly" << std::endl;
    return unexpected == 0 ? 0 : 1;
}
