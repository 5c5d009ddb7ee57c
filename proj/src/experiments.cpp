#include "rough_llg/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

#include <Eigen/Core>

namespace rllg {

namespace fs = std::filesystem;
using nlohmann::json;

bool RunResult::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

int thread_count() {
    const char* env = std::getenv("ROUGH_LLG_THREADS");
    if (env == nullptr || *env == '\0') return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) return 1;
    return static_cast<int>(std::min<long>(v, 256));
}

std::vector<std::vector<Vec3>> mode_profiles(const std::vector<double>& g, const Grid& grid, int q) {
    std::vector<std::vector<Vec3>> out(q, std::vector<Vec3>(grid.size()));
    for (int j = 0; j < q; ++j) {
        const int m = j / 3;
        for (int x = 0; x < grid.size(); ++x) {
            const double c = m == 0 ? 1.0 : std::cos(2.0 * std::numbers::pi * m * grid.node(x));
            out[j][x] = g[x] * c * Vec3::Unit(j % 3);
        }
    }
    return out;
}

SpaceRoughDriver build_driver(const std::vector<double>& g, const Grid& grid, const ModeRoughPath& rp) {
    if (rp.q() == 3) return lift_simple(g, grid, rp);
    return lift_multimode(mode_profiles(g, grid, rp.q()), grid, rp);
}

namespace {

// Runs fn(i) for i in [0, count) on the configured number of workers; results
// are stored by index so the output order never depends on scheduling.
template <class R, class F>
std::vector<R> parallel_map(int count, F&& fn) {
    std::vector<std::optional<R>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    const int workers = std::min(thread_count(), std::max(count, 1));
    auto work = [&](int w) {
        for (int i = w; i < count; i += workers) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<R> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

class Writer {
public:
    Writer(fs::path dir, RunResult& result) : dir_(std::move(dir)), result_(result) {}

    std::ofstream open(const std::string& name, bool binary = false) {
        std::ofstream os(dir_ / name, binary ? std::ios::binary : std::ios::out);
        if (!os) throw std::runtime_error("cannot write " + (dir_ / name).string());
        os << std::setprecision(17);
        result_.files.push_back(name);
        return os;
    }

    void table(const std::string& name, const std::string& header, const std::vector<std::vector<double>>& rows) {
        auto os = open(name);
        os << header << "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << "\n";
        }
    }

    void trajectory(const Trajectory& traj, const std::string& format) {
        if (format == "csv") {
            auto os = open("trajectory.csv");
            write_trajectory_csv(traj, os);
        } else if (format == "binary") {
            auto os = open("trajectory.bin", true);
            write_trajectory_binary(traj, os);
        }
    }

    void json_file(const std::string& name, const json& j) {
        auto os = open(name);
        os << j.dump(2) << "\n";
    }

private:
    fs::path dir_;
    RunResult& result_;
};

Check at_most(const std::string& name, double value, double bound) {
    std::ostringstream rel;
    rel << "<= " << std::setprecision(6) << bound;
    return {name, value, rel.str(), value <= bound};
}

Check at_least(const std::string& name, double value, double bound) {
    std::ostringstream rel;
    rel << ">= " << std::setprecision(6) << bound;
    return {name, value, rel.str(), value >= bound};
}

Check within(const std::string& name, double value, double lo, double hi) {
    std::ostringstream rel;
    rel << "in [" << std::setprecision(6) << lo << ", " << hi << "]";
    return {name, value, rel.str(), value >= lo && value <= hi};
}

Check flag(const std::string& name, bool ok) { return {name, ok ? 1.0 : 0.0, "== 1", ok}; }

struct Setup {
    Grid grid;
    TimeGrid time;
    std::vector<double> g;
    GridField u0;
};

Setup setup(const RunConfig& cfg) {
    const Grid grid(cfg.n_space);
    return {grid, TimeGrid(cfg.T, cfg.steps), cfg.g_profile.evaluate(grid), cfg.u0.evaluate(grid)};
}

SpaceRoughDriver noise_driver(const RunConfig& cfg, const Setup& s, std::uint64_t seed) {
    const BMSample bm = sample_bm(seed, s.time, cfg.q);
    return dilate(build_driver(s.g, s.grid, piecewise_linear_lift(bm)), cfg.noise_scale);
}

double max_norm_deviation(const Trajectory& traj) {
    double m = 0.0;
    for (const auto& u : traj.states) m = std::max(m, u.max_norm_deviation());
    return m;
}

void sphere_checks(const RunConfig& cfg, const Trajectory& traj, RunResult& r) {
    const double dev = max_norm_deviation(traj);
    r.summary["max_norm_deviation"] = dev;
    if (cfg.solver.project) r.checks.push_back(at_most("sphere_constraint", dev, 1e-12));
    else r.checks.push_back(at_most("unprojected_norm_drift", dev, 5.0 * traj.grid.dt()));
}

void series_table(Writer& w, const Trajectory& traj) {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < traj.nodes(); ++i)
        rows.push_back({static_cast<double>(i), traj.grid.node(i), energy(traj[i]), tension_norm_sq(traj[i]),
                        traj[i].max_norm_deviation()});
    w.table("series.csv", "node,t,energy,tension_sq,max_norm_deviation", rows);
}

// ---------------------------------------------------------------------------

void driver_check(const RunConfig& cfg, Writer& w, RunResult& r) {
    const Setup s = setup(cfg);
    struct Row {
        StructureDefects defects;
        double shuffle;
        BMSample bm;
    };
    auto rows = parallel_map<Row>(cfg.seeds, [&](int i) {
        const BMSample bm = sample_bm(cfg.seed + i, s.time, cfg.q);
        const ModeRoughPath rp = piecewise_linear_lift(bm);
        const SpaceRoughDriver d = dilate(build_driver(s.g, s.grid, rp), cfg.noise_scale);
        return Row{structure_defects(d), mode_shuffle_defect(rp), bm};
    });
    std::vector<std::vector<double>> table;
    double chen = 0, levy = 0, anti = 0;
    for (int i = 0; i < cfg.seeds; ++i) {
        const auto& d = rows[i].defects;
        table.push_back({static_cast<double>(cfg.seed + i), d.chen, d.chen_anchor, d.additivity, d.levy,
                         d.antisymmetry, rows[i].shuffle});
        chen = std::max(chen, d.chen);
        levy = std::max(levy, d.levy);
        anti = std::max(anti, d.antisymmetry);
        auto os = w.open("increments_seed" + std::to_string(cfg.seed + i) + ".csv");
        write_increments_csv(rows[i].bm, os);
    }
    w.table("driver_check.csv", "seed,chen,chen_anchor,additivity,levy,antisymmetry,mode_shuffle", table);
    r.checks.push_back(at_most("chen_defect", chen, 1e-12));
    r.checks.push_back(at_most("levy_defect", levy, 1e-12));
    r.checks.push_back(at_most("antisymmetry_defect", anti, 1e-12));
}

void simulate(const RunConfig& cfg, Writer& w, RunResult& r) {
    const Setup s = setup(cfg);
    const bool noisy = cfg.noise_scale > 0.0;
    double omega = 0.0;
    const Trajectory traj = [&] {
        if (!noisy) return solve_deterministic(s.u0, s.time, cfg.solver);
        const SpaceRoughDriver d = noise_driver(cfg, s, cfg.seed);
        omega = driver_omega(d, cfg.p, 2);
        return solve(s.u0, d, cfg.solver);
    }();
    w.trajectory(traj, cfg.trajectory_format);
    series_table(w, traj);
    const AprioriReport rep = apriori_report(traj, omega, std::max(cfg.k, 1), cfg.apriori_K);
    w.json_file("apriori.json", to_json(rep));
    r.summary["apriori"] = to_json(rep);
    bool finite = true;
    for (const auto& u : traj.states) finite = finite && u.all_finite();
    r.checks.push_back(flag("finite_states", finite));
    sphere_checks(cfg, traj, r);
    if (!noisy && cfg.solver.drift_enabled) {
        const DissipationReport diss = dissipation_check(traj);
        const double dt = s.time.dt();
        const double E0 = diss.energies.front();
        r.summary["dissipation"] = to_json(diss);
        r.checks.push_back(at_most("energy_increase", diss.max_increase, 1e-13 * (1 + E0)));
        r.checks.push_back(at_most("dissipation_defect", diss.max_defect, 10.0 * dt * dt * (1 + E0) * (1 + E0)));
        if (cfg.u0.kind == "equator") {
            double dev = 0.0;
            for (const auto& u : traj.states) dev = std::max(dev, linf_norm(u - traj[0]));
            r.checks.push_back(at_most("stationarity", dev, 1e-3));
        }
    }
}

void wongzakai(const RunConfig& cfg, Writer& w, RunResult& r) {
    const Setup s = setup(cfg);
    const BMSample bm = sample_bm(cfg.seed, s.time, cfg.q);
    const SpaceRoughDriver ref_driver = dilate(build_driver(s.g, s.grid, piecewise_linear_lift(bm)), cfg.noise_scale);
    const Trajectory ref = solve(s.u0, ref_driver, cfg.solver);
    const int levels = cfg.n_max - cfg.n_min + 1;
    struct Row {
        double driver, solution, sup_l2;
    };
    auto rows = parallel_map<Row>(levels, [&](int i) {
        const DyadicApprox a = dyadic_approx(bm, cfg.n_min + i);
        const SpaceRoughDriver d = dilate(build_driver(s.g, s.grid, a.lift), cfg.noise_scale);
        const Trajectory traj = solve(s.u0, d, cfg.solver);
        return Row{driver_distance(d, ref_driver, cfg.p, cfg.k), solution_distance(traj, ref),
                   sup_l2_distance(traj, ref)};
    });
    std::vector<std::vector<double>> table;
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < levels; ++i) {
        table.push_back({static_cast<double>(cfg.n_min + i), rows[i].driver, rows[i].solution, rows[i].sup_l2});
        pairs.emplace_back(rows[i].driver, rows[i].solution);
    }
    w.table("wongzakai.csv", "level,driver_distance,solution_distance,sup_l2_distance", table);
    const RateFit fit = wz_rate(pairs);
    r.summary["fit"] = to_json(fit);
    r.checks.push_back(within("wz_slope", fit.slope, 0.7, 1.3));
    r.checks.push_back(at_least("wz_r2", fit.r2, 0.9));
}

void remainder(const RunConfig& cfg, Writer& w, RunResult& r) {
    const Setup s = setup(cfg);
    const SpaceRoughDriver d = noise_driver(cfg, s, cfg.seed);
    const Trajectory traj = solve(s.u0, d, cfg.solver);
    const DriverControls controls = driver_controls(d, cfg.p, 2);
    const RemainderTable table(traj, d);
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<double, double>> vs_omega, vs_first, vs_time;
    double trace = 0.0;
    for (auto [a, b] : dyadic_windows(s.time.steps(), cfg.window_min_log2, cfg.window_max_log2)) {
        const double omega = controls.combined(a, b);
        const double first = controls.first(a, b);
        const double rem = lp_norm(table(a, b), 2.0);
        const ProductFormulaResidual pf = product_formula_check(traj, d, a, b);
        trace = std::max(trace, std::abs(pf.trace));
        rows.push_back({static_cast<double>(a), static_cast<double>(b), omega, first, rem, pf.trace, pf.matrix});
        if (rem > 0.0 && omega > 0.0) vs_omega.emplace_back(omega, rem);
        if (rem > 0.0 && first > 0.0) vs_first.emplace_back(first, rem);
        if (rem > 0.0) vs_time.emplace_back(s.time.node(b) - s.time.node(a), rem);
    }
    w.table("remainder.csv", "s,t,omega,omega_first,remainder_l2,product_trace,product_matrix", rows);
    const RateFit fit = fit_rate(vs_omega);
    r.summary["fit"] = to_json(fit);
    r.summary["fit_vs_first_level_control"] = to_json(fit_rate(vs_first));
    r.summary["fit_vs_window_length"] = to_json(fit_rate(vs_time));
    r.summary["omega_0T"] = controls.combined(0, s.time.steps());
    r.summary["product_trace_max"] = trace;
    r.checks.push_back(at_least("remainder_exponent", fit.slope, 3.0 / cfg.p - 0.1));
    if (cfg.solver.project) r.checks.push_back(at_most("product_trace", trace, 1e-10));
}

void smallnoise(const RunConfig& cfg, Writer& w, RunResult& r) {
    const Setup s = setup(cfg);
    const SpaceRoughDriver base = noise_driver(cfg, s, cfg.seed);
    const Trajectory ref = solve_deterministic(s.u0, s.time, cfg.solver);
    std::vector<double> eps = cfg.eps;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    auto dist = parallel_map<double>(static_cast<int>(eps.size()), [&](int i) {
        return sup_l2_distance(solve(s.u0, dilate(base, std::sqrt(eps[i])), cfg.solver), ref);
    });
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<double, double>> pts;
    bool decreasing = true;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        rows.push_back({eps[i], dist[i]});
        pts.emplace_back(eps[i], dist[i]);
        if (i > 0 && !(dist[i] < dist[i - 1])) decreasing = false;
    }
    w.table("smallnoise.csv", "eps,sup_l2_distance", rows);
    const RateFit fit = fit_rate(pts);
    r.summary["fit"] = to_json(fit);
    r.checks.push_back(flag("distance_decreasing", decreasing));
    r.checks.push_back(within("smallnoise_slope", fit.slope, 0.3, 0.7));
}

void skeleton(const RunConfig& cfg, Writer& w, RunResult& r) {
    const Setup s = setup(cfg);
    const Vec3 v = cfg.velocity;
    const CameronMartinPath h = CameronMartinPath::from_function(s.time, 3, [&](double t) -> Eigen::VectorXd {
        return Eigen::VectorXd(t * v);
    });
    const double rate = cm_rate(h);
    const double expected = v.squaredNorm() * cfg.T;
    const SpaceRoughDriver d = dilate(build_driver(s.g, s.grid, piecewise_linear_lift(h)), cfg.noise_scale);
    const Trajectory traj = solve(s.u0, d, cfg.solver);
    w.trajectory(traj, cfg.trajectory_format);
    series_table(w, traj);
    r.summary["rate"] = rate;
    r.summary["rate_expected"] = expected;
    w.json_file("skeleton.json", {{"rate", rate}, {"rate_expected", expected}, {"velocity", {v[0], v[1], v[2]}}});
    r.checks.push_back(at_most("rate_error", std::abs(rate - expected), 1e-12 * std::max(1.0, expected)));
    sphere_checks(cfg, traj, r);
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

RunResult run_experiment(const RunConfig& cfg, const fs::path& out) {
    fs::create_directories(out);
    RunResult r;
    r.summary = json::object();
    Writer w(out, r);
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.experiment == "driver-check") driver_check(cfg, w, r);
    else if (cfg.experiment == "simulate") simulate(cfg, w, r);
    else if (cfg.experiment == "wongzakai") wongzakai(cfg, w, r);
    else if (cfg.experiment == "remainder") remainder(cfg, w, r);
    else if (cfg.experiment == "smallnoise") smallnoise(cfg, w, r);
    else if (cfg.experiment == "skeleton") skeleton(cfg, w, r);
    else throw ConfigError("experiment", "unknown experiment '" + cfg.experiment + "'");
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"passed", c.passed}});
    json summary{{"experiment", cfg.experiment}, {"passed", r.passed()}, {"checks", checks}, {"metrics", r.summary}};
    w.json_file("summary.json", summary);
    r.summary = summary;

    r.files.push_back("manifest.json");
    json manifest{{"schema", kManifestSchema},
                  {"version", kVersion},
                  {"experiment", cfg.experiment},
                  {"seed", cfg.seed},
                  {"config", cfg.raw},
                  {"created_utc", utc_now()},
                  {"runtime_seconds", seconds},
                  {"threads", thread_count()},
                  {"build",
                   {{"compiler", __VERSION__},
                    {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)}}},
                  {"files", r.files},
                  {"passed", r.passed()}};
    std::ofstream os(out / "manifest.json");
    os << manifest.dump(2) << "\n";
    return r;
}

}  // namespace rllg
