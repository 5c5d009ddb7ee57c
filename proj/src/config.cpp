#include "rough_llg/experiments.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace rllg {

namespace {

using nlohmann::json;

const std::set<std::string> kExperiments{"driver-check", "simulate", "wongzakai", "remainder", "smallnoise", "skeleton"};

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }
    const json& at(const std::string& key) { return j_.at(key); }

    void number(const std::string& key, double& out) {
        if (!has(key)) return;
        if (!at(key).is_number()) throw ConfigError(field(key), "expected a number");
        out = at(key).get<double>();
        if (!std::isfinite(out)) throw ConfigError(field(key), "must be finite");
    }
    void integer(const std::string& key, int& out) {
        if (!has(key)) return;
        if (!at(key).is_number_integer()) throw ConfigError(field(key), "expected an integer");
        out = at(key).get<int>();
    }
    void unsigned64(const std::string& key, std::uint64_t& out) {
        if (!has(key)) return;
        const json& v = at(key);
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            throw ConfigError(field(key), "expected a non-negative integer");
        out = at(key).get<std::uint64_t>();
    }
    void boolean(const std::string& key, bool& out) {
        if (!has(key)) return;
        if (!at(key).is_boolean()) throw ConfigError(field(key), "expected true or false");
        out = at(key).get<bool>();
    }
    void string(const std::string& key, std::string& out) {
        if (!has(key)) return;
        if (!at(key).is_string()) throw ConfigError(field(key), "expected a string");
        out = at(key).get<std::string>();
    }
    void numbers(const std::string& key, std::vector<double>& out) {
        if (!has(key)) return;
        if (!at(key).is_array()) throw ConfigError(field(key), "expected an array of numbers");
        out.clear();
        for (const auto& v : at(key)) {
            if (!v.is_number()) throw ConfigError(field(key), "expected an array of numbers");
            out.push_back(v.get<double>());
            if (!std::isfinite(out.back())) throw ConfigError(field(key), "entries must be finite");
        }
    }
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw ConfigError(field, why);
}

}  // namespace

std::vector<double> ProfileSpec::evaluate(const Grid& g) const {
    std::vector<double> out(g.size(), 0.0);
    if (kind == "samples") {
        if (static_cast<int>(samples.size()) != g.size())
            throw ConfigError("g_profile.samples", "needs exactly n_space values");
        return samples;
    }
    for (int i = 0; i < g.size(); ++i) {
        const double x = g.node(i);
        double v = constant;
        if (kind == "trigonometric") {
            for (std::size_t m = 0; m < cos.size(); ++m) v += cos[m] * std::cos(2.0 * std::numbers::pi * (m + 1) * x);
            for (std::size_t m = 0; m < sin.size(); ++m) v += sin[m] * std::sin(2.0 * std::numbers::pi * (m + 1) * x);
        }
        out[i] = v;
    }
    return out;
}

GridField InitialSpec::evaluate(const Grid& g) const {
    constexpr double tau = 2.0 * std::numbers::pi;
    if (kind == "equator")
        return GridField::from_function(g, [](double x) { return Vec3(std::cos(tau * x), std::sin(tau * x), 0.0); });
    if (kind == "tilted")
        return GridField::from_function(g, [a = amplitude](double x) {
            const double th = a * std::sin(2.0 * tau * x);
            return Vec3(std::cos(tau * x) * std::cos(th), std::sin(tau * x) * std::cos(th), std::sin(th));
        });
    if (kind == "cap")
        return GridField::from_function(g, [a = amplitude](double x) {
            return Vec3(Vec3(a * std::cos(tau * x), a * std::sin(tau * x), 1.0).normalized());
        });
    // file: one line per grid point, "u1,u2,u3" (lines starting with '#' skipped)
    std::ifstream in(path);
    if (!in) throw ConfigError("u0.path", "cannot open '" + path + "'");
    GridField f(g);
    std::string line;
    int i = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (i >= g.size()) throw ConfigError("u0.path", "more rows than n_space");
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        if (!(ls >> f[i][0] >> f[i][1] >> f[i][2])) throw ConfigError("u0.path", "rows need three numbers");
        ++i;
    }
    if (i != g.size()) throw ConfigError("u0.path", "expected n_space rows");
    if (!f.sphere_valued()) throw ConfigError("u0.path", "initial datum is not sphere-valued");
    return f;
}

RunConfig parse_config(const nlohmann::json& j) {
    RunConfig c;
    Section root(j, "");
    root.string("experiment", c.experiment);
    require(kExperiments.count(c.experiment) > 0, "experiment",
            "must be one of driver-check, simulate, wongzakai, remainder, smallnoise, skeleton");
    root.integer("n_space", c.n_space);
    require(c.n_space >= 4, "n_space", "must be >= 4");
    if (root.has("levels")) {
        Section s(root.at("levels"), "levels");
        s.integer("M", c.M);
        s.integer("n_min", c.n_min);
        s.integer("n_max", c.n_max);
        s.finish();
    }
    require(c.M >= 0 && c.M <= 24, "levels.M", "must be in [0, 24]");
    root.number("p", c.p);
    require(c.p >= 2.0 && c.p < 3.0, "p", "must be in [2, 3)");
    root.integer("k", c.k);
    require(c.k >= 0, "k", "must be >= 0");
    root.number("T", c.T);
    require(c.T > 0.0, "T", "must be positive");
    double dt = 0.0;
    root.number("dt", dt);
    root.integer("steps", c.steps);
    if (c.steps != 0) {
        require(c.steps >= 1, "steps", "must be >= 1");
        if (dt != 0.0) require(std::abs(c.steps * dt - c.T) <= 1e-9 * c.T, "dt", "inconsistent with T / steps");
    } else if (dt != 0.0) {
        require(dt > 0.0, "dt", "must be positive");
        c.steps = static_cast<int>(std::lround(c.T / dt));
        require(c.steps >= 1 && std::abs(c.steps * dt - c.T) <= 1e-9 * c.T, "dt", "must divide T");
    } else {
        c.steps = 1 << c.M;
    }
    root.unsigned64("seed", c.seed);
    root.integer("q", c.q);
    require(c.q >= 1, "q", "must be >= 1");
    root.number("noise_scale", c.noise_scale);
    require(c.noise_scale >= 0.0, "noise_scale", "must be >= 0");
    if (root.has("g_profile")) {
        Section s(root.at("g_profile"), "g_profile");
        s.string("kind", c.g_profile.kind);
        require(c.g_profile.kind == "constant" || c.g_profile.kind == "trigonometric" || c.g_profile.kind == "samples",
                "g_profile.kind", "must be constant, trigonometric or samples");
        s.number("constant", c.g_profile.constant);
        s.numbers("cos", c.g_profile.cos);
        s.numbers("sin", c.g_profile.sin);
        s.numbers("samples", c.g_profile.samples);
        s.finish();
        if (c.g_profile.kind == "constant") c.g_profile.cos.clear(), c.g_profile.sin.clear();
        if (c.g_profile.kind == "samples")
            require(static_cast<int>(c.g_profile.samples.size()) == c.n_space, "g_profile.samples",
                    "needs exactly n_space values");
    }
    if (root.has("u0")) {
        Section s(root.at("u0"), "u0");
        s.string("kind", c.u0.kind);
        require(c.u0.kind == "equator" || c.u0.kind == "tilted" || c.u0.kind == "cap" || c.u0.kind == "file", "u0.kind",
                "must be equator, tilted, cap or file");
        s.number("amplitude", c.u0.amplitude);
        s.string("path", c.u0.path);
        s.finish();
        if (c.u0.kind == "file") require(!c.u0.path.empty(), "u0.path", "required for kind = file");
    }
    if (root.has("solver")) {
        Section s(root.at("solver"), "solver");
        std::string scheme = to_string(c.solver.scheme);
        s.string("scheme", scheme);
        try {
            c.solver.scheme = scheme_from_string(scheme);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("solver.scheme", e.what());
        }
        s.boolean("project", c.solver.project);
        s.boolean("drift", c.solver.drift_enabled);
        s.integer("substeps", c.solver.substeps_per_interval);
        s.finish();
    }
    try {
        validate(c.solver, Grid(c.n_space), c.T / c.steps);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("solver", e.what());
    }
    root.integer("seeds", c.seeds);
    require(c.seeds >= 1, "seeds", "must be >= 1");
    root.numbers("eps", c.eps);
    for (double e : c.eps) require(e > 0.0, "eps", "entries must be positive");
    if (root.has("windows")) {
        Section s(root.at("windows"), "windows");
        s.integer("min_log2", c.window_min_log2);
        s.integer("max_log2", c.window_max_log2);
        s.finish();
        require(c.window_min_log2 >= 0 && c.window_min_log2 <= c.window_max_log2, "windows",
                "need 0 <= min_log2 <= max_log2");
    }
    if (root.has("velocity")) {
        std::vector<double> v;
        root.numbers("velocity", v);
        require(v.size() == 3, "velocity", "needs three components");
        c.velocity = Vec3(v[0], v[1], v[2]);
    }
    if (root.has("output")) {
        Section s(root.at("output"), "output");
        s.string("trajectory", c.trajectory_format);
        s.finish();
        require(c.trajectory_format == "csv" || c.trajectory_format == "binary" || c.trajectory_format == "none",
                "output.trajectory", "must be csv, binary or none");
    }
    root.number("apriori_K", c.apriori_K);
    require(c.apriori_K > 0.0, "apriori_K", "must be positive");
    root.finish();

    if (c.n_max < 0) c.n_max = c.M - 2;
    const bool dyadic = c.steps == (1 << c.M);
    if (c.experiment == "wongzakai") {
        require(dyadic, "steps", "wongzakai needs steps = 2^M");
        require(c.n_min >= 0 && c.n_min <= c.n_max && c.n_max < c.M, "levels", "need 0 <= n_min <= n_max < M");
        require(c.n_max - c.n_min >= 2, "levels", "need at least three compared levels");
    }
    if (c.experiment == "smallnoise") require(c.eps.size() >= 3, "eps", "need at least three values");
    if (c.experiment == "remainder" || c.experiment == "wongzakai" || c.experiment == "smallnoise")
        require(c.noise_scale > 0.0, "noise_scale", "must be positive for this experiment");
    if (c.experiment == "skeleton") require(c.q == 3, "q", "skeleton uses q = 3");
    c.raw = to_json(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

nlohmann::json to_json(const RunConfig& c) {
    json g{{"kind", c.g_profile.kind}, {"constant", c.g_profile.constant}, {"cos", c.g_profile.cos},
           {"sin", c.g_profile.sin}};
    if (c.g_profile.kind == "samples") g["samples"] = c.g_profile.samples;
    json u0{{"kind", c.u0.kind}, {"amplitude", c.u0.amplitude}};
    if (c.u0.kind == "file") u0["path"] = c.u0.path;
    return {{"experiment", c.experiment},
            {"n_space", c.n_space},
            {"levels", {{"M", c.M}, {"n_min", c.n_min}, {"n_max", c.n_max}}},
            {"p", c.p},
            {"k", c.k},
            {"T", c.T},
            {"steps", c.steps},
            {"seed", c.seed},
            {"q", c.q},
            {"noise_scale", c.noise_scale},
            {"g_profile", g},
            {"u0", u0},
            {"solver",
             {{"scheme", to_string(c.solver.scheme)},
              {"project", c.solver.project},
              {"drift", c.solver.drift_enabled},
              {"substeps", c.solver.substeps_per_interval}}},
            {"seeds", c.seeds},
            {"eps", c.eps},
            {"windows", {{"min_log2", c.window_min_log2}, {"max_log2", c.window_max_log2}}},
            {"velocity", {c.velocity[0], c.velocity[1], c.velocity[2]}},
            {"output", {{"trajectory", c.trajectory_format}}},
            {"apriori_K", c.apriori_K}};
}

}  // namespace rllg
