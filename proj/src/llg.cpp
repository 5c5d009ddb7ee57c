#include "rough_llg/llg.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace rllg {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::rough_euler_imex: return "rough_euler_imex";
        case Scheme::rough_euler_explicit: return "rough_euler_explicit";
        case Scheme::smooth_imex: return "smooth_imex";
    }
    return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "rough_euler_imex") return Scheme::rough_euler_imex;
    if (name == "rough_euler_explicit") return Scheme::rough_euler_explicit;
    if (name == "smooth_imex") return Scheme::smooth_imex;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

void validate(const SolverOptions& opts, const Grid& grid, double dt) {
    if (opts.substeps_per_interval < 1) throw std::invalid_argument("substeps_per_interval must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    if (opts.scheme == Scheme::rough_euler_explicit && opts.drift_enabled) {
        const double h = grid.spacing();
        if (dt > 0.5 * h * h * (1.0 + 1e-12))
            throw std::invalid_argument("explicit scheme needs dt <= h^2/2 (dt=" + std::to_string(dt) +
                                        ", h^2/2=" + std::to_string(0.5 * h * h) + ")");
    }
}

GridField tension(const GridField& u) {
    GridField t = diff(u, 2);
    const auto g = gradient_sq(u);
    for (int i = 0; i < u.size(); ++i) t[i] += g[i] * u[i];
    return t;
}

GridField drift(const GridField& u) {
    const GridField lap = diff(u, 2);
    const auto g = gradient_sq(u);
    GridField out(u.grid);
    for (int i = 0; i < u.size(); ++i) out[i] = lap[i] + g[i] * u[i] + u[i].cross(lap[i]);
    return out;
}

namespace {

void guard(const GridField& v) {
    for (int i = 0; i < v.size(); ++i) {
        const double r = v[i].norm();
        if (!std::isfinite(r)) throw NumericalAbort("non-finite value at grid point " + std::to_string(i), -1, i);
        if (r < kProjectionFloor)
            throw NumericalAbort("vector collapsed below projection floor at grid point " + std::to_string(i), -1, i);
    }
}

// Nonlinear explicit part: u |Du|^2 + u x D^2 u (the implicit scheme keeps D^2 u aside).
GridField explicit_part(const GridField& u, bool with_laplacian) {
    const GridField lap = diff(u, 2);
    const auto g = gradient_sq(u);
    GridField out(u.grid);
    for (int i = 0; i < u.size(); ++i) {
        out[i] = g[i] * u[i] + u[i].cross(lap[i]);
        if (with_laplacian) out[i] += lap[i];
    }
    return out;
}

// v = u + dt * drift + A(x) u, with D^2 implicit when requested.
template <class Increment>
GridField advance(const GridField& u, double dt, bool implicit, const SolverOptions& opts, Increment&& inc) {
    GridField v = u;
    if (opts.drift_enabled) {
        GridField e = explicit_part(u, !implicit);
        e *= dt;
        v += e;
    }
    for (int i = 0; i < u.size(); ++i) v[i] += inc(i) * u[i];
    if (opts.drift_enabled && implicit) v = imex_solve(v, dt);
    guard(v);
    return opts.project ? project_sphere(v) : v;
}

}  // namespace

GridField project_sphere(const GridField& f) {
    guard(f);
    GridField out = f;
    for (auto& v : out.values) v /= v.norm();
    return out;
}

GridField step_rough(const GridField& u, const SpaceRoughDriver& d, int interval, const SolverOptions& opts) {
    if (interval < 0 || interval >= d.steps()) throw std::out_of_range("step_rough: interval outside driver");
    if (!(u.grid == d.grid())) throw std::invalid_argument("step_rough: grid mismatch");
    const double dt = d.time_grid().dt();
    validate(opts, u.grid, dt);
    if (opts.scheme == Scheme::smooth_imex) return step_smooth(u, d.first_at(interval), dt, opts);
    const bool implicit = opts.scheme == Scheme::rough_euler_imex;
    return advance(u, dt, implicit, opts, [&](int x) -> Mat3 { return d.first(interval, x) + d.second(interval, x); });
}

GridField step_smooth(const GridField& u, std::span<const Mat3> xi, double dt, const SolverOptions& opts) {
    if (static_cast<int>(xi.size()) != u.size()) throw std::invalid_argument("step_smooth: input size mismatch");
    const int s = opts.substeps_per_interval;
    if (s < 1) throw std::invalid_argument("substeps_per_interval must be >= 1");
    const double h = dt / s;
    const double frac = 1.0 / s;
    GridField v = u;
    for (int k = 0; k < s; ++k) v = advance(v, h, true, opts, [&](int x) -> Mat3 { return frac * xi[x]; });
    return v;
}

GridField step_deterministic(const GridField& u, double dt, const SolverOptions& opts) {
    validate(opts, u.grid, dt);
    const bool implicit = opts.scheme != Scheme::rough_euler_explicit;
    return advance(u, dt, implicit, opts, [](int) -> Mat3 { return Mat3::Zero(); });
}

namespace {

Trajectory start(const GridField& u0, const TimeGrid& grid, const SolverOptions& opts, std::string provenance) {
    if (!u0.sphere_valued()) throw std::invalid_argument("initial datum must be sphere-valued");
    Trajectory traj{grid, {}, to_string(opts.scheme), grid.dt(), opts.project, opts.drift_enabled,
                    std::move(provenance)};
    traj.states.reserve(grid.nodes());
    traj.states.push_back(u0);
    return traj;
}

template <class Step>
void run(Trajectory& traj, Step&& step) {
    for (int i = 0; i < traj.grid.steps(); ++i) {
        try {
            traj.states.push_back(step(traj.states.back(), i));
        } catch (const NumericalAbort& e) {
            throw NumericalAbort(std::string(e.what()) + " in step from node " + std::to_string(i), i, e.point());
        }
    }
}

}  // namespace

Trajectory solve(const GridField& u0, const SpaceRoughDriver& d, const SolverOptions& opts) {
    if (!(u0.grid == d.grid())) throw std::invalid_argument("solve: grid mismatch");
    validate(opts, u0.grid, d.time_grid().dt());
    Trajectory traj = start(u0, d.time_grid(), opts, d.generators() ? "mode-lift" : "driver");
    run(traj, [&](const GridField& u, int i) { return step_rough(u, d, i, opts); });
    return traj;
}

Trajectory solve_deterministic(const GridField& u0, const TimeGrid& grid, const SolverOptions& opts) {
    validate(opts, u0.grid, grid.dt());
    Trajectory traj = start(u0, grid, opts, "none");
    run(traj, [&](const GridField& u, int) { return step_deterministic(u, grid.dt(), opts); });
    return traj;
}

RemainderTable::RemainderTable(const Trajectory& traj, const SpaceRoughDriver& d) : traj_(&traj), d_(&d) {
    if (!(traj.grid == d.time_grid())) throw std::invalid_argument("remainder: time grid mismatch");
    const Grid& g = traj.states.front().grid;
    quad_.reserve(traj.nodes());
    quad_.emplace_back(g);
    if (!traj.drift_enabled) return;
    GridField prev = drift(traj[0]);
    for (int i = 0; i + 1 < traj.nodes(); ++i) {
        GridField next = drift(traj[i + 1]);
        GridField acc = quad_.back();
        GridField step = prev + next;
        step *= 0.5 * traj.grid.dt();
        acc += step;
        quad_.push_back(std::move(acc));
        prev = std::move(next);
    }
}

GridField RemainderTable::operator()(int s, int t) const {
    if (s > t || s < 0 || t >= traj_->nodes()) throw std::out_of_range("remainder: bad window");
    const GridField& us = (*traj_)[s];
    GridField r = (*traj_)[t] - us;
    if (traj_->drift_enabled) r -= quad_[t] - quad_[s];
    for (int x = 0; x < us.size(); ++x) {
        auto [G, GG] = d_->reconstruct(s, t, x);
        r[x] -= (G + GG) * us[x];
    }
    return r;
}

GridField extract_remainder(const Trajectory& traj, const SpaceRoughDriver& d, int s, int t) {
    if (s > t || s < 0 || t >= traj.nodes()) throw std::out_of_range("remainder: bad window");
    const GridField& us = traj[s];
    GridField r = traj[t] - us;
    if (traj.drift_enabled)
        for (int i = s; i < t; ++i) {
            GridField q = drift(traj[i]) + drift(traj[i + 1]);
            q *= 0.5 * traj.grid.dt();
            r -= q;
        }
    for (int x = 0; x < us.size(); ++x) {
        auto [G, GG] = d.reconstruct(s, t, x);
        r[x] -= (G + GG) * us[x];
    }
    return r;
}

// ---------------------------------------------------------------------------
// Dumps

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    const Grid& g = traj.states.front().grid;
    os << std::setprecision(17);
    os << "# rough-llg trajectory v1 n=" << g.size() << " N=" << traj.grid.steps() << " T=" << traj.grid.horizon()
       << " scheme=" << traj.scheme << "\n";
    os << "t,x,u1,u2,u3\n";
    for (int i = 0; i < traj.nodes(); ++i)
        for (int x = 0; x < g.size(); ++x) {
            const Vec3& v = traj[i][x];
            os << traj.grid.node(i) << "," << g.node(x) << "," << v[0] << "," << v[1] << "," << v[2] << "\n";
        }
}

Trajectory read_trajectory_csv(std::istream& is) {
    std::string header;
    std::getline(is, header);
    const std::string magic = "# rough-llg trajectory v1";
    if (header.rfind(magic, 0) != 0) throw std::runtime_error("trajectory csv: bad header");
    int n = 0, N = 0;
    double T = 0.0;
    std::string scheme;
    std::istringstream hs(header.substr(magic.size()));
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "n") n = std::stoi(val);
        else if (key == "N") N = std::stoi(val);
        else if (key == "T") T = std::stod(val);
        else if (key == "scheme") scheme = val;
    }
    std::string line;
    std::getline(is, line);  // column names
    const Grid g(n);
    const TimeGrid tg(T, N);
    Trajectory traj{tg, {}, scheme, tg.dt(), false, true, "file"};
    for (int i = 0; i <= N; ++i) {
        GridField f(g);
        for (int x = 0; x < n; ++x) {
            if (!std::getline(is, line)) throw std::runtime_error("trajectory csv: missing rows");
            std::istringstream ls(line);
            std::string cell;
            double vals[5];
            for (double& v : vals) {
                if (!std::getline(ls, cell, ',')) throw std::runtime_error("trajectory csv: short row");
                v = std::stod(cell);
            }
            f[x] = Vec3(vals[2], vals[3], vals[4]);
        }
        traj.states.push_back(std::move(f));
    }
    return traj;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("trajectory binary: truncated header");
    return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u32(os, static_cast<std::uint32_t>(bits));
    put_u32(os, static_cast<std::uint32_t>(bits >> 32));
}

double get_f64(std::istream& is) {
    const std::uint64_t lo = get_u32(is), hi = get_u32(is);
    const std::uint64_t bits = lo | (hi << 32);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void write_trajectory_binary(const Trajectory& traj, std::ostream& os) {
    const Grid& g = traj.states.front().grid;
    os.write("RLLG", 4);
    put_u32(os, 1);
    put_u32(os, static_cast<std::uint32_t>(g.size()));
    put_u32(os, static_cast<std::uint32_t>(traj.grid.steps()));
    put_f64(os, traj.grid.horizon());
    for (const auto& f : traj.states)
        for (const auto& v : f.values)
            for (int c = 0; c < 3; ++c) put_f64(os, v[c]);
}

Trajectory read_trajectory_binary(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "RLLG", 4) != 0) throw std::runtime_error("trajectory binary: bad magic");
    if (get_u32(is) != 1) throw std::runtime_error("trajectory binary: unsupported version");
    const int n = static_cast<int>(get_u32(is));
    const int N = static_cast<int>(get_u32(is));
    const double T = get_f64(is);
    const Grid g(n);
    const TimeGrid tg(T, N);
    Trajectory traj{tg, {}, "", tg.dt(), false, true, "file"};
    for (int i = 0; i <= N; ++i) {
        GridField f(g);
        for (auto& v : f.values)
            for (int c = 0; c < 3; ++c) v[c] = get_f64(is);
        traj.states.push_back(std::move(f));
    }
    return traj;
}

}  // namespace rllg
