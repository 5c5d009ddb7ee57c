#include "rough_llg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rllg {

double energy(const GridField& u) {
    const int n = u.size();
    const double h = u.grid.spacing();
    double e = 0.0;
    for (int i = 0; i < n; ++i) e += (u[u.grid.wrap(i + 1)] - u[i]).squaredNorm();
    return e / h;
}

double tension_norm_sq(const GridField& u) {
    const double l2 = lp_norm(tension(u), 2.0);
    return l2 * l2;
}

DissipationReport dissipation_check(const Trajectory& traj, double rate) {
    DissipationReport r;
    const double dt = traj.grid.dt();
    r.energies.reserve(traj.nodes());
    for (const auto& u : traj.states) r.energies.push_back(energy(u));
    r.max_increase = -std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < traj.nodes(); ++i) {
        const double dE = r.energies[i + 1] - r.energies[i];
        const double d = std::abs(dE + rate * dt * tension_norm_sq(traj[i]));
        r.defects.push_back(d);
        r.max_defect = std::max(r.max_defect, d);
        r.max_increase = std::max(r.max_increase, dE);
    }
    if (r.defects.empty()) r.max_increase = 0.0;
    r.nonincreasing = r.max_increase <= 0.0;
    return r;
}

AprioriReport apriori_report(const Trajectory& traj, double omega_0T, int k, double K) {
    if (k < 1) throw std::invalid_argument("apriori_report: k must be >= 1");
    AprioriReport r;
    const double dt = traj.grid.dt();
    r.sup_Hk.assign(k, 0.0);
    for (int i = 0; i < traj.nodes(); ++i) {
        const GridField& u = traj[i];
        r.sup_H1 = std::max(r.sup_H1, energy(u));
        for (int j = 1; j <= k; ++j) {
            const double nj = lp_norm(derivative(u, j), 2.0);
            r.sup_Hk[j - 1] = std::max(r.sup_Hk[j - 1], nj * nj);
        }
        if (i + 1 < traj.nodes()) {
            r.diss += dt * tension_norm_sq(u);
            const double n2 = lp_norm(diff(u, 2), 2.0);
            r.L2_H2 += dt * n2 * n2;
        }
    }
    const double l2 = lp_norm(traj[0], 2.0);
    r.u0_H1 = std::sqrt(l2 * l2 + energy(traj[0]));
    r.omega_0T = omega_0T;
    r.growth = (r.sup_H1 + r.diss) / (r.u0_H1 * r.u0_H1);
    r.log_ratio = std::log(r.growth) - omega_0T;
    r.bounded = r.log_ratio <= std::log(K);
    return r;
}

double driver_omega(const SpaceRoughDriver& d, double p, int k) {
    const DriverPairNorms norms(d, nullptr, k);
    const int last = d.steps();
    const double w1 = p_variation_power_streaming(
        0, last, p, [&](int i, int t, std::span<double> out) { norms.row(i, t, false, out); });
    const double w2 = p_variation_power_streaming(
        0, last, p / 2.0, [&](int i, int t, std::span<double> out) { norms.row(i, t, true, out); });
    return w1 + w2 + w1 * w1;
}

RateFit fit_rate(std::vector<std::pair<double, double>> points) {
    if (points.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 points");
    for (auto [x, y] : points)
        if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
            throw std::invalid_argument("fit_rate: points must be positive and finite");
    const double m = static_cast<double>(points.size());
    double sx = 0, sy = 0;
    for (auto [x, y] : points) {
        sx += std::log(x);
        sy += std::log(y);
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0, syy = 0;
    for (auto [x, y] : points) {
        const double dx = std::log(x) - mx, dy = std::log(y) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: all x equal");
    RateFit r;
    r.points = std::move(points);
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double sse = 0.0;
    for (auto [x, y] : r.points) {
        const double e = std::log(y) - (r.intercept + r.slope * std::log(x));
        sse += e * e;
    }
    r.r2 = syy == 0.0 ? 1.0 : 1.0 - sse / syy;
    return r;
}

RateFit wz_rate(const std::vector<std::pair<double, double>>& pairs) { return fit_rate(pairs); }

namespace {

void check_same_grid(const Trajectory& a, const Trajectory& b) {
    if (!(a.grid == b.grid) || a.nodes() != b.nodes() || !(a[0].grid == b[0].grid))
        throw std::invalid_argument("trajectory distance: grid mismatch");
}

}  // namespace

double solution_distance(const Trajectory& a, const Trajectory& b) {
    check_same_grid(a, b);
    double sup_h1 = 0.0, l2_h2 = 0.0;
    const double dt = a.grid.dt();
    for (int i = 0; i < a.nodes(); ++i) {
        const GridField e = a[i] - b[i];
        sup_h1 = std::max(sup_h1, hk_norm(e, 1));
        if (i > 0) l2_h2 += dt * hk_norm_sq(e, 2);
    }
    return std::max(sup_h1, std::sqrt(l2_h2));
}

double sup_l2_distance(const Trajectory& a, const Trajectory& b) {
    check_same_grid(a, b);
    double out = 0.0;
    for (int i = 0; i < a.nodes(); ++i) out = std::max(out, lp_norm(a[i] - b[i], 2.0));
    return out;
}

double gns_ratio(const GridField& u) {
    const GridField d1 = derivative(u, 1);
    const double l2 = lp_norm(d1, 2.0);
    if (l2 == 0.0) throw std::domain_error("gns_ratio: constant field");
    const double l4 = lp_norm(d1, 4.0);
    const double d2 = lp_norm(derivative(u, 2), 2.0);
    return std::pow(l4, 4) / (std::pow(l2, 3) * d2 + std::pow(l2, 4));
}

double interpolation_ratio(const GridField& a) {
    const double l2 = lp_norm(a, 2.0);
    if (l2 == 0.0) throw std::domain_error("interpolation_ratio: zero field");
    const double inf = linf_norm(a);
    return inf * inf / (l2 * hk_norm(a, 1));
}

double gronwall_bound(double E0, double omega_0T, double sup_phi, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("gronwall_bound: tau must be positive");
    return std::exp(omega_0T / tau) * (E0 + sup_phi);
}

GronwallCheck gronwall_check(std::span<const double> E, const Control& omega, double kappa, const Control::Fn& phi,
                             double ell) {
    if (!(kappa > 0.0)) throw std::invalid_argument("gronwall_check: kappa must be positive");
    const int n = static_cast<int>(E.size());
    if (n < 1 || n != omega.nodes()) throw std::invalid_argument("gronwall_check: series/control size mismatch");
    GronwallCheck r;
    r.hypothesis_violation = -std::numeric_limits<double>::infinity();
    double sup_phi = 0.0;
    for (int s = 0; s < n; ++s) {
        double sup_E = E[s];
        for (int t = s; t < n; ++t) {
            sup_E = std::max(sup_E, E[t]);
            const double w = omega(s, t);
            const double f = phi ? (s == t ? 0.0 : phi(s, t)) : 0.0;
            if (s == 0) sup_phi = std::max(sup_phi, std::abs(f));
            if (w > ell) continue;
            r.hypothesis_violation = std::max(r.hypothesis_violation, (E[t] - E[s]) - sup_E * std::pow(w, kappa) - f);
            ++r.pairs_checked;
        }
    }
    r.sup_E = *std::max_element(E.begin(), E.end());
    const double base = E[0] + sup_phi;
    const double w0T = omega(0, n - 1);
    if (r.sup_E <= base) r.tau_star = 0.0;
    else if (w0T > 0.0 && base > 0.0) r.tau_star = w0T / std::log(r.sup_E / base);
    else r.tau_star = std::numeric_limits<double>::infinity();
    return r;
}

ProductFormulaResidual product_formula_check(const Trajectory& traj, const SpaceRoughDriver& d, int s, int t) {
    if (s > t || s < 0 || t >= traj.nodes()) throw std::out_of_range("product_formula_check: bad window");
    const GridField& us = traj[s];
    const int n = us.size();
    const double h = us.grid.spacing(), dt = traj.grid.dt();
    std::vector<Mat3> res(n);
    for (int x = 0; x < n; ++x) res[x] = traj[t][x] * traj[t][x].transpose() - us[x] * us[x].transpose();
    if (traj.drift_enabled) {
        GridField prev = drift(traj[s]);
        for (int i = s; i < t; ++i) {
            GridField next = drift(traj[i + 1]);
            for (int x = 0; x < n; ++x) {
                const Vec3& a = traj[i][x];
                const Vec3& b = traj[i + 1][x];
                const Mat3 m = a * prev[x].transpose() + prev[x] * a.transpose() + b * next[x].transpose() +
                               next[x] * b.transpose();
                res[x] -= 0.5 * dt * m;
            }
            prev = std::move(next);
        }
    }
    for (int x = 0; x < n; ++x) {
        auto [G, GG] = d.reconstruct(s, t, x);
        const Vec3 a = (G + GG) * us[x];
        const Vec3 g = G * us[x];
        res[x] -= us[x] * a.transpose() + a * us[x].transpose() + g * g.transpose();
    }
    ProductFormulaResidual r;
    double fro = 0.0;
    for (const auto& m : res) {
        r.trace += h * m.trace();
        fro += h * m.squaredNorm();
    }
    r.matrix = std::sqrt(fro);
    return r;
}

double rho_residual(const Trajectory& traj) {
    const double dt = traj.grid.dt();
    double worst = 0.0;
    const Grid& g = traj[0].grid;
    auto rho_of = [&](const GridField& u) {
        std::vector<double> r(g.size());
        for (int x = 0; x < g.size(); ++x) r[x] = 0.5 * (u[x].squaredNorm() - 1.0);
        return r;
    };
    std::vector<double> rho = rho_of(traj[0]);
    for (int i = 0; i + 1 < traj.nodes(); ++i) {
        std::vector<double> next = rho_of(traj[i + 1]);
        const auto lap = diff(rho, g, 2);
        const auto gsq = gradient_sq(traj[i]);
        std::vector<double> res(g.size());
        for (int x = 0; x < g.size(); ++x) res[x] = (next[x] - rho[x]) / dt - lap[x] - 2.0 * gsq[x] * rho[x];
        worst = std::max(worst, lp_norm(res, g, 2.0));
        rho = std::move(next);
    }
    return worst;
}

RateFit remainder_scaling(const Trajectory& traj, const SpaceRoughDriver& d, const Control& omega, int min_log2,
                          int max_log2) {
    const RemainderTable table(traj, d);
    std::vector<std::pair<double, double>> pts;
    for (auto [s, t] : dyadic_windows(traj.grid.steps(), min_log2, max_log2)) {
        const double w = omega(s, t);
        const double r = lp_norm(table(s, t), 2.0);
        if (w > 0.0 && r > 0.0) pts.emplace_back(w, r);
    }
    return fit_rate(std::move(pts));
}

nlohmann::json to_json(const AprioriReport& r) {
    return {{"sup_H1", r.sup_H1}, {"diss", r.diss},         {"sup_Hk", r.sup_Hk},     {"L2_H2", r.L2_H2},
            {"u0_H1", r.u0_H1},   {"omega_0T", r.omega_0T}, {"growth", r.growth}, {"log_ratio", r.log_ratio}, {"bounded", r.bounded}};
}

nlohmann::json to_json(const RateFit& r) {
    nlohmann::json pts = nlohmann::json::array();
    for (auto [x, y] : r.points) pts.push_back({x, y});
    return {{"slope", r.slope}, {"intercept", r.intercept}, {"r2", r.r2}, {"points", pts}};
}

nlohmann::json to_json(const DissipationReport& r) {
    return {{"max_defect", r.max_defect}, {"max_increase", r.max_increase}, {"nonincreasing", r.nonincreasing},
            {"steps", r.defects.size()}};
}

}  // namespace rllg
