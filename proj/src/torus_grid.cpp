#include "rough_llg/torus_grid.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rllg {

Grid::Grid(int n) : n_(n) {
    if (n < 4) throw std::invalid_argument("Grid: need at least 4 points, got " + std::to_string(n));
}

GridField::GridField(const Grid& g, std::vector<Vec3> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != g.size())
        throw std::invalid_argument("GridField: value count does not match grid size");
}

bool GridField::all_finite() const {
    for (const auto& v : values)
        if (!v.allFinite()) return false;
    return true;
}

bool GridField::sphere_valued(double tol) const { return all_finite() && max_norm_deviation() <= tol; }

double GridField::max_norm_deviation() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v.norm() - 1.0));
    return m;
}

GridField& GridField::operator+=(const GridField& o) {
    for (int i = 0; i < size(); ++i) values[i] += o.values[i];
    return *this;
}

GridField& GridField::operator-=(const GridField& o) {
    for (int i = 0; i < size(); ++i) values[i] -= o.values[i];
    return *this;
}

GridField& GridField::operator*=(double a) {
    for (auto& v : values) v *= a;
    return *this;
}

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a -= b; }
GridField operator*(double a, GridField f) { return f *= a; }

namespace {

template <class T>
void diff_into(std::span<const T> f, const Grid& g, int order, std::span<T> out) {
    const int n = g.size();
    const double h = g.spacing();
    if (order == 1) {
        const double c = 1.0 / (2.0 * h);
        for (int i = 0; i < n; ++i) out[i] = (f[g.wrap(i + 1)] - f[g.wrap(i - 1)]) * c;
    } else if (order == 2) {
        const double c = 1.0 / (h * h);
        for (int i = 0; i < n; ++i) out[i] = (f[g.wrap(i + 1)] - 2.0 * f[i] + f[g.wrap(i - 1)]) * c;
    } else {
        throw std::invalid_argument("diff: order must be 1 or 2");
    }
}

}  // namespace

GridField diff(const GridField& f, int order) {
    GridField out(f.grid);
    diff_into<Vec3>(f.values, f.grid, order, out.values);
    return out;
}

std::vector<double> diff(std::span<const double> f, const Grid& g, int order) {
    std::vector<double> out(g.size());
    diff_into<double>(f, g, order, out);
    return out;
}

std::vector<double> derivative(std::span<const double> f, const Grid& g, int j) {
    std::vector<double> cur(f.begin(), f.end());
    for (int m = 0; m < j / 2; ++m) cur = diff(cur, g, 2);
    if (j % 2 == 1) cur = diff(cur, g, 1);
    return cur;
}

GridField derivative(const GridField& f, int j) {
    GridField cur = f;
    for (int m = 0; m < j / 2; ++m) cur = diff(cur, 2);
    if (j % 2 == 1) cur = diff(cur, 1);
    return cur;
}

double lp_norm(const GridField& f, double p) {
    if (std::isinf(p)) return linf_norm(f);
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    double s = 0.0;
    for (const auto& v : f.values) s += std::pow(v.norm(), p);
    return std::pow(f.grid.spacing() * s, 1.0 / p);
}

double lp_norm(std::span<const double> f, const Grid& g, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f) m = std::max(m, std::abs(v));
        return m;
    }
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    double s = 0.0;
    for (double v : f) s += std::pow(std::abs(v), p);
    return std::pow(g.spacing() * s, 1.0 / p);
}

double linf_norm(const GridField& f) {
    double m = 0.0;
    for (const auto& v : f.values) m = std::max(m, v.norm());
    return m;
}

double inner(const GridField& f, const GridField& g) {
    double s = 0.0;
    for (int i = 0; i < f.size(); ++i) s += f[i].dot(g[i]);
    return f.grid.spacing() * s;
}

double hk_norm_sq(const GridField& f, int k) {
    double total = 0.0;
    GridField even = f;  // D^{2m} f
    for (int j = 0; j <= k; ++j) {
        if (j > 0 && j % 2 == 0) even = diff(even, 2);
        const GridField dj = (j % 2 == 1) ? diff(even, 1) : even;
        total += inner(dj, dj);
    }
    return total;
}

double hk_norm_sq(std::span<const double> f, const Grid& g, int k) {
    double total = 0.0;
    std::vector<double> even(f.begin(), f.end());
    for (int j = 0; j <= k; ++j) {
        if (j > 0 && j % 2 == 0) even = diff(even, g, 2);
        double s = 0.0;
        if (j % 2 == 1) {
            for (double v : diff(even, g, 1)) s += v * v;
        } else {
            for (double v : even) s += v * v;
        }
        total += g.spacing() * s;
    }
    return total;
}

double hk_norm(const GridField& f, int k) { return std::sqrt(hk_norm_sq(f, k)); }

std::vector<double> gradient_sq(const GridField& u) {
    const Grid& g = u.grid;
    const double inv = 1.0 / (2.0 * g.spacing() * g.spacing());
    std::vector<double> out(g.size());
    for (int i = 0; i < g.size(); ++i) {
        const Vec3 fwd = u[g.wrap(i + 1)] - u[i];
        const Vec3 bwd = u[i] - u[g.wrap(i - 1)];
        out[i] = (fwd.squaredNorm() + bwd.squaredNorm()) * inv;
    }
    return out;
}

double laplacian_eigenvalue(const Grid& g, int k) {
    const double h = g.spacing();
    return (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k * h)) / (h * h);
}

namespace {

// Tridiagonal solve with constant off-diagonal `off` and diagonal `diag`
// (first/last entries overridable).
void thomas(std::span<const double> diag, double off, std::span<const double> rhs, std::span<double> x) {
    const int n = static_cast<int>(diag.size());
    std::vector<double> c(n);
    std::vector<double> d(n);
    c[0] = off / diag[0];
    d[0] = rhs[0] / diag[0];
    for (int i = 1; i < n; ++i) {
        const double m = diag[i] - off * c[i - 1];
        c[i] = off / m;
        d[i] = (rhs[i] - off * d[i - 1]) / m;
    }
    x[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
}

}  // namespace

std::vector<double> imex_solve(std::span<const double> rhs, const Grid& g, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("imex_solve: dt must be positive");
    const int n = g.size();
    const double r = dt / (g.spacing() * g.spacing());
    const double b = 1.0 + 2.0 * r;
    const double off = -r;  // also both corner entries
    // Sherman-Morrison on the cyclic system.
    const double gamma = -b;
    std::vector<double> diag(n, b);
    diag[0] = b - gamma;
    diag[n - 1] = b - off * off / gamma;
    std::vector<double> x(n), z(n), u(n, 0.0);
    thomas(diag, off, rhs, x);
    u[0] = gamma;
    u[n - 1] = off;
    thomas(diag, off, u, z);
    const double fact = (x[0] + off * x[n - 1] / gamma) / (1.0 + z[0] + off * z[n - 1] / gamma);
    for (int i = 0; i < n; ++i) x[i] -= fact * z[i];
    return x;
}

GridField imex_solve(const GridField& rhs, double dt) {
    const int n = rhs.size();
    GridField out(rhs.grid);
    std::vector<double> comp(n);
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < n; ++i) comp[i] = rhs[i][c];
        const auto sol = imex_solve(comp, rhs.grid, dt);
        for (int i = 0; i < n; ++i) out[i][c] = sol[i];
    }
    return out;
}

}  // namespace rllg
