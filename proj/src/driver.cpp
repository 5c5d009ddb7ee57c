#include "rough_llg/driver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace rllg {

Mat3 cross_matrix(const Vec3& xi) {
    Mat3 m;
    m << 0.0, xi[2], -xi[1],
        -xi[2], 0.0, xi[0],
        xi[1], -xi[0], 0.0;
    return m;
}

namespace {

const std::array<Mat3, 9>& basis_products() {
    static const std::array<Mat3, 9> table = [] {
        std::array<Mat3, 9> t;
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) t[k * 3 + l] = cross_matrix(Vec3::Unit(l)) * cross_matrix(Vec3::Unit(k));
        return t;
    }();
    return table;
}

double max_abs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

Mat3 cross_tensor(const Mat3& bb) {
    const auto& t = basis_products();
    Mat3 out = Mat3::Zero();
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) out += bb(k, l) * t[k * 3 + l];
    return out;
}

SpaceRoughDriver::SpaceRoughDriver(Grid grid, TimeGrid tgrid, std::vector<Mat3> first, std::vector<Mat3> second,
                                   std::optional<ModeGenerators> generators)
    : grid_(grid), tgrid_(tgrid), first_(std::move(first)), second_(std::move(second)),
      generators_(std::move(generators)) {
    const std::size_t expected = static_cast<std::size_t>(grid_.size()) * tgrid_.steps();
    if (first_.size() != expected || second_.size() != expected)
        throw std::invalid_argument("SpaceRoughDriver: need one matrix pair per interval and grid point");
}

std::span<const Mat3> SpaceRoughDriver::first_at(int interval) const {
    return {first_.data() + index(interval, 0), static_cast<std::size_t>(grid_.size())};
}

std::span<const Mat3> SpaceRoughDriver::second_at(int interval) const {
    return {second_.data() + index(interval, 0), static_cast<std::size_t>(grid_.size())};
}

std::pair<Mat3, Mat3> SpaceRoughDriver::reconstruct(int s, int t, int point) const {
    if (s > t) throw std::invalid_argument("reconstruct: need s <= t");
    if (t > steps()) throw std::out_of_range("reconstruct: interval outside time grid");
    Mat3 a = Mat3::Zero(), A = Mat3::Zero();
    for (int i = s; i < t; ++i) {
        const Mat3& g = first(i, point);
        A += second(i, point) + g * a;
        a += g;
    }
    return {a, A};
}

std::pair<std::vector<Mat3>, std::vector<Mat3>> SpaceRoughDriver::reconstruct_field(int s, int t) const {
    std::vector<Mat3> a(grid_.size()), A(grid_.size());
    for (int x = 0; x < grid_.size(); ++x) std::tie(a[x], A[x]) = reconstruct(s, t, x);
    return {std::move(a), std::move(A)};
}

SpaceRoughDriver zero_driver(const Grid& grid, const TimeGrid& tgrid) {
    const std::size_t n = static_cast<std::size_t>(grid.size()) * tgrid.steps();
    return SpaceRoughDriver(grid, tgrid, std::vector<Mat3>(n, Mat3::Zero()), std::vector<Mat3>(n, Mat3::Zero()));
}

SpaceRoughDriver lift_simple(std::span<const double> g, const Grid& grid, const ModeRoughPath& rp) {
    if (rp.q() != 3) throw std::invalid_argument("lift_simple: needs a 3-mode rough path");
    if (static_cast<int>(g.size()) != grid.size()) throw std::invalid_argument("lift_simple: profile size mismatch");
    const int n = grid.size(), N = rp.grid().steps();
    std::vector<Mat3> first(static_cast<std::size_t>(n) * N), second(first.size());
    for (int i = 0; i < N; ++i) {
        const Mat3 G = cross_matrix(Vec3(rp.level1()[i]));
        const Mat3 GG = cross_tensor(Mat3(rp.level2()[i]));
        for (int x = 0; x < n; ++x) {
            first[static_cast<std::size_t>(i) * n + x] = g[x] * G;
            second[static_cast<std::size_t>(i) * n + x] = (g[x] * g[x]) * GG;
        }
    }
    ModeGenerators gen{std::vector<std::vector<Vec3>>(3, std::vector<Vec3>(n)), rp, 1.0};
    for (int j = 0; j < 3; ++j)
        for (int x = 0; x < n; ++x) gen.profiles[j][x] = g[x] * Vec3::Unit(j);
    return SpaceRoughDriver(grid, rp.grid(), std::move(first), std::move(second), std::move(gen));
}

SpaceRoughDriver lift_multimode(const std::vector<std::vector<Vec3>>& profiles, const Grid& grid,
                                const ModeRoughPath& rp) {
    const int q = rp.q();
    if (q < 1 || static_cast<int>(profiles.size()) != q)
        throw std::invalid_argument("lift_multimode: one profile per mode required");
    const int n = grid.size(), N = rp.grid().steps();
    for (const auto& p : profiles)
        if (static_cast<int>(p.size()) != n) throw std::invalid_argument("lift_multimode: profile size mismatch");
    std::vector<Mat3> first(static_cast<std::size_t>(n) * N), second(first.size());
    for (int i = 0; i < N; ++i) {
        const auto& db = rp.level1()[i];
        const auto& bb = rp.level2()[i];
        for (int x = 0; x < n; ++x) {
            Vec3 dw = Vec3::Zero();
            Mat3 W = Mat3::Zero();
            for (int j = 0; j < q; ++j) {
                dw += profiles[j][x] * db[j];
                for (int k = 0; k < q; ++k) W += bb(j, k) * profiles[j][x] * profiles[k][x].transpose();
            }
            first[static_cast<std::size_t>(i) * n + x] = cross_matrix(dw);
            second[static_cast<std::size_t>(i) * n + x] = cross_tensor(W);
        }
    }
    return SpaceRoughDriver(grid, rp.grid(), std::move(first), std::move(second), ModeGenerators{profiles, rp, 1.0});
}

SpaceRoughDriver dilate(const SpaceRoughDriver& d, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("dilate: lambda must be >= 0");
    const int n = d.grid().size(), N = d.steps();
    std::vector<Mat3> first, second;
    first.reserve(static_cast<std::size_t>(n) * N);
    second.reserve(first.capacity());
    for (int i = 0; i < N; ++i)
        for (int x = 0; x < n; ++x) {
            first.push_back(lambda * d.first(i, x));
            second.push_back((lambda * lambda) * d.second(i, x));
        }
    auto gen = d.generators();
    if (gen) gen->scale *= lambda;
    return SpaceRoughDriver(d.grid(), d.time_grid(), std::move(first), std::move(second), std::move(gen));
}

SpaceRoughDriver coarsen(const SpaceRoughDriver& d, int factor) {
    if (factor < 1 || d.steps() % factor != 0) throw std::invalid_argument("coarsen: factor must divide N");
    const int n = d.grid().size();
    std::vector<Mat3> first, second;
    for (int i = 0; i < d.steps(); i += factor)
        for (int x = 0; x < n; ++x) {
            auto [a, A] = d.reconstruct(i, i + factor, x);
            first.push_back(a);
            second.push_back(A);
        }
    std::optional<ModeGenerators> gen;
    if (d.generators()) gen = ModeGenerators{d.generators()->profiles, d.generators()->path.coarsen(factor),
                                             d.generators()->scale};
    return SpaceRoughDriver(d.grid(), TimeGrid(d.time_grid().horizon(), d.steps() / factor), std::move(first),
                            std::move(second), std::move(gen));
}

LevyDecomposition levy_decompose(const SpaceRoughDriver& d, int s, int t, int point) {
    auto [G, GG] = d.reconstruct(s, t, point);
    const Mat3 half_sq = 0.5 * G * G;
    const Mat3 sym = 0.5 * (GG + GG.transpose());
    return {GG - half_sq, max_abs(sym - half_sq)};
}

double antisymmetry_defect(const SpaceRoughDriver& d) {
    double worst = 0.0;
    for (int i = 0; i < d.steps(); ++i)
        for (const auto& G : d.first_at(i)) worst = std::max(worst, max_abs(G + G.transpose()));
    return worst;
}

// ---------------------------------------------------------------------------
// Pair norms

namespace {

// Stacked sqrt(h) D^j of each entry, j = 0..k: Euclidean inner products of these
// vectors are H^k inner products of matrix fields.
Eigen::VectorXd hk_embed(const std::vector<Mat3>& field, const Grid& grid, int k) {
    const int n = grid.size();
    Eigen::VectorXd out(9 * (k + 1) * n);
    const double sh = std::sqrt(grid.spacing());
    std::vector<double> entry(n);
    int pos = 0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            for (int x = 0; x < n; ++x) entry[x] = field[x](r, c);
            for (int j = 0; j <= k; ++j) {
                const auto dj = derivative(entry, grid, j);
                for (int x = 0; x < n; ++x) out[pos++] = sh * dj[x];
            }
        }
    return out;
}

double matrix_field_hk_sq(const std::vector<Mat3>& field, const Grid& grid, int k) {
    std::vector<double> entry(grid.size());
    double total = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            for (int x = 0; x < grid.size(); ++x) entry[x] = field[x](r, c);
            total += hk_norm_sq(entry, grid, k);
        }
    return total;
}

void check_compatible(const SpaceRoughDriver& a, const SpaceRoughDriver& b) {
    if (!(a.grid() == b.grid()) || !(a.time_grid() == b.time_grid()))
        throw std::invalid_argument("driver distance: grid mismatch");
}

}  // namespace

struct DriverPairNorms::Impl {
    // Generator route.
    struct Source {
        const ModeRoughPath* path;
        double weight1;  // sign * scale
        double weight2;  // sign * scale^2
        int offset1;     // into level-1 coefficient vector
        int offset2;     // into level-2 coefficient vector
        std::vector<Eigen::VectorXd> prefix;
    };
    int k = 0;
    bool use_generators = false;
    std::vector<Source> sources;
    std::vector<ModeRoughPath> paths;  // owned copies
    Eigen::MatrixXd gram1, gram2;
    int dim1 = 0, dim2 = 0;

    // Dense route.
    const SpaceRoughDriver* d1 = nullptr;
    const SpaceRoughDriver* d2 = nullptr;
    std::optional<SpaceRoughDriver> own1, own2;

    void row(int i, int t, bool second_level, std::span<double> out) const {
        if (use_generators) row_generators(i, t, second_level, out);
        else row_dense(i, t, second_level, out);
    }

    void row_generators(int i, int t, bool second_level, std::span<double> out) const {
        if (!second_level) {
            Eigen::VectorXd c(dim1);
            for (int j = i + 1; j <= t; ++j) {
                c.setZero();
                for (const auto& s : sources)
                    c.segment(s.offset1, s.path->q()) += s.weight1 * (s.prefix[j] - s.prefix[i]);
                out[j - i - 1] = std::sqrt(std::max(0.0, c.dot(gram1 * c)));
            }
            return;
        }
        std::vector<Eigen::VectorXd> x;
        std::vector<Eigen::MatrixXd> X;
        for (const auto& s : sources) {
            x.push_back(Eigen::VectorXd::Zero(s.path->q()));
            X.push_back(Eigen::MatrixXd::Zero(s.path->q(), s.path->q()));
        }
        Eigen::VectorXd c(dim2);
        for (int j = i; j < t; ++j) {
            c.setZero();
            for (std::size_t m = 0; m < sources.size(); ++m) {
                const auto& s = sources[m];
                X[m] += s.path->level2()[j] + x[m] * s.path->level1()[j].transpose();
                x[m] += s.path->level1()[j];
                const int q = s.path->q();
                for (int a = 0; a < q; ++a)
                    for (int b = 0; b < q; ++b) c[s.offset2 + a * q + b] += s.weight2 * X[m](a, b);
            }
            out[j - i] = std::sqrt(std::max(0.0, c.dot(gram2 * c)));
        }
    }

    void row_dense(int i, int t, bool second_level, std::span<double> out) const {
        const Grid& grid = d1->grid();
        const int n = grid.size();
        std::vector<Mat3> a1(n, Mat3::Zero()), A1(n, Mat3::Zero()), a2(n, Mat3::Zero()), A2(n, Mat3::Zero());
        std::vector<Mat3> diff(n);
        for (int j = i; j < t; ++j) {
            for (int x = 0; x < n; ++x) {
                const Mat3& g1 = d1->first(j, x);
                A1[x] += d1->second(j, x) + g1 * a1[x];
                a1[x] += g1;
                if (d2 != nullptr) {
                    const Mat3& g2 = d2->first(j, x);
                    A2[x] += d2->second(j, x) + g2 * a2[x];
                    a2[x] += g2;
                }
                diff[x] = second_level ? Mat3(A1[x] - A2[x]) : Mat3(a1[x] - a2[x]);
            }
            out[j - i] = std::sqrt(matrix_field_hk_sq(diff, grid, k));
        }
    }
};

namespace {

bool same_profiles(const ModeGenerators& a, const ModeGenerators& b) {
    if (a.profiles.size() != b.profiles.size()) return false;
    for (std::size_t j = 0; j < a.profiles.size(); ++j)
        if (a.profiles[j] != b.profiles[j]) return false;
    return true;
}

}  // namespace

DriverPairNorms::DriverPairNorms(const SpaceRoughDriver& d1, const SpaceRoughDriver* d2, int k) {
    if (k < 0) throw std::invalid_argument("driver norms: k must be >= 0");
    if (d2 != nullptr) check_compatible(d1, *d2);
    auto impl = std::make_shared<Impl>();
    impl->k = k;
    const bool gen = d1.generators().has_value() && (d2 == nullptr || d2->generators().has_value());
    if (!gen) {
        impl->own1.emplace(d1);
        impl->d1 = &*impl->own1;
        if (d2 != nullptr) {
            impl->own2.emplace(*d2);
            impl->d2 = &*impl->own2;
        }
        impl_ = std::move(impl);
        return;
    }
    impl->use_generators = true;
    const Grid& grid = d1.grid();
    const int n = grid.size();
    // Profile sets: one per distinct set of profiles.
    std::vector<const std::vector<std::vector<Vec3>>*> sets;
    std::vector<int> set_of;
    std::vector<const ModeGenerators*> gens{&*d1.generators()};
    if (d2 != nullptr) gens.push_back(&*d2->generators());
    for (const auto* g : gens) {
        int found = -1;
        for (std::size_t m = 0; m < sets.size(); ++m)
            if (same_profiles(*g, ModeGenerators{*sets[m], g->path, 1.0})) found = static_cast<int>(m);
        if (found < 0) {
            found = static_cast<int>(sets.size());
            sets.push_back(&g->profiles);
        }
        set_of.push_back(found);
    }
    std::vector<int> off1(sets.size()), off2(sets.size());
    for (std::size_t m = 0; m < sets.size(); ++m) {
        const int q = static_cast<int>(sets[m]->size());
        off1[m] = impl->dim1;
        off2[m] = impl->dim2;
        impl->dim1 += q;
        impl->dim2 += q * q;
    }
    impl->paths.reserve(gens.size());
    for (std::size_t g = 0; g < gens.size(); ++g) impl->paths.push_back(gens[g]->path);
    for (std::size_t g = 0; g < gens.size(); ++g) {
        const double sign = g == 0 ? 1.0 : -1.0;
        const double lam = gens[g]->scale;
        Impl::Source s{&impl->paths[g], sign * lam, sign * lam * lam, off1[set_of[g]], off2[set_of[g]], {}};
        s.prefix.push_back(Eigen::VectorXd::Zero(s.path->q()));
        for (const auto& db : s.path->level1()) s.prefix.push_back(s.prefix.back() + db);
        impl->sources.push_back(std::move(s));
    }
    // Feature embeddings and Gram matrices.
    const int rows = 9 * (k + 1) * n;
    Eigen::MatrixXd f1(rows, impl->dim1), f2(rows, impl->dim2);
    std::vector<Mat3> field(n);
    for (std::size_t m = 0; m < sets.size(); ++m) {
        const auto& prof = *sets[m];
        const int q = static_cast<int>(prof.size());
        for (int j = 0; j < q; ++j) {
            for (int x = 0; x < n; ++x) field[x] = cross_matrix(prof[j][x]);
            f1.col(off1[m] + j) = hk_embed(field, grid, k);
        }
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) {
                for (int x = 0; x < n; ++x) field[x] = cross_matrix(prof[b][x]) * cross_matrix(prof[a][x]);
                f2.col(off2[m] + a * q + b) = hk_embed(field, grid, k);
            }
    }
    impl->gram1 = f1.transpose() * f1;
    impl->gram2 = f2.transpose() * f2;
    impl_ = std::move(impl);
}

void DriverPairNorms::row(int i, int t, bool second_level, std::span<double> out) const {
    impl_->row(i, t, second_level, out);
}

namespace {

double distance_with(const DriverPairNorms& norms, int nodes, double p) {
    const int last = nodes - 1;
    const double w1 = p_variation_power_streaming(
        0, last, p, [&](int i, int t, std::span<double> out) { norms.row(i, t, false, out); });
    const double w2 = p_variation_power_streaming(
        0, last, p / 2.0, [&](int i, int t, std::span<double> out) { norms.row(i, t, true, out); });
    return std::pow(w1, 1.0 / p) + std::pow(w2, 2.0 / p);
}

}  // namespace

double driver_distance(const SpaceRoughDriver& d1, const SpaceRoughDriver& d2, double p, int k) {
    if (p < 2.0) throw std::invalid_argument("driver_distance: need p >= 2 so that p/2 >= 1");
    return distance_with(DriverPairNorms(d1, &d2, k), d1.time_grid().nodes(), p);
}

double driver_distance_dense(const SpaceRoughDriver& d1, const SpaceRoughDriver& d2, double p, int k) {
    if (p < 2.0) throw std::invalid_argument("driver_distance: need p >= 2 so that p/2 >= 1");
    check_compatible(d1, d2);
    const SpaceRoughDriver a(d1.grid(), d1.time_grid(), {d1.first_at(0).begin(), d1.first_at(d1.steps() - 1).end()},
                             {d1.second_at(0).begin(), d1.second_at(d1.steps() - 1).end()});
    const SpaceRoughDriver b(d2.grid(), d2.time_grid(), {d2.first_at(0).begin(), d2.first_at(d2.steps() - 1).end()},
                             {d2.second_at(0).begin(), d2.second_at(d2.steps() - 1).end()});
    return distance_with(DriverPairNorms(a, &b, k), d1.time_grid().nodes(), p);
}

DriverControls driver_controls(const SpaceRoughDriver& d, double p, int k) {
    if (p < 2.0) throw std::invalid_argument("driver_controls: need p >= 2");
    const DriverPairNorms norms(d, nullptr, k);
    const int nodes = d.time_grid().nodes();
    auto first = std::make_shared<const PairPowers>(PairPowers::from_rows(
        nodes, p, [&](int i, std::span<double> out) { norms.row(i, nodes - 1, false, out); }));
    auto second = std::make_shared<const PairPowers>(PairPowers::from_rows(
        nodes, p / 2.0, [&](int i, std::span<double> out) { norms.row(i, nodes - 1, true, out); }));
    Control c1 = control_from_pvar(first);
    Control c2 = control_from_pvar(second);
    Control both = combined_control(c1, c2);
    return {c1, c2, both};
}

// ---------------------------------------------------------------------------
// Structure checks

StructureDefects structure_defects(const SpaceRoughDriver& d) {
    const int n = d.grid().size(), N = d.steps();
    const std::size_t slab = 9 * static_cast<std::size_t>(n);
    // Component-major layout [node or interval][entry][point], so that the
    // innermost loop runs over grid points.
    std::vector<double> F(slab * N), S(slab * N), B1(slab * (N + 1), 0.0), B2(slab * (N + 1), 0.0);
    for (int t = 0; t < N; ++t)
        for (int x = 0; x < n; ++x)
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) {
                    F[t * slab + (r * 3 + c) * n + x] = d.first(t, x)(r, c);
                    S[t * slab + (r * 3 + c) * n + x] = d.second(t, x)(r, c);
                }
    for (int x = 0; x < n; ++x) {
        Mat3 a = Mat3::Zero(), A = Mat3::Zero();
        for (int t = 0; t < N; ++t) {
            const Mat3& g = d.first(t, x);
            A += d.second(t, x) + g * a;
            a += g;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) {
                    B1[(t + 1) * slab + (r * 3 + c) * n + x] = a(r, c);
                    B2[(t + 1) * slab + (r * 3 + c) * n + x] = A(r, c);
                }
        }
    }
    std::vector<double> a(slab), A(slab);
    std::vector<double> m_anchor(n, 0.0), m_add(n, 0.0), m_levy(n, 0.0), m_anti(n, 0.0), m_first(n, 0.0);
    for (int s = 0; s < N; ++s) {
        std::fill(a.begin(), a.end(), 0.0);
        std::fill(A.begin(), A.end(), 0.0);
        const double* b1s = B1.data() + s * slab;
        const double* b2s = B2.data() + s * slab;
        for (int t = s; t < N; ++t) {
            const double* g = F.data() + t * slab;
            const double* gg = S.data() + t * slab;
            const double* b1t = B1.data() + (t + 1) * slab;
            const double* b2t = B2.data() + (t + 1) * slab;
            double* __restrict pa = a.data();
            double* __restrict pA = A.data();
            const auto at = [n](const double* v, int e) { return v + e * n; };
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) {
                    double* Ae = pA + (r * 3 + c) * n;
                    const double *g0 = at(g, r * 3), *g1 = at(g, r * 3 + 1), *g2 = at(g, r * 3 + 2);
                    const double *a0 = at(pa, c), *a1 = at(pa, 3 + c), *a2 = at(pa, 6 + c), *s2 = at(gg, r * 3 + c);
                    for (int x = 0; x < n; ++x) Ae[x] += s2[x] + g0[x] * a0[x] + g1[x] * a1[x] + g2[x] * a2[x];
                }
            for (std::size_t i = 0; i < slab; ++i) pa[i] += g[i];
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) {
                    const int e = r * 3 + c;
                    const double *ar0 = at(pa, r * 3), *ar1 = at(pa, r * 3 + 1), *ar2 = at(pa, r * 3 + 2);
                    const double *ac0 = at(pa, c), *ac1 = at(pa, 3 + c), *ac2 = at(pa, 6 + c);
                    const double *bs0 = at(b1s, c), *bs1 = at(b1s, 3 + c), *bs2 = at(b1s, 6 + c);
                    const double *ae = at(pa, e), *aT = at(pa, c * 3 + r), *Ae = at(pA, e), *AT = at(pA, c * 3 + r);
                    const double *B2t = at(b2t, e), *B2s = at(b2s, e), *B1t = at(b1t, e), *B1s = at(b1s, e);
#pragma GCC ivdep
                    for (int x = 0; x < n; ++x) {
                        const double ab = ar0[x] * bs0[x] + ar1[x] * bs1[x] + ar2[x] * bs2[x];
                        const double sq = ar0[x] * ac0[x] + ar1[x] * ac1[x] + ar2[x] * ac2[x];
                        m_anchor[x] = std::max(m_anchor[x], std::abs(B2t[x] - B2s[x] - Ae[x] - ab));
                        m_add[x] = std::max(m_add[x], std::abs(B1t[x] - B1s[x] - ae[x]));
                        m_levy[x] = std::max(m_levy[x], std::abs(0.5 * (Ae[x] + AT[x]) - 0.5 * sq));
                        m_anti[x] = std::max(m_anti[x], std::abs(ae[x] + aT[x]));
                        m_first[x] = std::max(m_first[x], std::abs(ae[x]));
                    }
                }
        }
    }
    StructureDefects out;
    double max_first = 0.0;
    for (int x = 0; x < n; ++x) {
        out.chen_anchor = std::max(out.chen_anchor, m_anchor[x]);
        out.additivity = std::max(out.additivity, m_add[x]);
        out.levy = std::max(out.levy, m_levy[x]);
        out.antisymmetry = std::max(out.antisymmetry, m_anti[x]);
        max_first = std::max(max_first, m_first[x]);
    }
    out.chen = 3.0 * out.chen_anchor + 3.0 * max_first * out.additivity;
    return out;
}

double chen_defect_exhaustive(const SpaceRoughDriver& d) {
    const int n = d.grid().size(), N = d.steps();
    double worst = 0.0;
    for (int x = 0; x < n; ++x) {
        TwoIndexMap<Mat3> G(N + 1, Mat3::Zero()), GG(N + 1, Mat3::Zero());
        for (int s = 0; s <= N; ++s) {
            Mat3 a = Mat3::Zero(), A = Mat3::Zero();
            for (int t = s; t < N; ++t) {
                const Mat3& g = d.first(t, x);
                A += d.second(t, x) + g * a;
                a += g;
                G(s, t + 1) = a;
                GG(s, t + 1) = A;
            }
        }
        for (int s = 0; s <= N; ++s)
            for (int u = s; u <= N; ++u)
                for (int t = u; t <= N; ++t)
                    worst = std::max(worst, max_abs(delta3(GG, s, u, t) - G(u, t) * G(s, u)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Serialization

void write_driver_csv(const SpaceRoughDriver& d, std::ostream& os) {
    os << "# rough-llg driver v1 n=" << d.grid().size() << " N=" << d.steps() << " T=" << std::setprecision(17)
       << d.time_grid().horizon() << "\n";
    os << std::setprecision(17);
    for (int i = 0; i < d.steps(); ++i)
        for (int x = 0; x < d.grid().size(); ++x) {
            os << i << "," << x;
            for (const Mat3* m : {&d.first(i, x), &d.second(i, x)})
                for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < 3; ++c) os << "," << (*m)(r, c);
            os << "\n";
        }
}

SpaceRoughDriver read_driver_csv(std::istream& is) {
    std::string header;
    std::getline(is, header);
    const std::string magic = "# rough-llg driver v1";
    if (header.rfind(magic, 0) != 0) throw std::runtime_error("driver csv: bad header");
    int n = 0, N = 0;
    double T = 0.0;
    std::istringstream hs(header.substr(magic.size()));
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "n") n = std::stoi(val);
        else if (key == "N") N = std::stoi(val);
        else if (key == "T") T = std::stod(val);
    }
    const Grid grid(n);
    const TimeGrid tgrid(T, N);
    std::vector<Mat3> first(static_cast<std::size_t>(n) * N), second(first.size());
    std::string line;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::array<double, 20> v{};
        for (double& e : v) {
            if (!std::getline(ls, cell, ',')) throw std::runtime_error("driver csv: short row");
            e = std::stod(cell);
        }
        const int i = static_cast<int>(v[0]), x = static_cast<int>(v[1]);
        if (i < 0 || i >= N || x < 0 || x >= n) throw std::runtime_error("driver csv: index out of range");
        const std::size_t idx = static_cast<std::size_t>(i) * n + x;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                first[idx](r, c) = v[2 + r * 3 + c];
                second[idx](r, c) = v[11 + r * 3 + c];
            }
        ++rows;
    }
    if (rows != first.size()) throw std::runtime_error("driver csv: missing rows");
    return SpaceRoughDriver(grid, tgrid, std::move(first), std::move(second));
}

}  // namespace rllg
