#pragma once

// Two-index maps over a uniform time grid: the delta operators, Chen
// reconstruction from per-interval generators, exact discrete p-variation,
// controls, and a sewing engine (compensated Riemann sums with remainders).

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rllg {

class TimeGrid {
public:
    TimeGrid(double horizon, int steps);

    double horizon() const { return T_; }
    int steps() const { return N_; }
    int nodes() const { return N_ + 1; }
    double dt() const { return T_ / N_; }
    double node(int i) const { return i == N_ ? T_ : i * dt(); }

    bool operator==(const TimeGrid&) const = default;

private:
    double T_;
    int N_;
};

/// Dense upper-triangular storage of V_{s,t} for node indices s <= t.
template <class V>
class TwoIndexMap {
public:
    TwoIndexMap(int nodes, const V& zero) : nodes_(nodes), data_(static_cast<std::size_t>(nodes) * nodes, zero) {}

    int nodes() const { return nodes_; }
    V& operator()(int s, int t) { return data_[index(s, t)]; }
    const V& operator()(int s, int t) const { return data_[index(s, t)]; }

private:
    std::size_t index(int s, int t) const {
        if (s > t || s < 0 || t >= nodes_) throw std::out_of_range("TwoIndexMap: need 0 <= s <= t < nodes");
        return static_cast<std::size_t>(s) * nodes_ + t;
    }
    int nodes_;
    std::vector<V> data_;
};

/// delta g_{s,t} = g_t - g_s
template <class V>
TwoIndexMap<V> delta2(std::span<const V> path) {
    const int n = static_cast<int>(path.size());
    TwoIndexMap<V> out(n, path[0] - path[0]);
    for (int s = 0; s < n; ++s)
        for (int t = s; t < n; ++t) out(s, t) = path[t] - path[s];
    return out;
}

/// delta G_{s,u,t} = G_{s,t} - G_{s,u} - G_{u,t}
template <class V>
V delta3(const TwoIndexMap<V>& G, int s, int u, int t) {
    if (!(s <= u && u <= t)) throw std::invalid_argument("delta3: need s <= u <= t");
    return G(s, t) - G(s, u) - G(u, t);
}

/// Folds per-interval generators (level1_i, level2_i) on [t_i, t_{i+1}] into
/// the pair value on [t_s, t_t], left to right:
///   level2_{s,t} = level2_{s,u} + level2_{u,t} + compose(level1_{s,u}, level1_{u,t}).
template <class L1, class L2, class Compose>
std::pair<L1, L2> chen_fold(std::span<const L1> level1, std::span<const L2> level2, int s, int t,
                            Compose&& compose) {
    if (s > t) throw std::invalid_argument("chen reconstruction: need s <= t");
    if (t > static_cast<int>(level1.size()) || level1.size() != level2.size() || level1.empty())
        throw std::out_of_range("chen reconstruction: interval outside generator range");
    L1 a = level1[0] * 0.0;
    L2 A = level2[0] * 0.0;
    for (int i = s; i < t; ++i) {
        A = A + level2[i] + compose(a, level1[i]);
        a = a + level1[i];
    }
    return {std::move(a), std::move(A)};
}

/// Operator-valued Chen rule: GG_{s,t} = GG_{s,u} + GG_{u,t} + G_{u,t} G_{s,u}.
template <class M>
std::pair<M, M> chen_reconstruct(std::span<const M> level1, std::span<const M> level2, int s, int t) {
    return chen_fold<M, M>(level1, level2, s, t, [](const M& left, const M& right) -> M { return right * left; });
}

/// Cached ||G_{t_i,t_j}||^p for all node pairs of a grid, the input of the
/// p-variation dynamic programme.
class PairPowers {
public:
    /// norm(i, j) returns ||G_{t_i,t_j}||, called once per pair i < j.
    PairPowers(int nodes, double p, const std::function<double(int, int)>& norm);
    /// row(i, out) fills out[j - i - 1] = ||G_{t_i,t_j}|| for j = i+1 .. nodes-1.
    static PairPowers from_rows(int nodes, double p, const std::function<void(int, std::span<double>)>& row);

    int nodes() const { return nodes_; }
    double p() const { return p_; }
    double operator()(int i, int j) const { return data_[offset(i) + (j - i - 1)]; }

private:
    PairPowers(int nodes, double p);
    std::size_t offset(int i) const {
        return static_cast<std::size_t>(i) * (2 * static_cast<std::size_t>(nodes_) - i - 1) / 2;
    }
    int nodes_;
    double p_;
    std::vector<double> data_;
};

/// sup over node partitions of [s,t] of sum ||G||^p, i.e. the p-th power of
/// the p-variation. O((t-s)^2).
double p_variation_power(const PairPowers& pw, int s, int t);
/// ||G||_{p-var,[s,t]}
double p_variation(const PairPowers& pw, int s, int t);
/// Convenience overload for callers with a norm callback.
double p_variation(int nodes, double p, const std::function<double(int, int)>& norm, int s, int t);
/// Same DP without storing pair values: row(i, out) as in PairPowers, rows
/// visited in increasing i over [s, t].
double p_variation_power_streaming(int s, int t, double p, const std::function<void(int, int, std::span<double>)>& row);
/// DP values omega(s, t_j) for all j in [s, t]; out[j - s].
std::vector<double> p_variation_row(const PairPowers& pw, int s, int t);

/// A superadditive omega(s,t) on node pairs.
class Control {
public:
    using Fn = std::function<double(int, int)>;
    Control(int nodes, Fn fn) : nodes_(nodes), fn_(std::move(fn)) {}
    double operator()(int s, int t) const { return s == t ? 0.0 : fn_(s, t); }
    int nodes() const { return nodes_; }

private:
    int nodes_;
    Fn fn_;
};

/// omega(s,t) = p_variation(G, p, [s,t])^p, rows computed lazily and cached.
Control control_from_pvar(std::shared_ptr<const PairPowers> pw);
/// omega_G + omega_GG + omega_G^2 (the combined driver control).
Control combined_control(const Control& first, const Control& second);
/// Max of omega(s,u) + omega(u,t) - omega(s,t) over all node triples (<= 0 for a control).
double superadditivity_violation(const Control& w);

/// Output of the sewing engine: the additive path on nodes and the maximal
/// ratio ||I^natural_{s,t}|| / omega(s,t)^zeta over dyadic windows.
struct SewingResult {
    int stride = 1;
    std::vector<Eigen::VectorXd> integral;  ///< I at partition nodes k*stride, I_0 = 0
    double max_ratio = 0.0;
    int windows = 0;
};

using Germ = std::function<Eigen::VectorXd(int, int)>;

/// Compensated Riemann sums of `germ` over the node partition with the given
/// stride (stride 1 = every node; the node count minus one must be divisible).
SewingResult sew(int nodes, const Germ& germ, int stride = 1, const Control* omega = nullptr, double zeta = 1.0);
/// I^natural_{s,t} = (I_t - I_s) - H_{s,t}; s and t must be partition nodes.
Eigen::VectorXd sewing_remainder(const SewingResult& r, const Germ& germ, int s, int t);

/// Dyadic windows [k 2^l, (k+1) 2^l] of a grid with `steps` intervals, l from
/// min_level (window length 2^min_level steps) up to the full grid.
std::vector<std::pair<int, int>> dyadic_windows(int steps, int min_log2_len = 0, int max_log2_len = 62);

}  // namespace rllg
