#include "rough_llg/rough_core.hpp"

#include <algorithm>
#include <limits>
#include <mutex>
#include <string>

namespace rllg {

TimeGrid::TimeGrid(double horizon, int steps) : T_(horizon), N_(steps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
    if (steps < 1) throw std::invalid_argument("TimeGrid: need at least one step, got " + std::to_string(steps));
}

PairPowers::PairPowers(int nodes, double p) : nodes_(nodes), p_(p) {
    if (p < 1.0) throw std::invalid_argument("p-variation: p must be >= 1");
    if (nodes < 1) throw std::invalid_argument("p-variation: empty grid");
    data_.assign(static_cast<std::size_t>(nodes) * (nodes - 1) / 2, 0.0);
}

PairPowers::PairPowers(int nodes, double p, const std::function<double(int, int)>& norm) : PairPowers(nodes, p) {
    for (int i = 0; i < nodes; ++i)
        for (int j = i + 1; j < nodes; ++j) data_[offset(i) + (j - i - 1)] = std::pow(norm(i, j), p);
}

PairPowers PairPowers::from_rows(int nodes, double p, const std::function<void(int, std::span<double>)>& row) {
    PairPowers out(nodes, p);
    for (int i = 0; i + 1 < nodes; ++i) {
        std::span<double> r(out.data_.data() + out.offset(i), static_cast<std::size_t>(nodes - i - 1));
        row(i, r);
        for (double& v : r) v = std::pow(v, p);
    }
    return out;
}

std::vector<double> p_variation_row(const PairPowers& pw, int s, int t) {
    if (s > t || s < 0 || t >= pw.nodes()) throw std::out_of_range("p_variation: bad interval");
    std::vector<double> best(t - s + 1, 0.0);
    for (int j = s + 1; j <= t; ++j) {
        double m = 0.0;
        for (int i = s; i < j; ++i) m = std::max(m, best[i - s] + pw(i, j));
        best[j - s] = m;
    }
    return best;
}

double p_variation_power(const PairPowers& pw, int s, int t) { return p_variation_row(pw, s, t).back(); }

double p_variation(const PairPowers& pw, int s, int t) {
    return std::pow(p_variation_power(pw, s, t), 1.0 / pw.p());
}

double p_variation(int nodes, double p, const std::function<double(int, int)>& norm, int s, int t) {
    if (s > t || s < 0 || t >= nodes) throw std::out_of_range("p_variation: bad interval");
    if (p < 1.0) throw std::invalid_argument("p-variation: p must be >= 1");
    std::vector<double> best(t - s + 1, 0.0);
    for (int j = s + 1; j <= t; ++j) {
        double m = 0.0;
        for (int i = s; i < j; ++i) m = std::max(m, best[i - s] + std::pow(norm(i, j), p));
        best[j - s] = m;
    }
    return std::pow(best.back(), 1.0 / p);
}

double p_variation_power_streaming(int s, int t, double p,
                                   const std::function<void(int, int, std::span<double>)>& row) {
    if (s > t || s < 0) throw std::out_of_range("p_variation: bad interval");
    if (p < 1.0) throw std::invalid_argument("p-variation: p must be >= 1");
    std::vector<double> best(t - s + 1, 0.0);
    std::vector<double> buf(t - s);
    // best[j] is final once every i < j has been relaxed into it.
    for (int i = s; i < t; ++i) {
        std::span<double> r(buf.data(), static_cast<std::size_t>(t - i));
        row(i, t, r);
        const double base = best[i - s];
        for (int j = i + 1; j <= t; ++j) {
            const double cand = base + std::pow(r[j - i - 1], p);
            if (cand > best[j - s]) best[j - s] = cand;
        }
    }
    return best.back();
}

Control control_from_pvar(std::shared_ptr<const PairPowers> pw) {
    struct Cache {
        std::mutex mu;
        std::map<int, std::vector<double>> rows;
    };
    auto cache = std::make_shared<Cache>();
    const int nodes = pw->nodes();
    return Control(nodes, [pw, cache, nodes](int s, int t) {
        if (s > t) throw std::invalid_argument("control: need s <= t");
        std::lock_guard<std::mutex> lock(cache->mu);
        if (t >= nodes) throw std::out_of_range("control: bad interval");
        auto& row = cache->rows[s];
        if (static_cast<int>(row.size()) <= t - s) row = p_variation_row(*pw, s, t);
        return row[t - s];
    });
}

Control combined_control(const Control& first, const Control& second) {
    return Control(first.nodes(), [first, second](int s, int t) {
        const double w1 = first(s, t);
        return w1 + second(s, t) + w1 * w1;
    });
}

double superadditivity_violation(const Control& w) {
    double worst = -std::numeric_limits<double>::infinity();
    const int n = w.nodes();
    for (int s = 0; s < n; ++s)
        for (int u = s; u < n; ++u)
            for (int t = u; t < n; ++t) worst = std::max(worst, w(s, u) + w(u, t) - w(s, t));
    return worst;
}

SewingResult sew(int nodes, const Germ& germ, int stride, const Control* omega, double zeta) {
    if (stride < 1 || (nodes - 1) % stride != 0)
        throw std::invalid_argument("sew: stride must divide the number of steps");
    SewingResult out;
    out.stride = stride;
    const int parts = (nodes - 1) / stride;
    Eigen::VectorXd acc = germ(0, std::min(stride, nodes - 1)) * 0.0;
    out.integral.reserve(parts + 1);
    out.integral.push_back(acc);
    for (int k = 0; k < parts; ++k) {
        acc += germ(k * stride, (k + 1) * stride);
        out.integral.push_back(acc);
    }
    if (omega != nullptr) {
        for (auto [s, t] : dyadic_windows(parts)) {
            const double w = (*omega)(s * stride, t * stride);
            if (w <= 0.0) continue;
            const double r = sewing_remainder(out, germ, s * stride, t * stride).norm();
            out.max_ratio = std::max(out.max_ratio, r / std::pow(w, zeta));
            ++out.windows;
        }
    }
    return out;
}

Eigen::VectorXd sewing_remainder(const SewingResult& r, const Germ& germ, int s, int t) {
    if (s % r.stride != 0 || t % r.stride != 0) throw std::invalid_argument("sewing_remainder: not a partition node");
    return (r.integral[t / r.stride] - r.integral[s / r.stride]) - germ(s, t);
}

std::vector<std::pair<int, int>> dyadic_windows(int steps, int min_log2_len, int max_log2_len) {
    std::vector<std::pair<int, int>> out;
    for (int l = std::max(0, min_log2_len); l <= max_log2_len && l < 31; ++l) {
        const int len = 1 << l;
        if (len > steps) break;
        for (int s = 0; s + len <= steps; s += len) out.emplace_back(s, s + len);
    }
    return out;
}

}  // namespace rllg
