#pragma once

#include "support.hpp"

#include "rough_llg/rough_core.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace rllg::testing {

/// Exhaustive search over all partitions of [s, t]; sums left to right.
inline double brute_pvar_power(const std::vector<double>& x, double p, int s, int t) {
    const int inner = t - s - 1;
    double best = 0.0;
    for (long mask = 0; mask < (1L << std::max(inner, 0)); ++mask) {
        double sum = 0.0;
        int prev = s;
        for (int k = 0; k < inner; ++k)
            if (mask & (1L << k)) {
                sum += std::pow(std::abs(x[s + 1 + k] - x[prev]), p);
                prev = s + 1 + k;
            }
        sum += std::pow(std::abs(x[t] - x[prev]), p);
        best = std::max(best, sum);
    }
    return best;
}

inline double dp_pvar_power(const std::vector<double>& x, double p, int s, int t) {
    PairPowers pw(static_cast<int>(x.size()), p, [&](int i, int j) { return std::abs(x[j] - x[i]); });
    return p_variation_power(pw, s, t);
}

struct ProductRuleDefects {
    double vector = 0.0;   ///< delta(G g) against -G_{u,t} delta g + (delta G) g_s
    double product = 0.0;  ///< delta(A B) for increments A, B
    double general = 0.0;  ///< delta(G H) for arbitrary two-index G, H
};

/// Worst defects of the product rules for delta over random two-index instances.
inline ProductRuleDefects product_rule_defects(std::uint64_t seed, int trials, int n = 6) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    ProductRuleDefects worst;
    for (int trial = 0; trial < trials; ++trial) {
        TwoIndexMap<Mat3> G(n, Mat3::Zero());
        std::vector<Vec3> g(n);
        for (int s = 0; s < n; ++s) {
            g[s] = Vec3(N(rng), N(rng), N(rng));
            for (int t = s; t < n; ++t) G(s, t) = random_mat(rng);
        }
        TwoIndexMap<Vec3> Gg(n, Vec3::Zero());
        for (int s = 0; s < n; ++s)
            for (int t = s; t < n; ++t) Gg(s, t) = G(s, t) * g[s];

        std::vector<Mat3> a(n), b(n);
        for (int i = 0; i < n; ++i) a[i] = random_mat(rng), b[i] = random_mat(rng);
        const auto A = delta2<Mat3>(a), B = delta2<Mat3>(b);
        TwoIndexMap<Mat3> AB(n, Mat3::Zero()), H(n, Mat3::Zero()), GH(n, Mat3::Zero());
        for (int s = 0; s < n; ++s)
            for (int t = s; t < n; ++t) {
                AB(s, t) = A(s, t) * B(s, t);
                H(s, t) = random_mat(rng);
                GH(s, t) = G(s, t) * H(s, t);
            }

        for (int s = 0; s < n; ++s)
            for (int u = s; u < n; ++u)
                for (int t = u; t < n; ++t) {
                    const Vec3 rhs1 = -G(u, t) * (g[u] - g[s]) + delta3(G, s, u, t) * g[s];
                    worst.vector = std::max(worst.vector, (delta3(Gg, s, u, t) - rhs1).cwiseAbs().maxCoeff());
                    const Mat3 rhs2 = A(s, u) * B(u, t) + A(u, t) * B(s, u);
                    worst.product = std::max(worst.product, (delta3(AB, s, u, t) - rhs2).cwiseAbs().maxCoeff());
                    const Mat3 dG = delta3(G, s, u, t), dH = delta3(H, s, u, t);
                    const Mat3 rhs3 = G(s, u) * H(u, t) + G(u, t) * H(s, u) + dG * H(s, t) + G(s, t) * dH - dG * dH;
                    worst.general = std::max(worst.general, (delta3(GH, s, u, t) - rhs3).cwiseAbs().maxCoeff());
                }
    }
    return worst;
}

}  // namespace rllg::testing
