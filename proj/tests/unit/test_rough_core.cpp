#include "doctest.h"
#include "oracles.hpp"

#include "rough_llg/rough_core.hpp"

#include <random>

using namespace rllg;
using namespace rllg::testing;

TEST_CASE("time grid") {
    const TimeGrid g(0.3, 7);
    CHECK(g.nodes() == 8);
    CHECK(g.node(7) == 0.3);
    CHECK(g.dt() == doctest::Approx(0.3 / 7));
}

TEST_CASE("delta2") {
    const std::vector<double> c{2.0, 2.0, 2.0, 2.0};
    const auto dc = delta2<double>(c);
    for (int s = 0; s < 4; ++s)
        for (int t = s; t < 4; ++t) CHECK(dc(s, t) == 0.0);

    const std::vector<double> lin{0.0, 0.5, 1.0};
    const auto dl = delta2<double>(lin);
    CHECK(dl(0, 2) == 1.0);
    CHECK(dl(0, 1) == 0.5);
    CHECK(dl(1, 1) == 0.0);
    CHECK_THROWS_AS(dl(2, 1), std::out_of_range);
}

TEST_CASE("delta of an increment vanishes") {
    std::mt19937_64 rng(1);
    std::vector<Mat3> path;
    for (int i = 0; i < 9; ++i) path.push_back(random_mat(rng));
    const auto G = delta2<Mat3>(path);
    double worst = 0.0;
    for (int s = 0; s < 9; ++s)
        for (int u = s; u < 9; ++u)
            for (int t = u; t < 9; ++t) worst = std::max(worst, delta3(G, s, u, t).cwiseAbs().maxCoeff());
    CHECK(worst <= 1e-14);
    CHECK_THROWS_AS(delta3(G, 3, 2, 5), std::invalid_argument);
}

TEST_CASE("product rules for delta on random instances") {
    const ProductRuleDefects d = product_rule_defects(2024, 1000);
    CHECK(d.vector <= 1e-12);
    CHECK(d.product <= 1e-12);
    CHECK(d.general <= 1e-12);
}

TEST_CASE("chen reconstruction") {
    std::mt19937_64 rng(7);
    const Mat3 a = random_mat(rng), b = random_mat(rng), A = random_mat(rng), B = random_mat(rng);
    const std::vector<Mat3> l1{a, b}, l2{A, B};
    const auto [G, GG] = chen_reconstruct<Mat3>(l1, l2, 0, 2);
    CHECK((G - (a + b)).norm() <= 1e-14);
    CHECK((GG - (A + B + b * a)).norm() <= 1e-13);

    const auto [G1, GG1] = chen_reconstruct<Mat3>(l1, l2, 1, 2);
    CHECK(G1 == b);
    CHECK(GG1 == B);

    std::vector<Mat3> m1, m2;
    for (int i = 0; i < 4; ++i) m1.push_back(random_mat(rng)), m2.push_back(random_mat(rng));
    const auto [Gl, GGl] = chen_reconstruct<Mat3>(m1, m2, 0, 2);
    const auto [Gr, GGr] = chen_reconstruct<Mat3>(m1, m2, 2, 4);
    const auto [Gf, GGf] = chen_reconstruct<Mat3>(m1, m2, 0, 4);
    CHECK((Gf - (Gl + Gr)).norm() <= 1e-12);
    CHECK((GGf - (GGl + GGr + Gr * Gl)).norm() <= 1e-12);

    CHECK_THROWS(chen_reconstruct<Mat3>(m1, m2, 3, 1));
    CHECK_THROWS(chen_reconstruct<Mat3>(m1, m2, 0, 5));
}

TEST_CASE("p-variation examples") {
    CHECK(dp_pvar_power({0, 1, 2}, 1.0, 0, 2) == 2.0);
    CHECK(std::sqrt(dp_pvar_power({0, 1, 0}, 2.0, 0, 2)) == doctest::Approx(std::sqrt(2.0)));
    CHECK(std::sqrt(dp_pvar_power({0, 1, 2}, 2.0, 0, 2)) == 2.0);
    PairPowers pw(3, 2.0, [](int i, int j) { return static_cast<double>(j - i); });
    CHECK(p_variation(pw, 0, 2) == 2.0);
    CHECK(p_variation(pw, 1, 1) == 0.0);
    CHECK_THROWS_AS(PairPowers(3, 0.5, [](int, int) { return 1.0; }), std::invalid_argument);
}

TEST_CASE("p-variation DP equals exhaustive partition search") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> step(-4, 4);
    std::normal_distribution<double> N(0.0, 1.0);
    long cases = 0;
    for (int len = 1; len <= 12; ++len)
        for (int trial = 0; trial < 40; ++trial) {
            std::vector<double> x(len);
            for (int i = 1; i < len; ++i) x[i] = x[i - 1] + (trial % 2 ? step(rng) : N(rng));
            for (double p : {1.0, 2.0, 2.5, 3.0}) {
                for (int s = 0; s < len; ++s)
                    for (int t = s; t < len; ++t) {
                        CHECK(dp_pvar_power(x, p, s, t) == brute_pvar_power(x, p, s, t));
                        ++cases;
                    }
            }
        }
    CHECK(cases > 10000);
}

TEST_CASE("streaming and callback p-variation agree with the cached table") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> x(30);
    for (int i = 1; i < 30; ++i) x[i] = x[i - 1] + N(rng);
    auto norm = [&](int i, int j) { return std::abs(x[j] - x[i]); };
    PairPowers pw(30, 2.5, norm);
    const double cached = p_variation_power(pw, 3, 27);
    const double streamed = p_variation_power_streaming(3, 27, 2.5, [&](int i, int t, std::span<double> out) {
        for (int j = i + 1; j <= t; ++j) out[j - i - 1] = norm(i, j);
    });
    CHECK(streamed == doctest::Approx(cached).epsilon(1e-14));
    CHECK(p_variation(30, 2.5, norm, 3, 27) == doctest::Approx(std::pow(cached, 1 / 2.5)).epsilon(1e-14));
    const auto row = p_variation_row(pw, 3, 27);
    for (int j = 3; j <= 27; ++j) CHECK(row[j - 3] == doctest::Approx(p_variation_power(pw, 3, j)).epsilon(1e-14));
}

TEST_CASE("controls") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> N(0.0, 1.0);
    const int nodes = 40;
    std::vector<Eigen::Vector2d> x(nodes, Eigen::Vector2d::Zero());
    for (int i = 1; i < nodes; ++i) x[i] = x[i - 1] + Eigen::Vector2d(N(rng), N(rng)) * 0.1;
    auto pw1 = std::make_shared<const PairPowers>(nodes, 2.5, [&](int i, int j) { return (x[j] - x[i]).norm(); });
    auto pw2 = std::make_shared<const PairPowers>(nodes, 1.25, [&](int i, int j) {
        return 0.5 * (x[j] - x[i]).squaredNorm();
    });
    const Control w1 = control_from_pvar(pw1), w2 = control_from_pvar(pw2);
    const Control w = combined_control(w1, w2);
    for (int t = 0; t < nodes; ++t) CHECK(w(t, t) == 0.0);
    CHECK(superadditivity_violation(w1) <= 1e-12);
    CHECK(superadditivity_violation(w2) <= 1e-12);
    CHECK(superadditivity_violation(w) <= 1e-12);
    for (int s = 0; s < nodes; s += 3)
        for (int t = s; t < nodes; t += 4) {
            const double a = p_variation_power(*pw1, s, t), b = p_variation_power(*pw2, s, t);
            CHECK(w1(s, t) == a);
            CHECK(w(s, t) == doctest::Approx(a + b + a * a).epsilon(1e-14));
        }
    // a non-superadditive function is detected
    const Control bad(5, [](int s, int t) { return std::sqrt(static_cast<double>(t - s)); });
    CHECK(superadditivity_violation(bad) > 0.1);
}

TEST_CASE("sewing an exact increment") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N(0.0, 1.0);
    const int nodes = 33;
    std::vector<Eigen::VectorXd> g(nodes, Eigen::VectorXd::Zero(2));
    for (int i = 0; i < nodes; ++i) g[i] = Eigen::Vector2d(N(rng), N(rng));
    const Germ germ = [&](int s, int t) -> Eigen::VectorXd { return g[t] - g[s]; };
    const SewingResult r = sew(nodes, germ);
    for (int i = 0; i < nodes; ++i) CHECK((r.integral[i] - (g[i] - g[0])).norm() <= 1e-13);
    for (auto [s, t] : dyadic_windows(nodes - 1)) CHECK(sewing_remainder(r, germ, s, t).norm() <= 1e-13);
    CHECK_THROWS_AS(sew(nodes, germ, 5), std::invalid_argument);
}

TEST_CASE("sewing a Riemann germ") {
    const int steps = 1024;
    const TimeGrid tg(1.0, steps);
    auto f = [](double t) { return std::cos(3.0 * t) + t * t; };
    auto F = [](double t) { return std::sin(3.0 * t) / 3.0 + t * t * t / 3.0; };
    const Germ germ = [&](int s, int t) -> Eigen::VectorXd {
        return Eigen::VectorXd::Constant(1, (tg.node(t) - tg.node(s)) * f(tg.node(s)));
    };
    const SewingResult r = sew(tg.nodes(), germ);
    // left Riemann sum error is O(dt)
    CHECK(std::abs(r.integral.back()[0] - F(1.0)) <= 2.0 * tg.dt());

    std::vector<double> lx, ly;
    for (int len = 2; len <= 64; len *= 2) {  // one-step windows are exact
        double worst = 0.0;
        for (auto [s, t] : dyadic_windows(steps, 0, 10))
            if (t - s == len) worst = std::max(worst, sewing_remainder(r, germ, s, t).norm());
        lx.push_back(std::log(len * tg.dt()));
        ly.push_back(std::log(worst));
    }
    const double slope = (ly.back() - ly.front()) / (lx.back() - lx.front());
    // the short windows carry the factor (1 - 1/len), which steepens the fit slightly
    CHECK(slope >= 1.9);
    CHECK(slope <= 2.25);

    const Control omega(tg.nodes(), [&](int s, int t) { return tg.node(t) - tg.node(s); });
    const SewingResult rr = sew(tg.nodes(), germ, 4, &omega, 2.0);
    CHECK(rr.windows > 0);
    CHECK(rr.max_ratio < 10.0);
}

TEST_CASE("dyadic windows") {
    const auto w = dyadic_windows(8);
    CHECK(w.size() == 8 + 4 + 2 + 1);
    CHECK(w.front() == std::pair{0, 1});
    CHECK(w.back() == std::pair{0, 8});
    CHECK(dyadic_windows(8, 2, 2).size() == 2);
}
