#include "doctest.h"
#include "support.hpp"

#include "rough_llg/noise.hpp"

#include <sstream>

using namespace rllg;
using namespace rllg::testing;

namespace {

// int (beta_r - beta_0) (x) d beta_r for the piecewise-linear path through
// the given node values, by a fine midpoint rule
Eigen::MatrixXd area_quadrature(const std::vector<Eigen::VectorXd>& nodes, int sub) {
    const int q = static_cast<int>(nodes[0].size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(q, q);
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const Eigen::VectorXd vel = nodes[k + 1] - nodes[k];
        for (int j = 0; j < sub; ++j) {
            const double r = (j + 0.5) / sub;
            const Eigen::VectorXd b = nodes[k] + r * vel - nodes[0];
            out += b * vel.transpose() / sub;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("counter-based normals") {
    CHECK(counter_normal(1, 0, 5) == counter_normal(1, 0, 5));
    CHECK(counter_normal(1, 0, 5) != counter_normal(1, 1, 5));
    CHECK(counter_normal(1, 0, 5) != counter_normal(2, 0, 5));
    double m = 0.0, v = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = counter_normal(42, 0, i);
        m += z;
        v += z * z;
    }
    m /= n;
    v = v / n - m * m;
    CHECK(std::abs(m) <= 5.0 / std::sqrt(n));
    CHECK(std::abs(v - 1.0) <= 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("sample_bm") {
    const TimeGrid tg(0.5, 64);
    const BMSample a = sample_bm(3, tg, 3);
    CHECK(a.value(0).norm() == 0.0);
    CHECK(a.increments.size() == 64);
    CHECK(a.path().size() == 65);
    const BMSample b = sample_bm(3, tg, 3);
    for (int i = 0; i < 64; ++i) CHECK(std::memcmp(a.increments[i].data(), b.increments[i].data(), 3 * sizeof(double)) == 0);
    CHECK((sample_bm(4, tg, 3).increments[0] - a.increments[0]).norm() > 0.0);
    // the first modes do not depend on q
    const BMSample c = sample_bm(3, tg, 5);
    CHECK(c.increments[10].head(3) == a.increments[10]);
}

TEST_CASE("one-step variance equals dt") {
    const TimeGrid tg(1.0, 10000);
    const BMSample s = sample_bm(11, tg, 1);
    double var = 0.0;
    for (const auto& d : s.increments) var += d[0] * d[0];
    var /= 10000;
    CHECK(std::abs(var - tg.dt()) <= 0.05 * tg.dt());
}

TEST_CASE("increments csv roundtrip") {
    const BMSample a = sample_bm(9, TimeGrid(0.25, 16), 4);
    std::stringstream ss;
    write_increments_csv(a, ss);
    const BMSample b = read_increments_csv(ss);
    CHECK(b.q == 4);
    CHECK(b.seed == 9);
    CHECK(b.grid == a.grid);
    for (int i = 0; i < 16; ++i) CHECK(b.increments[i] == a.increments[i]);
    std::stringstream bad("not a header\n1,2\n");
    CHECK_THROWS(read_increments_csv(bad));
}

TEST_CASE("lift of one segment") {
    const TimeGrid tg(1.0, 1);
    const ModeRoughPath rp = lift_increments(tg, {Eigen::Vector3d(1, 0, 0)});
    Eigen::Matrix3d expect = Eigen::Matrix3d::Zero();
    expect(0, 0) = 0.5;
    CHECK((rp.level2()[0] - expect).norm() == 0.0);
    const Eigen::MatrixXd bb = rp.level2()[0];
    CHECK((bb - bb.transpose()).norm() == 0.0);
}

TEST_CASE("lift of two segments matches quadrature of the PL path") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Vector3d d1(N(rng), N(rng), N(rng)), d2(N(rng), N(rng), N(rng));
        const ModeRoughPath rp = lift_increments(TimeGrid(2.0, 2), {d1, d2});
        const auto [db, bb] = rp.reconstruct(0, 2);
        CHECK((db - (d1 + d2)).norm() <= 1e-15);
        const Eigen::MatrixXd expect = area_quadrature({Eigen::Vector3d::Zero(), d1, Eigen::Vector3d(d1 + d2)}, 1000);
        CHECK((bb - expect).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("Chen and shuffle on Brownian lifts") {
    const BMSample s = sample_bm(8, TimeGrid(1.0, 48), 3);
    const ModeRoughPath rp = piecewise_linear_lift(s);
    CHECK(mode_chen_defect(rp) <= 1e-12);
    CHECK(mode_shuffle_defect(rp) <= 1e-12);
    // a non-geometric second level is detected
    std::vector<Eigen::MatrixXd> l2(rp.level2().begin(), rp.level2().end());
    l2[5](1, 1) += 1e-3;
    const ModeRoughPath bad(rp.grid(), std::vector<Eigen::VectorXd>(rp.level1().begin(), rp.level1().end()), l2);
    CHECK(mode_shuffle_defect(bad) >= 0.9e-3);
}

TEST_CASE("reconstruct, coarsen, dilate") {
    const ModeRoughPath rp = piecewise_linear_lift(sample_bm(2, TimeGrid(1.0, 32), 3));
    const ModeRoughPath c = rp.coarsen(4);
    CHECK(c.grid().steps() == 8);
    for (int s = 0; s <= 8; ++s)
        for (int t = s; t <= 8; ++t) {
            const auto [a, A] = c.reconstruct(s, t);
            const auto [b, B] = rp.reconstruct(4 * s, 4 * t);
            CHECK((a - b).norm() <= 1e-13);
            CHECK((A - B).norm() <= 1e-13);
        }
    const ModeRoughPath d = rp.dilate(2.0);
    const auto [a, A] = d.reconstruct(3, 20);
    const auto [b, B] = rp.reconstruct(3, 20);
    CHECK((a - 2.0 * b).norm() <= 1e-13);
    CHECK((A - 4.0 * B).norm() <= 1e-12);
    CHECK_THROWS(rp.coarsen(3));
}

TEST_CASE("dyadic approximation") {
    const BMSample s = sample_bm(6, TimeGrid(1.0, 64), 3);
    const DyadicApprox full = dyadic_approx(s, 6);
    for (int i = 0; i < 64; ++i) CHECK(full.sample.increments[i] == s.increments[i]);
    const auto w = s.path();
    for (int level = 0; level <= 6; ++level) {
        const DyadicApprox a = dyadic_approx(s, level);
        const auto wn = a.sample.path();
        const int block = 64 >> level;
        for (int i = 0; i <= 64; i += block) CHECK((wn[i] - w[i]).norm() <= 1e-14);
        // linear between the dyadic nodes
        for (int i = 0; i < 64; ++i)
            CHECK((a.sample.increments[i] - a.sample.increments[(i / block) * block]).norm() <= 1e-14);
        CHECK(mode_shuffle_defect(a.lift) <= 1e-12);
    }
    CHECK_THROWS(dyadic_approx(s, 7));
    CHECK_THROWS(dyadic_approx(sample_bm(6, TimeGrid(1.0, 48), 3), 2));
}

TEST_CASE("Cameron-Martin rate") {
    const TimeGrid tg(1.0, 1024);
    auto path = [&](Eigen::Vector3d v) {
        return CameronMartinPath::from_function(tg, 3, [v](double t) -> Eigen::VectorXd { return t * v; });
    };
    CHECK(cm_rate(path(Eigen::Vector3d::Zero())) == 0.0);
    CHECK(cm_rate(path(Eigen::Vector3d(1, 0, 0))) == 1.0);
    CHECK(cm_rate(path(Eigen::Vector3d(1, 2, 0))) == 5.0);
    const CameronMartinPath quad = CameronMartinPath::from_function(tg, 1, [](double t) -> Eigen::VectorXd {
        return Eigen::VectorXd::Constant(1, t * t);
    });
    CHECK(cm_rate(quad) == doctest::Approx(4.0 / 3.0).epsilon(1e-5));
    CHECK_THROWS(CameronMartinPath::from_function(tg, 1, [](double) -> Eigen::VectorXd {
        return Eigen::VectorXd::Constant(1, 1.0);
    }));
    const ModeRoughPath rp = piecewise_linear_lift(path(Eigen::Vector3d(1, 0, 0)));
    const auto [db, bb] = rp.reconstruct(0, 1024);
    CHECK(db[0] == doctest::Approx(1.0));
    CHECK(bb(0, 0) == doctest::Approx(0.5));
}
