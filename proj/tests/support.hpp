#pragma once

#include "rough_llg/torus_grid.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace rllg::testing {

inline constexpr double kTau = 2.0 * std::numbers::pi;

inline GridField equator(const Grid& g) {
    return GridField::from_function(g, [](double x) { return Vec3(std::cos(kTau * x), std::sin(kTau * x), 0.0); });
}

inline GridField constant_field(const Grid& g, const Vec3& v) {
    return GridField::from_function(g, [&](double) { return v; });
}

inline GridField random_field(const Grid& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> U(lo, hi);
    GridField f(g);
    for (auto& v : f.values) v = Vec3(U(rng), U(rng), U(rng));
    return f;
}

/// Random low-mode trigonometric field, optionally normalised onto the sphere.
inline GridField random_trig_field(const Grid& g, std::mt19937_64& rng, int modes, bool sphere) {
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<Vec3> a(modes + 1), b(modes + 1);
    for (int m = 0; m <= modes; ++m) {
        a[m] = Vec3(N(rng), N(rng), N(rng)) / (1.0 + m * m);
        b[m] = Vec3(N(rng), N(rng), N(rng)) / (1.0 + m * m);
    }
    GridField f = GridField::from_function(g, [&](double x) {
        Vec3 v = a[0];
        for (int m = 1; m <= modes; ++m) v += a[m] * std::cos(kTau * m * x) + b[m] * std::sin(kTau * m * x);
        return v;
    });
    if (sphere)
        for (auto& v : f.values) v.normalize();
    return f;
}

inline Mat3 random_mat(std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    Mat3 m;
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = N(rng);
    return m;
}

}  // namespace rllg::testing
