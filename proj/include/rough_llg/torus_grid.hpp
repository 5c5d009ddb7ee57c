#pragma once

// Uniform periodic grid on the unit torus R/Z, R^3-valued grid fields,
// periodic finite differences, discrete Lebesgue/Sobolev norms and the
// implicit heat solve used by the IMEX steppers.

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace rllg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Default tolerance for "sphere-valued" checks.
inline constexpr double kSphereTol = 1e-10;

class Grid {
public:
    explicit Grid(int n);

    int size() const { return n_; }
    double spacing() const { return 1.0 / n_; }
    double node(int i) const { return i * spacing(); }
    /// Periodic index, valid for any integer.
    int wrap(int i) const { return ((i % n_) + n_) % n_; }

    bool operator==(const Grid&) const = default;

private:
    int n_;
};

/// One time slice of u: n vectors in R^3 on a periodic grid.
struct GridField {
    Grid grid;
    std::vector<Vec3> values;

    explicit GridField(const Grid& g) : grid(g), values(g.size(), Vec3::Zero()) {}
    GridField(const Grid& g, std::vector<Vec3> v);

    template <class F>
    static GridField from_function(const Grid& g, F&& f) {
        GridField out(g);
        for (int i = 0; i < g.size(); ++i) out.values[i] = f(g.node(i));
        return out;
    }

    int size() const { return grid.size(); }
    Vec3& operator[](int i) { return values[i]; }
    const Vec3& operator[](int i) const { return values[i]; }

    bool all_finite() const;
    bool sphere_valued(double tol = kSphereTol) const;
    double max_norm_deviation() const;  ///< max_i | |u_i| - 1 |

    GridField& operator+=(const GridField& o);
    GridField& operator-=(const GridField& o);
    GridField& operator*=(double a);
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(double a, GridField f);

/// Central periodic difference: order 1 -> (f_{i+1}-f_{i-1})/2h, order 2 -> (f_{i+1}-2f_i+f_{i-1})/h^2.
GridField diff(const GridField& f, int order);
std::vector<double> diff(std::span<const double> f, const Grid& g, int order);

/// j-th discrete derivative used by the H^k norms: pairs of derivatives are
/// taken with the three-point second difference, an odd remainder with the
/// central first difference.
std::vector<double> derivative(std::span<const double> f, const Grid& g, int j);
GridField derivative(const GridField& f, int j);

/// (h sum |f_i|^p)^{1/p}; p = infinity gives max_i |f_i|.
double lp_norm(const GridField& f, double p);
double lp_norm(std::span<const double> f, const Grid& g, double p);
double linf_norm(const GridField& f);

/// sum_{j<=k} ||D^j f||_{L2}^2
double hk_norm_sq(const GridField& f, int k);
double hk_norm_sq(std::span<const double> f, const Grid& g, int k);
double hk_norm(const GridField& f, int k);

/// L2 inner product h sum f_i . g_i
double inner(const GridField& f, const GridField& g);

/// Edge-averaged squared gradient (|u_{i+1}-u_i|^2 + |u_i-u_{i-1}|^2) / (2h^2).
/// On sphere-valued fields it equals -u_i . (D^2 u)_i exactly.
std::vector<double> gradient_sq(const GridField& u);

/// Solves (I - dt D^2) v = rhs componentwise by cyclic tridiagonal elimination.
GridField imex_solve(const GridField& rhs, double dt);
std::vector<double> imex_solve(std::span<const double> rhs, const Grid& g, double dt);

/// Eigenvalue of -D^2 on the Fourier mode k: (2 - 2cos(2 pi k h)) / h^2.
double laplacian_eigenvalue(const Grid& g, int k);

}  // namespace rllg
