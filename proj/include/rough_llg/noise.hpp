#pragma once

// q-mode Brownian samples from counter-based streams, canonical lifts of
// piecewise-linear paths, dyadic approximations and Cameron-Martin paths.

#include "rough_llg/rough_core.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>

namespace rllg {

/// Standard normal keyed by (seed, mode, index); independent of evaluation order.
double counter_normal(std::uint64_t seed, std::uint64_t mode, std::uint64_t index);

struct BMSample {
    TimeGrid grid;
    int q = 3;
    std::uint64_t seed = 0;
    std::vector<Eigen::VectorXd> increments;  ///< one R^q vector per interval

    /// beta_{t_i}, with beta_0 = 0.
    Eigen::VectorXd value(int i) const;
    std::vector<Eigen::VectorXd> path() const;
};

BMSample sample_bm(std::uint64_t seed, const TimeGrid& grid, int q = 3);

/// Row format: "# rough-llg increments v1 seed=<S> N=<N> q=<q> T=<T>", then
/// one line per interval with q comma-separated increments (%.17g).
void write_increments_csv(const BMSample& s, std::ostream& os);
BMSample read_increments_csv(std::istream& is);

/// Per-interval increments db and second levels bb in R^{q x q}.
class ModeRoughPath {
public:
    ModeRoughPath(TimeGrid grid, std::vector<Eigen::VectorXd> level1, std::vector<Eigen::MatrixXd> level2);

    const TimeGrid& grid() const { return grid_; }
    int q() const { return q_; }
    std::span<const Eigen::VectorXd> level1() const { return level1_; }
    std::span<const Eigen::MatrixXd> level2() const { return level2_; }

    /// (db_{s,t}, bb_{s,t}) with bb_{s,t} = bb_{s,u} + bb_{u,t} + db_{s,u} (x) db_{u,t}.
    std::pair<Eigen::VectorXd, Eigen::MatrixXd> reconstruct(int s, int t) const;

    /// Merges every `factor` consecutive intervals (Chen), giving the same rough
    /// path on a coarser grid.
    ModeRoughPath coarsen(int factor) const;
    /// (lambda db, lambda^2 bb)
    ModeRoughPath dilate(double lambda) const;

private:
    TimeGrid grid_;
    int q_;
    std::vector<Eigen::VectorXd> level1_;
    std::vector<Eigen::MatrixXd> level2_;
};

/// Max over node triples of |delta bb_{s,u,t} - db_{s,u} (x) db_{u,t}| (O(N^3), for checks).
double mode_chen_defect(const ModeRoughPath& rp);
/// Max over node pairs of |Sym(bb_{s,t}) - 1/2 db (x) db|.
double mode_shuffle_defect(const ModeRoughPath& rp);

/// Absolutely continuous path with h_0 = 0, interpreted piecewise-linearly.
struct CameronMartinPath {
    TimeGrid grid;
    std::vector<Eigen::VectorXd> values;  ///< h at every node

    static CameronMartinPath from_function(const TimeGrid& grid, int q,
                                           const std::function<Eigen::VectorXd(double)>& h);
    int q() const { return static_cast<int>(values.front().size()); }
};

/// Canonical lift of the piecewise-linear interpolant of a node path given by
/// its increments: bb = 1/2 db (x) db on every interval.
ModeRoughPath lift_increments(const TimeGrid& grid, const std::vector<Eigen::VectorXd>& increments);
ModeRoughPath piecewise_linear_lift(const BMSample& sample);
ModeRoughPath piecewise_linear_lift(const CameronMartinPath& h);

struct DyadicApprox {
    BMSample sample;
    ModeRoughPath lift;
};

/// Level-n piecewise-linear interpolant through the nodes T i / 2^n, resampled
/// on the full grid of 2^M steps, together with its canonical lift.
DyadicApprox dyadic_approx(const BMSample& sample, int level);

/// Rate functional int_0^T |h'|^2 dt of the piecewise-linear path.
double cm_rate(const CameronMartinPath& h);

}  // namespace rllg
