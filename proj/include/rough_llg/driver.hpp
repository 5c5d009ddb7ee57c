#pragma once

// Spatially modulated anti-symmetric rough drivers (G, GG) built from mode
// rough paths through the cross-product map, with dilation, Levy
// decomposition, the (p, p/2)-variation H^k distance and structural checks.

#include "rough_llg/noise.hpp"
#include "rough_llg/torus_grid.hpp"

#include <iosfwd>
#include <optional>

namespace rllg {

/// F(xi) v = v x xi.
Mat3 cross_matrix(const Vec3& xi);

/// (F (x) F)[bb]^{ij} = sum_{k,l} F^{ik} F^{jl} bb^{kl}; as a composition of
/// maps this is sum_{k,l} bb^{kl} F(e_l) F(e_k), so that a (x) b -> F(b) F(a).
Mat3 cross_tensor(const Mat3& bb);

/// Mode profiles phi_j : Grid -> R^3 and the mode rough path that generated a
/// driver, with the dilation factor applied since.
struct ModeGenerators {
    std::vector<std::vector<Vec3>> profiles;
    ModeRoughPath path;
    double scale = 1.0;
};

class SpaceRoughDriver {
public:
    SpaceRoughDriver(Grid grid, TimeGrid tgrid, std::vector<Mat3> first, std::vector<Mat3> second,
                     std::optional<ModeGenerators> generators = std::nullopt);

    const Grid& grid() const { return grid_; }
    const TimeGrid& time_grid() const { return tgrid_; }
    int steps() const { return tgrid_.steps(); }

    const Mat3& first(int interval, int point) const { return first_[index(interval, point)]; }
    const Mat3& second(int interval, int point) const { return second_[index(interval, point)]; }
    std::span<const Mat3> first_at(int interval) const;
    std::span<const Mat3> second_at(int interval) const;

    /// (G_{s,t}(x), GG_{s,t}(x)) by Chen reconstruction at one grid point.
    std::pair<Mat3, Mat3> reconstruct(int s, int t, int point) const;
    /// Same for every grid point.
    std::pair<std::vector<Mat3>, std::vector<Mat3>> reconstruct_field(int s, int t) const;

    const std::optional<ModeGenerators>& generators() const { return generators_; }

private:
    std::size_t index(int interval, int point) const {
        return static_cast<std::size_t>(interval) * grid_.size() + point;
    }
    Grid grid_;
    TimeGrid tgrid_;
    std::vector<Mat3> first_;
    std::vector<Mat3> second_;
    std::optional<ModeGenerators> generators_;
};

SpaceRoughDriver zero_driver(const Grid& grid, const TimeGrid& tgrid);

/// (g(x) F(db), g(x)^2 (F (x) F)[bb]) for a scalar profile g and q = 3.
SpaceRoughDriver lift_simple(std::span<const double> g, const Grid& grid, const ModeRoughPath& rp);

/// dw(x) = sum_j phi_j(x) db^j, G = F(dw), GG = (F (x) F)[sum_{jk} phi_j phi_k^T bb^{jk}].
SpaceRoughDriver lift_multimode(const std::vector<std::vector<Vec3>>& profiles, const Grid& grid,
                                const ModeRoughPath& rp);

/// (lambda G, lambda^2 GG)
SpaceRoughDriver dilate(const SpaceRoughDriver& d, double lambda);

/// Merges every `factor` intervals by Chen reconstruction.
SpaceRoughDriver coarsen(const SpaceRoughDriver& d, int factor);

struct LevyDecomposition {
    Mat3 area;               ///< GG - G^2 / 2
    double symmetry_defect;  ///< max |Sym(GG) - G^2 / 2|
};

LevyDecomposition levy_decompose(const SpaceRoughDriver& d, int s, int t, int point);

/// max over intervals/points of max|G + G^T|
double antisymmetry_defect(const SpaceRoughDriver& d);

/// ||G1 - G2||_{V^p_2(H^k)} + ||GG1 - GG2||_{V^{p/2}_2(H^k)}; the spatial
/// norm of a matrix field is the root-sum-of-squares of its entrywise H^k norms.
double driver_distance(const SpaceRoughDriver& d1, const SpaceRoughDriver& d2, double p, int k);
/// Same quantity evaluated on the stored per-point matrices (no generators used).
double driver_distance_dense(const SpaceRoughDriver& d1, const SpaceRoughDriver& d2, double p, int k);

/// First and second level p-variation controls of a driver in H^k:
/// omega_G = ||G||^p_{p-var}, omega_GG = ||GG||^{p/2}_{p/2-var}, and the
/// combined omega_G + omega_GG + omega_G^2.
struct DriverControls {
    Control first;
    Control second;
    Control combined;
};

DriverControls driver_controls(const SpaceRoughDriver& d, double p, int k);

/// Pair norms ||G_{s,t}||_{H^k}, ||GG_{s,t}||_{H^k} streamed row by row.
class DriverPairNorms {
public:
    DriverPairNorms(const SpaceRoughDriver& d1, const SpaceRoughDriver* d2, int k);
    /// out[j - i - 1] for j = i+1 .. t, first or second level of d1 - d2.
    void row(int i, int t, bool second_level, std::span<double> out) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

struct StructureDefects {
    double chen = 0.0;          ///< bound on max |delta GG_{s,u,t} - G_{u,t} G_{s,u}| over all triples
    double chen_anchor = 0.0;   ///< max over pairs of the (0, s, t) triple defect
    double additivity = 0.0;    ///< max |delta G_{s,u,t}| over (0, s, u) triples
    double levy = 0.0;          ///< max |Sym GG_{s,t} - G_{s,t}^2 / 2|
    double antisymmetry = 0.0;  ///< max |G_{s,t} + G_{s,t}^T|
};

/// Scans every node pair at every grid point. The triple defect obeys
///   D(s,u,t) = D(0,u,t) - D(0,s,t) + D(0,s,u) - G_{u,t} delta G_{0,s,u},
/// so `chen` = 3 max D(0,.,.) + 3 max|G| max|delta G| bounds every triple.
StructureDefects structure_defects(const SpaceRoughDriver& d);
/// Exhaustive O(N^3 n) triple scan, for small grids.
double chen_defect_exhaustive(const SpaceRoughDriver& d);

/// "# rough-llg driver v1 n=<n> N=<N> T=<T>", then rows
/// interval,point,G00..G22,GG00..GG22 (row-major, %.17g).
void write_driver_csv(const SpaceRoughDriver& d, std::ostream& os);
SpaceRoughDriver read_driver_csv(std::istream& is);

}  // namespace rllg
