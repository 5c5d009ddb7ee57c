#pragma once

// Steppers for the rough LLG equation
//   du = [D^2 u + u |Du|^2 + u x D^2 u] dt + (G + GG) u
// and for its version with a regular input, plus remainder extraction.

#include "rough_llg/driver.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace rllg {

/// Threshold below which a pre-projection vector is treated as collapsed.
inline constexpr double kProjectionFloor = 1e-6;

class NumericalAbort : public std::runtime_error {
public:
    NumericalAbort(const std::string& what, int node, int point)
        : std::runtime_error(what), node_(node), point_(point) {}
    int node() const { return node_; }    ///< time node of the failing step, -1 if unknown
    int point() const { return point_; }  ///< grid point, -1 if not pointwise

private:
    int node_;
    int point_;
};

enum class Scheme { rough_euler_imex, rough_euler_explicit, smooth_imex };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

struct SolverOptions {
    Scheme scheme = Scheme::rough_euler_imex;
    bool project = true;
    bool drift_enabled = true;
    int substeps_per_interval = 1;  ///< used by smooth_imex
};

/// Throws std::invalid_argument if the options cannot run on this grid/step.
void validate(const SolverOptions& opts, const Grid& grid, double dt);

struct Trajectory {
    TimeGrid grid;
    std::vector<GridField> states;  ///< one per node
    std::string scheme;
    double dt = 0.0;
    bool projected = false;
    bool drift_enabled = true;
    std::string provenance;  ///< free-form driver description

    const GridField& operator[](int i) const { return states[i]; }
    int nodes() const { return static_cast<int>(states.size()); }
};

/// D^2 u + u |Du|^2, with the edge-averaged squared gradient.
GridField tension(const GridField& u);
/// tension(u) + u x D^2 u
GridField drift(const GridField& u);
/// f / |f| pointwise; NumericalAbort if some |f(x)| < kProjectionFloor.
GridField project_sphere(const GridField& f);

/// One rough Euler step over interval i of the driver.
GridField step_rough(const GridField& u, const SpaceRoughDriver& d, int interval, const SolverOptions& opts);

/// One step of length dt with a first-level input only: `xi` holds the
/// increment matrix at every grid point, spread evenly over the substeps.
GridField step_smooth(const GridField& u, std::span<const Mat3> xi, double dt, const SolverOptions& opts);

/// Deterministic step (no input) with the scheme's treatment of D^2.
GridField step_deterministic(const GridField& u, double dt, const SolverOptions& opts);

/// With a rough scheme every interval uses (G, GG); with smooth_imex only G
/// is used, as the increment of a regular input.
Trajectory solve(const GridField& u0, const SpaceRoughDriver& d, const SolverOptions& opts);
Trajectory solve_deterministic(const GridField& u0, const TimeGrid& grid, const SolverOptions& opts);

/// u^natural_{s,t} = delta u_{s,t} - int_s^t drift(u_r) dr - (G_{s,t} + GG_{s,t}) u_s,
/// the drift integral by the composite trapezoid rule over stored states (and
/// omitted when the trajectory was run without drift).
GridField extract_remainder(const Trajectory& traj, const SpaceRoughDriver& d, int s, int t);

/// Repeated remainder extraction with the drift quadrature precomputed.
class RemainderTable {
public:
    RemainderTable(const Trajectory& traj, const SpaceRoughDriver& d);
    GridField operator()(int s, int t) const;

private:
    const Trajectory* traj_;
    const SpaceRoughDriver* d_;
    std::vector<GridField> quad_;  ///< trapezoid integral of the drift from node 0
};

/// "# rough-llg trajectory v1 n=<n> N=<N> T=<T> scheme=<s>", then rows t,x,u1,u2,u3 (%.17g).
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);
Trajectory read_trajectory_csv(std::istream& is);

/// 16-byte header: "RLLG", uint32 version (1), uint32 n, uint32 N (little
/// endian); then double T and (N+1) n 3 doubles in node-major order.
void write_trajectory_binary(const Trajectory& traj, std::ostream& os);
Trajectory read_trajectory_binary(std::istream& is);

}  // namespace rllg
