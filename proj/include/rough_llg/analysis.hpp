#pragma once

// Energies, inequality checks, a priori reports, rate regressions, the rough
// Gronwall bound and the product-formula check.

#include "rough_llg/llg.hpp"

#include "json.hpp"

#include <limits>
#include <optional>

namespace rllg {

/// sum_i |u_{i+1} - u_i|^2 / h, the Dirichlet energy with forward differences.
double energy(const GridField& u);
/// ||tension(u)||_{L2}^2
double tension_norm_sq(const GridField& u);

struct DissipationReport {
    std::vector<double> energies;    ///< E at every node
    std::vector<double> defects;     ///< |E_{i+1} - E_i + rate dt ||t_{u_i}||^2|
    double max_defect = 0.0;
    double max_increase = 0.0;       ///< max(E_{i+1} - E_i), <= 0 when nonincreasing
    bool nonincreasing = true;
};

/// Energy balance of a deterministic trajectory. The semi-discrete flow
/// satisfies dE/dt = -2 ||t_u||^2, hence the default rate 2.
DissipationReport dissipation_check(const Trajectory& traj, double rate = 2.0);

struct AprioriReport {
    double sup_H1 = 0.0;             ///< sup_t ||D u_t||^2
    double diss = 0.0;               ///< sum dt ||t_{u_t}||^2
    std::vector<double> sup_Hk;      ///< sup_t ||D^j u_t||^2, j = 1..k
    double L2_H2 = 0.0;              ///< sum dt ||D^2 u_t||^2
    double u0_H1 = 0.0;              ///< (||u_0||^2 + E(u_0))^{1/2}
    double omega_0T = 0.0;           ///< omega_{G,H^2}(0, T)
    double growth = 0.0;             ///< (sup_H1 + diss) / ||u_0||_{H^1}^2
    double log_ratio = 0.0;          ///< log[(sup_H1 + diss) / (exp(omega) ||u_0||_{H^1}^2)]
    bool bounded = true;             ///< log_ratio <= log K
};

/// omega_0T must be supplied by the caller (0 for deterministic runs);
/// exp(omega) is kept in log form.
AprioriReport apriori_report(const Trajectory& traj, double omega_0T, int k, double K = 1.0);
/// omega_{G,H^2}(0,T) of the combined (p, p/2) control of d.
double driver_omega(const SpaceRoughDriver& d, double p, int k = 2);

struct RateFit {
    std::vector<std::pair<double, double>> points;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least-squares fit of log y against log x; needs >= 3 points, all positive.
RateFit fit_rate(std::vector<std::pair<double, double>> points);
/// (driver distance, solution distance) per level.
RateFit wz_rate(const std::vector<std::pair<double, double>>& pairs);

/// max(sup_t ||a_t - b_t||_{H^1}, (sum dt ||a_t - b_t||_{H^2}^2)^{1/2}).
double solution_distance(const Trajectory& a, const Trajectory& b);
/// sup_t ||a_t - b_t||_{L2}
double sup_l2_distance(const Trajectory& a, const Trajectory& b);

/// ||Du||_{L4}^4 / (||Du||^3 ||D^2u|| + ||Du||^4); std::domain_error for constant u.
double gns_ratio(const GridField& u);
/// ||a||_{Linf}^2 / (||a||_{L2} ||a||_{H^1}); std::domain_error for a = 0.
double interpolation_ratio(const GridField& a);

/// exp(omega_0T / tau) [E_0 + sup |phi(0, t)|]
double gronwall_bound(double E0, double omega_0T, double sup_phi, double tau);

struct GronwallCheck {
    double hypothesis_violation = 0.0;  ///< max of dE - (sup E) omega^kappa - phi over pairs with omega <= ell
    int pairs_checked = 0;
    double tau_star = 0.0;              ///< smallest tau with the conclusion holding; +inf if none
    double sup_E = 0.0;
};

/// phi may be empty (phi = 0); otherwise phi(s, t) on node pairs.
GronwallCheck gronwall_check(std::span<const double> E, const Control& omega, double kappa,
                             const Control::Fn& phi = {}, double ell = std::numeric_limits<double>::infinity());

struct ProductFormulaResidual {
    double trace = 0.0;   ///< residual integrated against the identity
    double matrix = 0.0;  ///< L2 norm of the full 3x3 residual field
};

/// delta(u (x) u)_{s,t} - 2 int u (.) f - 2 u_s (.) (G + GG) u_s - (G u_s)^{(x)2}, f the drift.
ProductFormulaResidual product_formula_check(const Trajectory& traj, const SpaceRoughDriver& d, int s, int t);

/// max over steps of ||(rho_{i+1} - rho_i)/dt - D^2 rho_i - 2 |Du_i|^2 rho_i||_{L2},
/// rho = (|u|^2 - 1)/2.
double rho_residual(const Trajectory& traj);

/// ||u^natural_{s,t}||_{L2} against omega(s,t) over dyadic windows with
/// lengths 2^min_log2 .. 2^max_log2 steps (windows with omega = 0 skipped).
RateFit remainder_scaling(const Trajectory& traj, const SpaceRoughDriver& d, const Control& omega,
                          int min_log2 = 0, int max_log2 = 62);

nlohmann::json to_json(const AprioriReport& r);
nlohmann::json to_json(const RateFit& r);
nlohmann::json to_json(const DissipationReport& r);

}  // namespace rllg
