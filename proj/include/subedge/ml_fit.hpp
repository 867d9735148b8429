/**
 * @file ml_fit.hpp
 * @brief Maximum-likelihood B-spline contour fit and the classical baseline.
 *
 * The stochastic fit minimizes the quadratic energy
 *
 *     E(theta) = (d - B theta)^T W (d - B theta)
 *
 * over the stacked control vector theta = (theta_x, theta_y) of length 2N.
 * The 3M rows are, for every observation i:
 *   - row i:      x position,  B_j(t_i) in the x columns, target x_o, weight 1/sigma_X^2
 *   - row M + i:  y position,  B_j(t_i) in the y columns, target y_o, weight 1/sigma_X^2
 *   - row 2M + i: orientation, H_x dB_j/dt | H_y dB_j/dt, target 0,
 *                 weight 1/(|T_i|^2 sigma_O^2)
 * The orientation row is the linearized constraint H_i . T_i(theta) = 0 that
 * makes the curve tangent orthogonal to the observed gradient. Its scale
 * |T_i| depends on theta, so the fit re-weights from the previous iterate.
 */

#pragma once

#include <subedge/bspline.hpp>
#include <subedge/edge_observe.hpp>

#include <optional>
#include <string>
#include <vector>

namespace subedge {

struct FitConfig {
    int num_ctrl = 0;          ///< 0 selects max(degree+1, round(M / ctrl_ratio))
    double ctrl_ratio = 4.0;
    int degree = 3;
    std::optional<double> Sigma;  ///< gradient prior scale; default 10 sigma_H sqrt(taps)
    int max_iters = 3;
    std::optional<double> ridge;  ///< default 1e-8 trace(B^T W B) / 2N
    bool closed = true;
    bool orientation = true;      ///< false zeroes the orientation rows
};

struct WlsSystem {
    Eigen::VectorXd d;  ///< targets
    Eigen::VectorXd w;  ///< diagonal of W
    Eigen::MatrixXd B;
    int num_obs = 0;    ///< M
    int num_ctrl = 0;   ///< N
};

struct FitReport {
    std::vector<double> energy_trace;
    double residual_rms = 0.0;
    int iterations_used = 0;
    bool condition_warning = false;
    int num_obs = 0;
    int num_ctrl = 0;
    double sigma_H = 0.0;
    double Sigma = 0.0;
    double ridge = 0.0;
    std::vector<std::string> warnings;
};

struct SolveResult {
    Eigen::VectorXd theta;
    bool condition_warning = false;
};

struct FitResult {
    ContourModel model;
    FitReport report;
};

/// Control-point count for M observations under cfg.
int resolve_num_ctrl(int num_obs, const FitConfig& cfg);

/// Standard deviation of the orientation residual H.R for one observation:
/// sigma_O^2 = sigma_H^2 + (kSigmaFloor |H|)^2. The floor keeps weights finite
/// on noiseless images.
double orientation_sigma(double grad_mag, double sigma_H);

/// Without a previous model, |T_i| comes from the chord length of the observation polygon.
WlsSystem assemble_system(const ObservationSet& obs, const KnotVector& kv, const ContourModel* theta_prev,
                          const FitConfig& cfg);

/// argmin (d - B theta)^T W (d - B theta) + ridge |theta|^2 by a Cholesky solve
/// of the Jacobi-scaled normal equations.
SolveResult solve_wls(const WlsSystem& sys, double ridge);

double energy(const Eigen::VectorXd& theta, const WlsSystem& sys);

double default_ridge(const WlsSystem& sys);

/// Fixed-point re-weighting of the orientation rows. energy_trace[k] is the
/// penalized energy of iterate k with orientation weights taken from that
/// same iterate; a step that would raise it is halved until it does not.
FitResult fit_stochastic(const ObservationSet& obs, const FitConfig& cfg);

/// Unweighted least squares on the integer edge pixels (no sub-pixel
/// refinement, no orientation rows).
ContourModel fit_classical(const ObservationSet& obs, const KnotVector& kv, double ridge = 0.0);

/// Negative log of the orientation likelihood, up to the normalization constant.
/// exact=true uses the full Gaussian-prior form, exact=false its large-Sigma limit.
double orientation_nll(const ObservationSet& obs, const ContourModel& model, double Sigma, bool exact);

/// Residual RMS (pixels) between observations and the curve at their parameters.
double residual_rms(const ObservationSet& obs, const ContourModel& model, bool integer_positions = false);

}  // namespace subedge
