/**
 * @file ml_fit.cpp
 * @brief Weighted least-squares assembly/solve and the re-weighted ML fit.
 */

#include <subedge/error.hpp>
#include <subedge/ml_fit.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace subedge {

namespace {

/// Basis rows for the observation parameters; shared by every iteration.
struct DesignCache {
    Eigen::MatrixXd value;
    Eigen::MatrixXd slope;
};

DesignCache make_cache(const ObservationSet& obs, const KnotVector& kv) {
    std::vector<double> params;
    params.reserve(obs.observations.size());
    for (const auto& o : obs.observations) {
        params.push_back(o.t);
    }
    return {design_matrix(kv, params, false), design_matrix(kv, params, true)};
}

/// |T_i| from central differences of the observation polygon (dt = 1/M).
std::vector<double> chord_speeds(const ObservationSet& obs) {
    const int m = obs.size();
    std::vector<double> speed(static_cast<size_t>(m), 0.0);
    const auto& o = obs.observations;
    for (int i = 0; i < m; ++i) {
        int a = i - 1;
        int b = i + 1;
        if (obs.closed) {
            a = (a + m) % m;
            b = b % m;
        } else {
            a = std::max(a, 0);
            b = std::min(b, m - 1);
        }
        const double dt = obs.closed ? 2.0 / m : static_cast<double>(b - a) / m;
        const double dx = o[static_cast<size_t>(b)].x_o - o[static_cast<size_t>(a)].x_o;
        const double dy = o[static_cast<size_t>(b)].y_o - o[static_cast<size_t>(a)].y_o;
        speed[static_cast<size_t>(i)] = dt > 0.0 ? std::hypot(dx, dy) / dt : 0.0;
    }
    return speed;
}

std::vector<double> model_speeds(const ObservationSet& obs, const ContourModel& model) {
    std::vector<double> speed;
    speed.reserve(obs.observations.size());
    for (const auto& o : obs.observations) {
        const Point2 d = eval_tangent(model, o.t);
        speed.push_back(std::hypot(d.x, d.y));
    }
    return speed;
}

/// Zero speeds would give infinite weights; clamp to a tiny fraction of the mean.
void floor_speeds(std::vector<double>& speed) {
    double mean = 0.0;
    for (double s : speed) {
        mean += s;
    }
    mean /= std::max<size_t>(speed.size(), 1);
    const double floor = std::max(1e-6 * mean, 1e-12);
    for (double& s : speed) {
        s = std::max(s, floor);
    }
}

WlsSystem build_system(const ObservationSet& obs, const DesignCache& cache, std::span<const double> speeds,
                       bool orientation) {
    const int m = obs.size();
    const auto n = static_cast<Eigen::Index>(cache.value.cols());
    WlsSystem sys;
    sys.num_obs = m;
    sys.num_ctrl = static_cast<int>(n);
    sys.d = Eigen::VectorXd::Zero(3 * m);
    sys.w = Eigen::VectorXd::Zero(3 * m);
    sys.B = Eigen::MatrixXd::Zero(3 * m, 2 * n);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& o = obs.observations[static_cast<size_t>(i)];
        const double pos_w = 1.0 / o.sigma_x2;
        sys.B.block(i, 0, 1, n) = cache.value.row(i);
        sys.B.block(m + i, n, 1, n) = cache.value.row(i);
        sys.d[i] = o.x_o;
        sys.d[m + i] = o.y_o;
        sys.w[i] = pos_w;
        sys.w[m + i] = pos_w;

        sys.B.block(2 * m + i, 0, 1, n) = o.g_x * cache.slope.row(i);
        sys.B.block(2 * m + i, n, 1, n) = o.g_y * cache.slope.row(i);
        if (orientation) {
            const double so = orientation_sigma(std::hypot(o.g_x, o.g_y), obs.sigma_H);
            const double speed = speeds[static_cast<size_t>(i)];
            sys.w[2 * m + i] = 1.0 / (speed * speed * so * so);
        }
    }
    return sys;
}

void check_counts(const ObservationSet& obs, const KnotVector& kv) {
    if (obs.size() < 2 * kv.num_ctrl()) {
        std::ostringstream msg;
        msg << "M=" << obs.size() << " observations cannot determine N=" << kv.num_ctrl()
            << " control points (need M >= 2N)";
        throw Error(ErrorCode::Underdetermined, msg.str());
    }
    for (const auto& o : obs.observations) {
        if (!(o.sigma_x2 > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "observation variance must be positive");
        }
    }
}

double penalized(const Eigen::VectorXd& theta, const WlsSystem& sys, double ridge) {
    return energy(theta, sys) + ridge * theta.squaredNorm();
}

}  // namespace

int resolve_num_ctrl(int num_obs, const FitConfig& cfg) {
    if (cfg.num_ctrl > 0) {
        return cfg.num_ctrl;
    }
    if (!(cfg.ctrl_ratio > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "ctrl_ratio must be positive");
    }
    return std::max(cfg.degree + 1, static_cast<int>(std::lround(num_obs / cfg.ctrl_ratio)));
}

double orientation_sigma(double grad_mag, double sigma_H) {
    return std::sqrt(sigma_H * sigma_H + (kSigmaFloor * grad_mag) * (kSigmaFloor * grad_mag));
}

WlsSystem assemble_system(const ObservationSet& obs, const KnotVector& kv, const ContourModel* theta_prev,
                          const FitConfig& cfg) {
    check_counts(obs, kv);
    const DesignCache cache = make_cache(obs, kv);
    std::vector<double> speeds = theta_prev ? model_speeds(obs, *theta_prev) : chord_speeds(obs);
    floor_speeds(speeds);
    return build_system(obs, cache, speeds, cfg.orientation);
}

SolveResult solve_wls(const WlsSystem& sys, double ridge) {
    if (ridge < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "ridge must be nonnegative");
    }
    if (!sys.B.allFinite() || !sys.w.allFinite() || !sys.d.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "system contains non-finite entries");
    }
    if ((sys.w.array() < 0.0).any()) {
        throw Error(ErrorCode::InvalidArgument, "weights must be nonnegative");
    }
    const Eigen::MatrixXd btw = sys.B.transpose() * sys.w.asDiagonal();
    Eigen::MatrixXd normal = btw * sys.B;
    normal.diagonal().array() += ridge;
    const Eigen::VectorXd rhs = btw * sys.d;

    const Eigen::VectorXd diag = normal.diagonal();
    if ((diag.array() <= 0.0).any()) {
        throw Error(ErrorCode::SingularSystem, "a control point is not constrained by any observation");
    }
    const Eigen::VectorXd scale = diag.array().rsqrt();
    const Eigen::MatrixXd scaled = scale.asDiagonal() * normal * scale.asDiagonal();
    const Eigen::LLT<Eigen::MatrixXd> llt(scaled);
    const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
    if (llt.info() != Eigen::Success || rcond < 1e-15) {
        throw Error(ErrorCode::SingularSystem, "normal equations are singular");
    }
    SolveResult out;
    out.theta = scale.asDiagonal() * llt.solve(scale.asDiagonal() * rhs);
    out.condition_warning = rcond < 1e-10;
    return out;
}

double energy(const Eigen::VectorXd& theta, const WlsSystem& sys) {
    if (theta.size() != sys.B.cols()) {
        throw Error(ErrorCode::InvalidArgument, "control vector length does not match the system");
    }
    const Eigen::VectorXd r = sys.d - sys.B * theta;
    return r.dot(sys.w.asDiagonal() * r);
}

double default_ridge(const WlsSystem& sys) {
    const double trace = (sys.B.array().square().colwise() * sys.w.array()).sum();
    return 1e-8 * trace / std::max(1, 2 * sys.num_ctrl);
}

FitResult fit_stochastic(const ObservationSet& obs, const FitConfig& cfg) {
    obs.validate(cfg.degree);
    if (cfg.max_iters < 1) {
        throw Error(ErrorCode::InvalidArgument, "max_iters must be at least 1");
    }
    const int n = resolve_num_ctrl(obs.size(), cfg);
    if (n < cfg.degree + 1) {
        throw Error(ErrorCode::InvalidArgument, "num_ctrl must be at least degree + 1");
    }
    const KnotVector kv = make_knot_vector(n, cfg.degree, cfg.closed);
    check_counts(obs, kv);

    FitReport report;
    report.num_obs = obs.size();
    report.num_ctrl = n;
    report.sigma_H = obs.sigma_H;
    report.Sigma = cfg.Sigma.value_or(10.0 * obs.sigma_H * std::sqrt(std::max(obs.kernel_taps, 1)));
    if (!(report.Sigma > 0.0) && obs.sigma_H > 0.0) {
        throw Error(ErrorCode::InvalidArgument, "Sigma must be positive");
    }
    if (report.Sigma < 10.0 * obs.sigma_H) {
        report.warnings.emplace_back("Sigma < 10 sigma_H: the large-Sigma orientation model is a poor approximation");
    }

    const DesignCache cache = make_cache(obs, kv);
    const auto system_for = [&](const Eigen::VectorXd* theta) {
        std::vector<double> speeds =
            theta ? model_speeds(obs, ContourModel::from_stacked(kv, *theta)) : chord_speeds(obs);
        floor_speeds(speeds);
        return build_system(obs, cache, speeds, cfg.orientation);
    };
    const auto self_energy = [&](const Eigen::VectorXd& theta, double ridge) {
        return penalized(theta, system_for(&theta), ridge);
    };

    std::optional<Eigen::VectorXd> current;
    double current_energy = 0.0;
    for (int it = 0; it < cfg.max_iters; ++it) {
        const WlsSystem sys = current ? system_for(&*current) : system_for(nullptr);
        if (it == 0) {
            report.ridge = cfg.ridge.value_or(default_ridge(sys));
        }
        const SolveResult sol = solve_wls(sys, report.ridge);
        report.condition_warning = report.condition_warning || sol.condition_warning;

        Eigen::VectorXd candidate = sol.theta;
        double candidate_energy = self_energy(candidate, report.ridge);
        if (current) {
            const Eigen::VectorXd step = candidate - *current;
            const double tol = 1e-12 * std::max(1.0, current_energy);
            int halvings = 0;
            while (candidate_energy > current_energy + tol && halvings < 20) {
                ++halvings;
                candidate = *current + std::ldexp(1.0, -halvings) * step;
                candidate_energy = self_energy(candidate, report.ridge);
            }
            if (candidate_energy > current_energy + tol) {
                break;
            }
        }
        current = candidate;
        current_energy = candidate_energy;
        report.energy_trace.push_back(candidate_energy);
        report.iterations_used = it + 1;
    }

    ContourModel model = ContourModel::from_stacked(kv, *current);
    report.residual_rms = residual_rms(obs, model);
    return {std::move(model), std::move(report)};
}

ContourModel fit_classical(const ObservationSet& obs, const KnotVector& kv, double ridge) {
    const int m = obs.size();
    const int n = kv.num_ctrl();
    if (m < n) {
        std::ostringstream msg;
        msg << "M=" << m << " observations cannot determine N=" << n << " control points";
        throw Error(ErrorCode::Underdetermined, msg.str());
    }
    const DesignCache cache = make_cache(obs, kv);
    WlsSystem sys;
    sys.num_obs = m;
    sys.num_ctrl = n;
    sys.d = Eigen::VectorXd(2 * m);
    sys.w = Eigen::VectorXd::Ones(2 * m);
    sys.B = Eigen::MatrixXd::Zero(2 * m, 2 * n);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& o = obs.observations[static_cast<size_t>(i)];
        sys.B.block(i, 0, 1, n) = cache.value.row(i);
        sys.B.block(m + i, n, 1, n) = cache.value.row(i);
        sys.d[i] = o.px + kPixelCenter;
        sys.d[m + i] = o.py + kPixelCenter;
    }
    return ContourModel::from_stacked(kv, solve_wls(sys, ridge).theta);
}

double orientation_nll(const ObservationSet& obs, const ContourModel& model, double Sigma, bool exact) {
    if (!(Sigma > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "Sigma must be positive");
    }
    double total = 0.0;
    const double s2 = Sigma * Sigma;
    for (const auto& o : obs.observations) {
        const Point2 tan = eval_tangent(model, o.t);
        const double len = std::hypot(tan.x, tan.y);
        const double proj = len > 0.0 ? (o.g_x * tan.x + o.g_y * tan.y) / len : 0.0;
        const double mag2 = o.g_x * o.g_x + o.g_y * o.g_y;
        const double so = orientation_sigma(std::sqrt(mag2), obs.sigma_H);
        const double h2 = so * so;
        if (exact) {
            total += mag2 / (2.0 * h2 + s2) + proj * proj * s2 / (2.0 * h2 * (2.0 * h2 + s2));
        } else {
            total += mag2 / s2 + proj * proj / (2.0 * h2);
        }
    }
    return total;
}

double residual_rms(const ObservationSet& obs, const ContourModel& model, bool integer_positions) {
    if (obs.observations.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& o : obs.observations) {
        const Point2 p = eval_curve(model, o.t);
        const double dx = (integer_positions ? o.px + kPixelCenter : o.x_o) - p.x;
        const double dy = (integer_positions ? o.py + kPixelCenter : o.y_o) - p.y;
        sum += dx * dx + dy * dy;
    }
    return std::sqrt(sum / static_cast<double>(obs.observations.size()));
}

}  // namespace subedge
