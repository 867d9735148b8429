/**
 * @file bspline.cpp
 * @brief Cox-de Boor basis evaluation, curve/tangent evaluation, design matrices.
 */

#include <subedge/bspline.hpp>
#include <subedge/error.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace subedge {

namespace {

/// a / b with the 0/0 (and x/0) convention of the recursion.
double safe_ratio(double a, double b) {
    return b == 0.0 ? 0.0 : a / b;
}

[[noreturn]] void domain_error(double t, double lo, double hi) {
    std::ostringstream msg;
    msg << "parameter t=" << t << " outside [" << lo << ", " << hi << "]";
    throw Error(ErrorCode::DomainError, msg.str());
}

/// Degree-0 indicator with half-open spans; the last nondegenerate span is closed.
double indicator(const std::vector<double>& k, int i, double t) {
    const double lo = k[static_cast<size_t>(i)];
    const double hi = k[static_cast<size_t>(i) + 1];
    if (lo <= t && t < hi) {
        return 1.0;
    }
    if (t == k.back() && hi == k.back() && lo < hi) {
        return 1.0;
    }
    return 0.0;
}

double recurse(const std::vector<double>& k, int i, int n, double t) {
    if (n == 0) {
        return indicator(k, i, t);
    }
    const auto ki = [&](int j) { return k[static_cast<size_t>(j)]; };
    const double left = safe_ratio(t - ki(i), ki(i + n) - ki(i));
    const double right = safe_ratio(ki(i + n + 1) - t, ki(i + n + 1) - ki(i + 1));
    double value = 0.0;
    if (left != 0.0) {
        value += left * recurse(k, i, n - 1, t);
    }
    if (right != 0.0) {
        value += right * recurse(k, i + 1, n - 1, t);
    }
    return value;
}

void check_basis_args(const KnotVector& kv, int i, int n, double t) {
    if (n < 0) {
        throw Error(ErrorCode::InvalidArgument, "basis degree must be nonnegative");
    }
    const int count = kv.size() - n - 1;
    if (i < 0 || i >= count) {
        std::ostringstream msg;
        msg << "basis index " << i << " outside [0, " << count << ") for degree " << n;
        throw Error(ErrorCode::InvalidArgument, msg.str());
    }
    const auto& k = kv.knots();
    if (!(t >= k.front() && t <= k.back())) {
        domain_error(t, k.front(), k.back());
    }
}

/// table[p][r] = B_{s-p+r, p}(t) for p = 0..n.
std::vector<std::vector<double>> basis_table(const KnotVector& kv, int span, double t) {
    const int n = kv.degree();
    std::vector<std::vector<double>> table(static_cast<size_t>(n) + 1);
    table[0] = {1.0};
    for (int p = 1; p <= n; ++p) {
        const auto& prev = table[static_cast<size_t>(p) - 1];
        auto& cur = table[static_cast<size_t>(p)];
        cur.assign(static_cast<size_t>(p) + 1, 0.0);
        for (int r = 0; r <= p; ++r) {
            const int i = span - p + r;
            const double lower = r >= 1 ? prev[static_cast<size_t>(r) - 1] : 0.0;
            const double upper = r <= p - 1 ? prev[static_cast<size_t>(r)] : 0.0;
            double v = 0.0;
            if (lower != 0.0) {
                v += safe_ratio(t - kv[i], kv[i + p] - kv[i]) * lower;
            }
            if (upper != 0.0) {
                v += safe_ratio(kv[i + p + 1] - t, kv[i + p + 1] - kv[i + 1]) * upper;
            }
            cur[static_cast<size_t>(r)] = v;
        }
    }
    return table;
}

/// Closed curves are periodic: the domain end is the same point as its start.
double wrap_parameter(const KnotVector& kv, double t) {
    if (!kv.in_domain(t)) {
        domain_error(t, kv.domain_begin(), kv.domain_end());
    }
    if (kv.closed() && t == kv.domain_end()) {
        return kv.domain_begin();
    }
    return t;
}

}  // namespace

KnotVector::KnotVector(std::vector<double> knots, int degree, bool closed)
    : knots_(std::move(knots)), degree_(degree), closed_(closed) {
    if (degree_ < 0) {
        throw Error(ErrorCode::InvalidArgument, "degree must be nonnegative");
    }
    for (double v : knots_) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::InvalidArgument, "knots must be finite");
        }
    }
    if (!std::is_sorted(knots_.begin(), knots_.end())) {
        throw Error(ErrorCode::InvalidArgument, "knots must be nondecreasing");
    }
    const int min_size = closed_ ? 3 * degree_ + 2 : 2 * (degree_ + 1);
    if (size() < min_size) {
        std::ostringstream msg;
        msg << "need at least " << min_size << " knots for degree " << degree_ << ", got " << size();
        throw Error(ErrorCode::InvalidArgument, msg.str());
    }
    if (!(domain_begin() < domain_end())) {
        throw Error(ErrorCode::InvalidArgument, "knot vector has an empty curve domain");
    }
    if (closed_) {
        const double step = knots_[1] - knots_[0];
        for (size_t i = 1; i < knots_.size(); ++i) {
            if (std::abs((knots_[i] - knots_[i - 1]) - step) > 1e-9 * std::max(1.0, std::abs(step))) {
                throw Error(ErrorCode::InvalidArgument, "closed knot vectors must be uniform");
            }
        }
    }
}

int KnotVector::find_span(double t) const {
    if (!in_domain(t)) {
        domain_error(t, domain_begin(), domain_end());
    }
    const int lo = degree_;
    const int hi = size() - degree_ - 2;
    if (t == domain_end()) {
        int s = hi;
        while (s > lo && !((*this)[s] < (*this)[s + 1])) {
            --s;
        }
        return s;
    }
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const int s = static_cast<int>(it - knots_.begin()) - 1;
    return std::clamp(s, lo, hi);
}

KnotVector make_knot_vector(int num_ctrl, int degree, bool closed) {
    if (degree < 0) {
        throw Error(ErrorCode::InvalidArgument, "degree must be nonnegative");
    }
    if (num_ctrl < degree + 1) {
        std::ostringstream msg;
        msg << "num_ctrl=" << num_ctrl << " too small for degree " << degree;
        throw Error(ErrorCode::InvalidArgument, msg.str());
    }
    std::vector<double> knots;
    if (closed) {
        const int count = num_ctrl + 2 * degree + 1;
        knots.reserve(static_cast<size_t>(count));
        for (int j = 0; j < count; ++j) {
            knots.push_back(static_cast<double>(j - degree) / num_ctrl);
        }
    } else {
        const int spans = num_ctrl - degree;
        knots.assign(static_cast<size_t>(degree) + 1, 0.0);
        for (int j = 1; j < spans; ++j) {
            knots.push_back(static_cast<double>(j) / spans);
        }
        knots.insert(knots.end(), static_cast<size_t>(degree) + 1, 1.0);
    }
    return KnotVector(std::move(knots), degree, closed);
}

double basis_value(const KnotVector& kv, int i, int n, double t) {
    check_basis_args(kv, i, n, t);
    return recurse(kv.knots(), i, n, t);
}

double basis_derivative(const KnotVector& kv, int i, int n, double t) {
    if (n == 0) {
        throw Error(ErrorCode::InvalidArgument, "derivative basis requires degree >= 1");
    }
    check_basis_args(kv, i, n, t);
    const auto& k = kv.knots();
    const auto ki = [&](int j) { return k[static_cast<size_t>(j)]; };
    const double a = safe_ratio(n, ki(i + n) - ki(i));
    const double b = safe_ratio(n, ki(i + n + 1) - ki(i + 1));
    double value = 0.0;
    if (a != 0.0) {
        value += a * recurse(k, i, n - 1, t);
    }
    if (b != 0.0) {
        value -= b * recurse(k, i + 1, n - 1, t);
    }
    return value;
}

BasisSpan nonzero_basis(const KnotVector& kv, double t) {
    t = wrap_parameter(kv, t);
    const int n = kv.degree();
    const int s = kv.find_span(t);
    const auto table = basis_table(kv, s, t);

    BasisSpan out;
    out.first = s - n;
    out.values = table[static_cast<size_t>(n)];
    out.derivatives.assign(static_cast<size_t>(n) + 1, 0.0);
    if (n == 0) {
        return out;
    }
    // dB_{i,n} = n/(t_{i+n}-t_i) B_{i,n-1} - n/(t_{i+n+1}-t_{i+1}) B_{i+1,n-1}
    const auto& lower = table[static_cast<size_t>(n) - 1];
    for (int r = 0; r <= n; ++r) {
        const int i = s - n + r;
        const double left = r >= 1 ? lower[static_cast<size_t>(r) - 1] : 0.0;
        const double right = r <= n - 1 ? lower[static_cast<size_t>(r)] : 0.0;
        double d = 0.0;
        if (left != 0.0) {
            d += safe_ratio(n, kv[i + n] - kv[i]) * left;
        }
        if (right != 0.0) {
            d -= safe_ratio(n, kv[i + n + 1] - kv[i + 1]) * right;
        }
        out.derivatives[static_cast<size_t>(r)] = d;
    }
    return out;
}

ContourModel::ContourModel(KnotVector knots, std::vector<double> theta_x, std::vector<double> theta_y)
    : knots_(std::move(knots)), theta_x_(std::move(theta_x)), theta_y_(std::move(theta_y)) {
    if (theta_x_.size() != theta_y_.size()) {
        throw Error(ErrorCode::InvalidArgument, "theta_x and theta_y differ in length");
    }
    if (static_cast<int>(theta_x_.size()) != knots_.num_ctrl()) {
        std::ostringstream msg;
        msg << "knot vector expects " << knots_.num_ctrl() << " control points, got " << theta_x_.size();
        throw Error(ErrorCode::InvalidArgument, msg.str());
    }
}

Eigen::VectorXd ContourModel::stacked() const {
    const auto n = static_cast<Eigen::Index>(theta_x_.size());
    Eigen::VectorXd theta(2 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        theta[j] = theta_x_[static_cast<size_t>(j)];
        theta[n + j] = theta_y_[static_cast<size_t>(j)];
    }
    return theta;
}

ContourModel ContourModel::from_stacked(const KnotVector& knots, const Eigen::VectorXd& theta) {
    const auto n = static_cast<Eigen::Index>(knots.num_ctrl());
    if (theta.size() != 2 * n) {
        throw Error(ErrorCode::InvalidArgument, "stacked control vector has the wrong length");
    }
    std::vector<double> tx(theta.data(), theta.data() + n);
    std::vector<double> ty(theta.data() + n, theta.data() + 2 * n);
    return ContourModel(knots, std::move(tx), std::move(ty));
}

Point2 eval_curve(const ContourModel& model, double t) {
    const auto& kv = model.knots();
    const BasisSpan b = nonzero_basis(kv, t);
    Point2 p;
    for (size_t r = 0; r < b.values.size(); ++r) {
        const auto c = static_cast<size_t>(kv.wrap(b.first + static_cast<int>(r)));
        p.x += b.values[r] * model.theta_x()[c];
        p.y += b.values[r] * model.theta_y()[c];
    }
    return p;
}

Point2 eval_tangent(const ContourModel& model, double t) {
    const auto& kv = model.knots();
    if (kv.degree() == 0) {
        return {};
    }
    const BasisSpan b = nonzero_basis(kv, t);
    Point2 d;
    for (size_t r = 0; r < b.derivatives.size(); ++r) {
        const auto c = static_cast<size_t>(kv.wrap(b.first + static_cast<int>(r)));
        d.x += b.derivatives[r] * model.theta_x()[c];
        d.y += b.derivatives[r] * model.theta_y()[c];
    }
    return d;
}

Eigen::MatrixXd design_matrix(const KnotVector& kv, std::span<const double> params, bool derivative) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(params.size()), kv.num_ctrl());
    for (size_t row = 0; row < params.size(); ++row) {
        const BasisSpan b = nonzero_basis(kv, params[row]);
        const auto& src = derivative ? b.derivatives : b.values;
        for (size_t r = 0; r < src.size(); ++r) {
            m(static_cast<Eigen::Index>(row), kv.wrap(b.first + static_cast<int>(r))) += src[r];
        }
    }
    return m;
}

}  // namespace subedge
