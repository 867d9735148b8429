/**
 * @file bspline.hpp
 * @brief Knot vectors, B-spline basis evaluation and parametric contour curves.
 *
 * Two evaluation paths are provided:
 * - basis_value / basis_derivative: the literal Cox-de Boor recursion for a
 *   single basis function, valid over the whole knot range.
 * - nonzero_basis: the triangular table for the (degree+1) functions that are
 *   nonzero on one knot span. Curve evaluation and design matrices use it.
 *
 * Conventions:
 * - Knot spans are half-open [t_i, t_{i+1}); the very last span is closed.
 * - Any recursion term with a zero denominator (repeated knots) is 0.
 * - Closed contours use uniform periodic knots; basis index i maps to control
 *   point i mod N, so N equals the number of free control points.
 */

#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace subedge {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

class KnotVector {
public:
    /// Validates monotonicity and size. Closed vectors must be uniform.
    KnotVector(std::vector<double> knots, int degree, bool closed);

    [[nodiscard]] const std::vector<double>& knots() const noexcept { return knots_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] bool closed() const noexcept { return closed_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(knots_.size()); }
    [[nodiscard]] double operator[](int i) const { return knots_[static_cast<size_t>(i)]; }

    /// Number of degree-n basis functions B_{0..k-n-2} defined by the knots.
    [[nodiscard]] int num_basis() const noexcept { return size() - degree_ - 1; }
    /// Number of independent control points (wrapped basis count when closed).
    [[nodiscard]] int num_ctrl() const noexcept {
        return closed_ ? num_basis() - degree_ : num_basis();
    }
    /// Control point that basis function i multiplies.
    [[nodiscard]] int wrap(int basis_index) const noexcept {
        return closed_ ? basis_index % num_ctrl() : basis_index;
    }

    /// Curve parameter domain [t_n, t_{k-n-1}].
    [[nodiscard]] double domain_begin() const { return (*this)[degree_]; }
    [[nodiscard]] double domain_end() const { return (*this)[size() - degree_ - 1]; }
    [[nodiscard]] bool in_domain(double t) const { return t >= domain_begin() && t <= domain_end(); }

    /// Span index s in [n, k-n-2] with t_s <= t < t_{s+1}; the final span is closed.
    /// Throws DomainError outside the curve domain.
    [[nodiscard]] int find_span(double t) const;

private:
    std::vector<double> knots_;
    int degree_;
    bool closed_;
};

/// Uniform knots over [0, 1]: clamped (end multiplicity degree+1) when open,
/// strictly uniform with spacing 1/num_ctrl when closed.
KnotVector make_knot_vector(int num_ctrl, int degree = 3, bool closed = false);

/// B_{i,n}(t) by direct recursion. t must lie in [t_0, t_{k-1}].
double basis_value(const KnotVector& kv, int i, int n, double t);

/// dB_{i,n}/dt from the two degree n-1 neighbours. Requires n >= 1.
double basis_derivative(const KnotVector& kv, int i, int n, double t);

/// The degree+1 basis functions that may be nonzero at t.
/// values[r] and derivatives[r] belong to basis index first + r (unwrapped).
struct BasisSpan {
    int first = 0;
    std::vector<double> values;
    std::vector<double> derivatives;
};

BasisSpan nonzero_basis(const KnotVector& kv, double t);

class ContourModel {
public:
    ContourModel(KnotVector knots, std::vector<double> theta_x, std::vector<double> theta_y);

    [[nodiscard]] const KnotVector& knots() const noexcept { return knots_; }
    [[nodiscard]] const std::vector<double>& theta_x() const noexcept { return theta_x_; }
    [[nodiscard]] const std::vector<double>& theta_y() const noexcept { return theta_y_; }
    [[nodiscard]] int num_ctrl() const noexcept { return static_cast<int>(theta_x_.size()); }
    [[nodiscard]] bool closed() const noexcept { return knots_.closed(); }

    /// Control vector stacked as (theta_x, theta_y), the layout used by the solver.
    [[nodiscard]] Eigen::VectorXd stacked() const;
    static ContourModel from_stacked(const KnotVector& knots, const Eigen::VectorXd& theta);

private:
    KnotVector knots_;
    std::vector<double> theta_x_;
    std::vector<double> theta_y_;
};

Point2 eval_curve(const ContourModel& model, double t);
Point2 eval_tangent(const ContourModel& model, double t);

/// Rows = params, cols = num_ctrl. Entry (r, c) sums every basis function that
/// maps to control point c (only one unless the contour is closed).
Eigen::MatrixXd design_matrix(const KnotVector& kv, std::span<const double> params, bool derivative);

}  // namespace subedge
