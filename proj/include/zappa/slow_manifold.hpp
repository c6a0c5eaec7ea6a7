#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "zappa/cross_section.hpp"
#include "zappa/error.hpp"
#include "zappa/kernel.hpp"
#include "zappa/polynomial.hpp"
#include "zappa/profile.hpp"

namespace zappa {

/**
 * @brief Shape functions V_n(y) and macroscale coefficients A_n of the slow manifold.
 *
 * On the manifold u = sum_n V_n d^n U/dx^n and U_t = sum_n A_n d^n U/dx^n,
 * with U the cross-sectional mean of u, so V_0 = 1 and mean(V_n) = 0 for n >= 1.
 * The nodal form is always filled; the exact form only when every kernel
 * moment up to the order is an exact polynomial.
 */
struct SlowManifold {
    int order = 0;
    std::string method;  ///< "hierarchy", "eigenspace" or "closed-form"
    CrossSection cs;
    std::vector<CrossField> V;  ///< V_0 .. V_N at the nodes
    std::vector<double> A;      ///< A_1 .. A_N, so A[n-1] is A_n
    std::optional<std::vector<YPolynomial>> V_exact;
    std::optional<std::vector<Rational>> A_exact;

    struct Validation {
        std::vector<double> hierarchy_residual;  ///< per n = 1..N, sup-norm at nodes
        std::vector<double> solvability;         ///< |mean(g_n)| after A_n is inserted
        double eigen_residual = std::numeric_limits<double>::quiet_NaN();
        bool next_moment_exists = true;  ///< order N+1 moment, needed for a quantified error
    } validation;

    double coefficient(int n) const { return A.at(static_cast<std::size_t>(n - 1)); }
    bool exact() const noexcept { return A_exact.has_value(); }
    /// Orders above 2 carry no error guarantee.
    bool extension() const noexcept { return order > 2; }
};

namespace detail {

/// Field-generic hierarchy: L0 V_n = sum_{m=1..n} (V_{n-m} A_m - L_m V_{n-m}).
template <class Field, class Scalar, class ApplyMoment, class Mean>
void solve_hierarchy(int order, const Field& one, ApplyMoment&& apply_moment, Mean&& mean, std::vector<Field>& V,
                     std::vector<Scalar>& A, std::vector<Field>& forcing, std::vector<Scalar>& solvability) {
    V.assign(1, one);
    A.clear();
    for (int n = 1; n <= order; ++n) {
        Field moments = apply_moment(1, V[static_cast<std::size_t>(n - 1)]);
        for (int m = 2; m <= n; ++m) moments += apply_moment(m, V[static_cast<std::size_t>(n - m)]);
        A.push_back(mean(moments));

        Field g = -moments;
        for (int m = 1; m <= n; ++m) g += V[static_cast<std::size_t>(n - m)] * A[static_cast<std::size_t>(m - 1)];
        Scalar g_mean = mean(g);
        solvability.push_back(g_mean);
        // 0-operator is w -> mean(w) - w, so w = mean(g) - g solves it with zero mean
        Field w = -g;
        w += one * g_mean;
        V.push_back(std::move(w));
        forcing.push_back(std::move(g));
    }
}

inline double sup_abs(const CrossField& f) { return f.max_abs(); }

inline SlowManifold finish_numeric(int order, const std::string& method, const CrossSection& cs,
                                   std::vector<CrossField> V, std::vector<double> A,
                                   const std::vector<CrossField>& forcing, const std::vector<double>& solvability) {
    SlowManifold sm;
    sm.order = order;
    sm.method = method;
    sm.cs = cs;
    sm.V = std::move(V);
    sm.A = std::move(A);
    MomentOperator zap{0, cs, {}, {}};
    for (int n = 1; n <= order; ++n) {
        CrossField r = apply(zap, sm.V[static_cast<std::size_t>(n)]) - forcing[static_cast<std::size_t>(n - 1)];
        sm.validation.hierarchy_residual.push_back(sup_abs(r));
        sm.validation.solvability.push_back(std::abs(solvability[static_cast<std::size_t>(n - 1)]));
    }
    return sm;
}

inline void check_derivable(const JumpKernel& k, int order, const CrossSection& cs) {
    if (order < 1) throw InvalidArgument("slow-manifold order must be positive, got " + std::to_string(order));
    if (auto check = moment_exists(order, k); !check.exists)
        throw MomentDivergence(check.diagnostic, check.first_failing_order);
    if (const auto* v = k.profile()) (void)eval_profile(*v, cs);  // throws on v <= 0
}

inline bool all_exact(const JumpKernel& k, int order) {
    for (int n = 1; n <= order; ++n)
        if (!exact_moment_coefficient(n, k)) return false;
    return true;
}

}  // namespace detail

/// Hierarchy path on nodal values only.
inline SlowManifold derive_numeric(const JumpKernel& k, int order, const CrossSection& cs) {
    detail::check_derivable(k, order, cs);
    std::vector<MomentOperator> ops;
    for (int n = 0; n <= order; ++n) ops.push_back(moment_operator(n, k, cs));
    std::vector<CrossField> V, forcing;
    std::vector<double> A, solvability;
    detail::solve_hierarchy<CrossField, double>(
        order, CrossField(cs.size(), 1.0),
        [&](int m, const CrossField& f) { return apply(ops[static_cast<std::size_t>(m)], f); },
        [&](const CrossField& f) { return cross_mean(f, cs); }, V, A, forcing, solvability);
    SlowManifold sm = detail::finish_numeric(order, "hierarchy", cs, std::move(V), std::move(A), forcing, solvability);
    sm.validation.next_moment_exists = moment_exists(order + 1, k).exists;
    return sm;
}

/**
 * @brief Solves the slow-manifold hierarchy to the given order.
 *
 * For each n the solvability condition mean(g_n) = 0 fixes
 * A_n = mean(sum_{m=1..n} L_m V_{n-m}), and V_n = mean(g_n) - g_n. When all
 * moments are exact polynomials this runs in exact rational arithmetic and
 * the nodal values are sampled from the exact result.
 */
inline SlowManifold derive(const JumpKernel& k, int order, const CrossSection& cs) {
    detail::check_derivable(k, order, cs);
    if (!detail::all_exact(k, order)) return derive_numeric(k, order, cs);

    std::vector<YPolynomial> moments;
    moments.push_back(YPolynomial::constant(1));
    for (int n = 1; n <= order; ++n) moments.push_back(*exact_moment_coefficient(n, k));

    std::vector<YPolynomial> V, forcing;
    std::vector<Rational> A, solvability;
    detail::solve_hierarchy<YPolynomial, Rational>(
        order, YPolynomial::constant(1),
        [&](int m, const YPolynomial& f) { return moments[static_cast<std::size_t>(m)] * f; },
        [](const YPolynomial& f) { return f.mean(); }, V, A, forcing, solvability);

    SlowManifold sm;
    sm.order = order;
    sm.method = "hierarchy";
    sm.cs = cs;
    for (const auto& p : V) sm.V.push_back(CrossField::sample(p, cs));
    for (const auto& a : A) sm.A.push_back(to_double(a));
    for (int n = 1; n <= order; ++n) {
        const auto& Vn = V[static_cast<std::size_t>(n)];
        YPolynomial r = (YPolynomial::constant(Vn.mean()) - Vn) - forcing[static_cast<std::size_t>(n - 1)];
        // exact path: any nonzero coefficient is a genuine failure
        sm.validation.hierarchy_residual.push_back(r.is_zero() ? 0.0 : std::numeric_limits<double>::infinity());
        sm.validation.solvability.push_back(std::abs(to_double(solvability[static_cast<std::size_t>(n - 1)])));
    }
    sm.V_exact = std::move(V);
    sm.A_exact = std::move(A);
    sm.validation.next_moment_exists = moment_exists(order + 1, k).exists;
    return sm;
}

/// Explicit second-order formulas in terms of cross-channel averages of v.
inline SlowManifold closed_form_order2(const VelocityProfile& v, const CrossSection& cs) {
    CrossField vn = eval_profile(v, cs);
    SlowManifold sm;
    sm.order = 2;
    sm.method = "closed-form";
    sm.cs = cs;
    if (const auto* p = v.polynomial()) {
        const YPolynomial& vp = *p;
        const Rational vbar = vp.mean();
        const Rational v2bar = (vp * vp).mean();
        const YPolynomial one = YPolynomial::constant(1);
        YPolynomial V1 = YPolynomial::constant(vbar) - vp;
        YPolynomial V2 = 2 * (YPolynomial::constant(vbar * vbar - v2bar) - vbar * vp + vp * vp);
        const YPolynomial dev = vp - YPolynomial::constant(vbar);
        Rational A2 = (dev * dev).mean() + v2bar;
        sm.V_exact = std::vector<YPolynomial>{one, V1, V2};
        sm.A_exact = std::vector<Rational>{-vbar, A2};
        for (const auto& q : *sm.V_exact) sm.V.push_back(CrossField::sample(q, cs));
        for (const auto& a : *sm.A_exact) sm.A.push_back(to_double(a));
        return sm;
    }
    const double vbar = cross_mean(vn, cs);
    const double v2bar = cross_mean(vn * vn, cs);
    CrossField dev = vn;
    dev += -vbar;
    CrossField V1 = -vn;
    V1 += vbar;
    CrossField V2 = (vn * vn - vbar * vn) * 2.0;
    V2 += 2.0 * (vbar * vbar - v2bar);
    sm.V = {CrossField(cs.size(), 1.0), V1, V2};
    sm.A = {-vbar, cross_mean(dev * dev, cs) + v2bar};
    return sm;
}

/**
 * @brief Block upper-triangular operator of the generating polynomial.
 *
 * Acts on stacks (u_0, ..., u_N) of nodal fields, the coefficients of the
 * generating polynomial in the basis {1, z, z^2/2!, ..., z^N/N!}. Block (i, i+m)
 * is the m-th moment operator; blocks below the diagonal are zero.
 */
struct BlockOperator {
    int order = 0;
    std::size_t n_nodes = 0;
    Eigen::MatrixXd matrix;

    Eigen::MatrixXd block(int i, int j) const {
        const auto n = static_cast<Eigen::Index>(n_nodes);
        return matrix.block(i * n, j * n, n, n);
    }
};

/// Dense matrix of a moment operator in the nodal basis.
inline Eigen::MatrixXd operator_matrix(const MomentOperator& op) {
    const auto n = static_cast<Eigen::Index>(op.cs.size());
    if (op.order == 0) {
        Eigen::MatrixXd m(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
            for (Eigen::Index c = 0; c < n; ++c) m(r, c) = 0.5 * op.cs.weights[static_cast<std::size_t>(c)];
        m -= Eigen::MatrixXd::Identity(n, n);
        return m;
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r) m(r, r) = op.multiplier[static_cast<std::size_t>(r)];
    return m;
}

inline BlockOperator block_operator(const JumpKernel& k, int order, const CrossSection& cs) {
    detail::check_derivable(k, order, cs);
    BlockOperator B;
    B.order = order;
    B.n_nodes = cs.size();
    const auto n = static_cast<Eigen::Index>(cs.size());
    const Eigen::Index dim = (order + 1) * n;
    B.matrix = Eigen::MatrixXd::Zero(dim, dim);
    for (int m = 0; m <= order; ++m) {
        const Eigen::MatrixXd Lm = operator_matrix(moment_operator(m, k, cs));
        for (int i = 0; i + m <= order; ++i) B.matrix.block(i * n, (i + m) * n, n, n) = Lm;
    }
    return B;
}

/**
 * @brief Generalized zero-eigenspace of the block operator, solving L V = V A.
 *
 * Works only from the assembled matrix: the zero-operator block's null vectors
 * come from an SVD, each A_n from the left null vector, and each V_n from a
 * constrained least-squares solve with mean(V_n) = 0 (mean(V_0) = 1).
 */
inline SlowManifold zero_eigenspace(const BlockOperator& B, const CrossSection& cs) {
    if (B.n_nodes != cs.size())
        throw InvalidArgument("block operator built on " + std::to_string(B.n_nodes) + " nodes, cross-section has " +
                              std::to_string(cs.size()));
    const auto n = static_cast<Eigen::Index>(cs.size());
    const int order = B.order;
    const Eigen::MatrixXd L0 = B.block(0, 0);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(L0, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smallest = sv(n - 1);
    const double second = sv(n - 2);
    if (smallest > 1e-8 * sv(0)) throw NumericalDegeneracy("zero-order block has no zero eigenvalue");
    if (second < 1e-8 * sv(0)) throw NumericalDegeneracy("zero-order block has a degenerate null space");
    const Eigen::VectorXd right = svd.matrixV().col(n - 1);
    const Eigen::VectorXd left = svd.matrixU().col(n - 1);

    Eigen::RowVectorXd mean_row(n);
    for (Eigen::Index j = 0; j < n; ++j) mean_row(j) = 0.5 * cs.weights[static_cast<std::size_t>(j)];

    const double right_mean = mean_row.dot(right);
    if (std::abs(right_mean) < 1e-12) throw NumericalDegeneracy("null vector of the zero-order block has zero mean");
    std::vector<Eigen::VectorXd> V{right / right_mean};
    std::vector<double> A;

    const double z0 = left.dot(V[0]);
    if (std::abs(z0) < 1e-12) throw NumericalDegeneracy("solvability system is singular");

    Eigen::MatrixXd constrained(n + 1, n);
    constrained.topRows(n) = L0;
    constrained.row(n) = mean_row;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(constrained);

    std::vector<CrossField> forcing;
    std::vector<double> solvability;
    for (int k = 1; k <= order; ++k) {
        Eigen::VectorXd moments = Eigen::VectorXd::Zero(n);
        for (int m = 1; m <= k; ++m) moments += B.block(0, m) * V[static_cast<std::size_t>(k - m)];
        double numer = left.dot(moments);
        for (int m = 1; m < k; ++m) numer -= A[static_cast<std::size_t>(m - 1)] * left.dot(V[static_cast<std::size_t>(k - m)]);
        A.push_back(numer / z0);

        Eigen::VectorXd g = -moments;
        for (int m = 1; m <= k; ++m) g += A[static_cast<std::size_t>(m - 1)] * V[static_cast<std::size_t>(k - m)];
        Eigen::VectorXd rhs(n + 1);
        rhs.head(n) = g;
        rhs(n) = 0.0;
        V.push_back(qr.solve(rhs));
        forcing.emplace_back(std::vector<double>(g.data(), g.data() + n));
        solvability.push_back(mean_row.dot(g));
    }

    std::vector<CrossField> Vf;
    for (const auto& vec : V) Vf.emplace_back(std::vector<double>(vec.data(), vec.data() + n));
    SlowManifold sm = detail::finish_numeric(order, "eigenspace", cs, std::move(Vf), std::move(A), forcing, solvability);

    // residual of L*Vmat - Vmat*Amat on the full block system
    const Eigen::Index dim = (order + 1) * n;
    Eigen::MatrixXd Vmat = Eigen::MatrixXd::Zero(dim, order + 1);
    Eigen::MatrixXd Amat = Eigen::MatrixXd::Zero(order + 1, order + 1);
    for (int col = 0; col <= order; ++col) {
        for (int row = 0; row <= col; ++row) Vmat.block(row * n, col, n, 1) = V[static_cast<std::size_t>(col - row)];
        for (int row = 0; row < col; ++row) Amat(row, col) = sm.A[static_cast<std::size_t>(col - row - 1)];
    }
    sm.validation.eigen_residual = (B.matrix * Vmat - Vmat * Amat).cwiseAbs().maxCoeff();
    return sm;
}

/// Spectrum of the block operator, from its diagonal blocks (the matrix is block triangular).
inline std::vector<std::complex<double>> block_spectrum(const BlockOperator& B) {
    std::vector<std::complex<double>> out;
    for (int i = 0; i <= B.order; ++i) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(B.block(i, i), false);
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) out.push_back(es.eigenvalues()(k));
    }
    return out;
}

/// Spectrum from one dense eigensolve of the whole matrix.
inline std::vector<std::complex<double>> dense_spectrum(const BlockOperator& B) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(B.matrix, false);
    std::vector<std::complex<double>> out;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) out.push_back(es.eigenvalues()(k));
    return out;
}

}  // namespace zappa
