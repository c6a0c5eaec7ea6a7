#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zappa/error.hpp"
#include "zappa/polynomial.hpp"

namespace zappa {

/// Gauss–Legendre discretization of the channel cross-section -1 < y < 1.
struct CrossSection {
    std::vector<double> nodes;    ///< ascending, strictly inside (-1, 1)
    std::vector<double> weights;  ///< positive, summing to 2

    std::size_t size() const noexcept { return nodes.size(); }
    friend bool operator==(const CrossSection&, const CrossSection&) = default;
};

inline constexpr int kDefaultCrossNodes = 16;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
inline CrossSection build_cross_section(int n_nodes = kDefaultCrossNodes) {
    if (n_nodes < 2) throw InvalidArgument("cross-section needs at least 2 nodes, got " + std::to_string(n_nodes));
    const auto n = static_cast<std::size_t>(n_nodes);
    CrossSection cs;
    cs.nodes.assign(n, 0.0);
    cs.weights.assign(n, 0.0);
    // Newton on P_n from the Tricomi initial guess; the rule is symmetric, so
    // only the non-negative half is iterated and mirrored.
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                double pk = ((2.0 * static_cast<double>(k) - 1.0) * x * p1 - (static_cast<double>(k) - 1.0) * p0) /
                            static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute the derivative at the converged root
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            double pk = ((2.0 * static_cast<double>(k) - 1.0) * x * p1 - (static_cast<double>(k) - 1.0) * p0) /
                        static_cast<double>(k);
            p0 = p1;
            p1 = pk;
        }
        dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        cs.nodes[n - 1 - i] = x;
        cs.nodes[i] = -x;
        cs.weights[n - 1 - i] = w;
        cs.weights[i] = w;
    }
    if (n % 2 == 1) cs.nodes[n / 2] = 0.0;
    return cs;
}

/// A function of y sampled at the nodes of a cross-section.
struct CrossField {
    std::vector<double> values;

    CrossField() = default;
    explicit CrossField(std::vector<double> v) : values(std::move(v)) {}
    CrossField(std::size_t n, double fill) : values(n, fill) {}

    static CrossField sample(const YPolynomial& p, const CrossSection& cs) {
        CrossField f(cs.size(), 0.0);
        for (std::size_t j = 0; j < cs.size(); ++j) f.values[j] = p(cs.nodes[j]);
        return f;
    }

    std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t j) { return values[j]; }
    double operator[](std::size_t j) const { return values[j]; }

    CrossField& operator+=(const CrossField& o) {
        check_size(o);
        for (std::size_t j = 0; j < values.size(); ++j) values[j] += o.values[j];
        return *this;
    }
    CrossField& operator-=(const CrossField& o) {
        check_size(o);
        for (std::size_t j = 0; j < values.size(); ++j) values[j] -= o.values[j];
        return *this;
    }
    CrossField& operator*=(double s) {
        for (double& v : values) v *= s;
        return *this;
    }
    CrossField& operator+=(double s) {
        for (double& v : values) v += s;
        return *this;
    }

    friend CrossField operator+(CrossField a, const CrossField& b) { return a += b; }
    friend CrossField operator-(CrossField a, const CrossField& b) { return a -= b; }
    friend CrossField operator-(CrossField a) { return a *= -1.0; }
    friend CrossField operator*(CrossField a, double s) { return a *= s; }
    friend CrossField operator*(double s, CrossField a) { return a *= s; }
    /// Pointwise product.
    friend CrossField operator*(const CrossField& a, const CrossField& b) {
        a.check_size(b);
        CrossField out = a;
        for (std::size_t j = 0; j < out.values.size(); ++j) out.values[j] *= b.values[j];
        return out;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

private:
    void check_size(const CrossField& o) const {
        if (o.values.size() != values.size())
            throw InvalidArgument("cross-field size mismatch: " + std::to_string(values.size()) + " vs " +
                                  std::to_string(o.values.size()));
    }
};

/// (1/2) * sum_j w_j f_j, summed in node order.
inline double cross_mean(std::span<const double> f, const CrossSection& cs) {
    if (f.size() != cs.size())
        throw InvalidArgument("cross_mean: field has " + std::to_string(f.size()) + " values, cross-section has " +
                              std::to_string(cs.size()) + " nodes");
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) acc += cs.weights[j] * f[j];
    return 0.5 * acc;
}

inline double cross_mean(const CrossField& f, const CrossSection& cs) { return cross_mean(std::span(f.values), cs); }

/// Exact cross-sectional mean of a polynomial.
inline Rational cross_mean(const YPolynomial& p) { return p.mean(); }
inline Rational cross_mean(const YPolynomial& p, const CrossSection&) { return p.mean(); }

}  // namespace zappa
