#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "zappa/cross_section.hpp"
#include "zappa/error.hpp"
#include "zappa/polynomial.hpp"
#include "zappa/profile.hpp"

namespace zappa {

/// Marks a raw jump moment that does not exist.
struct Divergent {};

/// Raw moment mu_n(y) = E[s^n | y] of the jump length, exact, nodal, or divergent.
using RawMoment = std::variant<YPolynomial, std::vector<double>, Divergent>;

/// One-sided jump-length density p(s; y), s >= 0.
using JumpDensity = std::function<double(double s, double y)>;

/**
 * @brief Microscale interaction kernel of a jump-and-zap process.
 *
 * Particles jump rightward with an x-homogeneous, y-dependent jump law at unit
 * rate and are redistributed uniformly across the channel at unit rate. Only
 * the jump law varies between kernels; the zap is fixed.
 */
class JumpKernel {
public:
    struct Exponential {
        VelocityProfile v;  ///< mean jump length
    };
    struct GeneralOneSided {
        std::vector<RawMoment> raw_moments;  ///< index n holds mu_n; missing orders count as divergent
        JumpDensity density;                 ///< optional, needed only by the micro-solver slow path
    };

    static JumpKernel exponential(VelocityProfile v) { return JumpKernel(Exponential{std::move(v)}); }
    static JumpKernel general(GeneralOneSided g) { return JumpKernel(std::move(g)); }

    bool is_exponential() const noexcept { return std::holds_alternative<Exponential>(law_); }
    const Exponential* exponential_law() const noexcept { return std::get_if<Exponential>(&law_); }
    const GeneralOneSided* general_law() const noexcept { return std::get_if<GeneralOneSided>(&law_); }

    /// The profile of an exponential kernel, else nullptr.
    const VelocityProfile* profile() const noexcept {
        const auto* e = exponential_law();
        return e ? &e->v : nullptr;
    }

    /// Jump-length density if the kernel has one.
    JumpDensity density() const {
        if (const auto* e = exponential_law()) {
            if (const auto* p = e->v.polynomial()) {
                const auto coeffs = p->coeffs_double();
                return [coeffs](double s, double y) {
                    double v = 0.0;
                    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * y + *it;
                    return std::exp(-s / v) / v;
                };
            }
            return {};
        }
        return general_law()->density;
    }

    std::string describe() const {
        if (const auto* e = exponential_law()) return "exponential jumps, " + e->v.describe();
        return "general one-sided jumps, " + std::to_string(general_law()->raw_moments.size()) + " moments";
    }

private:
    explicit JumpKernel(std::variant<Exponential, GeneralOneSided> law) : law_(std::move(law)) {}

    std::variant<Exponential, GeneralOneSided> law_;
};

struct MomentCheck {
    bool exists = true;
    int first_failing_order = -1;
    std::string diagnostic;
};

/// Whether mu_0 .. mu_n all exist and are finite at every nodal sample.
inline MomentCheck moment_exists(int n, const JumpKernel& k) {
    MomentCheck check;
    if (n < 0) {
        check.exists = false;
        check.diagnostic = "negative moment order " + std::to_string(n);
        return check;
    }
    const auto* g = k.general_law();
    if (g == nullptr) return check;  // exponential jumps have every moment
    for (int m = 1; m <= n; ++m) {
        std::string why;
        if (m >= static_cast<int>(g->raw_moments.size())) {
            why = "not provided";
        } else {
            const auto& raw = g->raw_moments[static_cast<std::size_t>(m)];
            if (std::holds_alternative<Divergent>(raw)) {
                why = "divergent";
            } else if (const auto* nodal = std::get_if<std::vector<double>>(&raw)) {
                for (double x : *nodal)
                    if (!std::isfinite(x)) why = "non-finite at a node";
            }
        }
        if (!why.empty()) {
            check.exists = false;
            check.first_failing_order = m;
            check.diagnostic = "jump moment of order " + std::to_string(m) + " is " + why;
            return check;
        }
    }
    return check;
}

namespace detail {

inline Rational factorial(int n) {
    Rational f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

inline void require_moment(int n, const JumpKernel& k) {
    if (auto check = moment_exists(n, k); !check.exists) throw MomentDivergence(check.diagnostic, check.first_failing_order);
}

}  // namespace detail

/// Exact m_n(y) = (-1)^n mu_n(y) / n!, when the kernel provides it as a polynomial.
inline std::optional<YPolynomial> exact_moment_coefficient(int n, const JumpKernel& k) {
    detail::require_moment(n, k);
    if (const auto* e = k.exponential_law()) {
        const auto* p = e->v.polynomial();
        if (p == nullptr) return std::nullopt;
        return (-*p).pow(n);
    }
    if (n == 0) return YPolynomial::constant(1);
    const auto& raw = k.general_law()->raw_moments[static_cast<std::size_t>(n)];
    if (const auto* p = std::get_if<YPolynomial>(&raw)) {
        Rational scale = Rational(n % 2 == 0 ? 1 : -1) / detail::factorial(n);
        return *p * scale;
    }
    return std::nullopt;
}

/// m_n at the nodes of a cross-section.
inline CrossField moment_coefficient(int n, const JumpKernel& k, const CrossSection& cs) {
    detail::require_moment(n, k);
    if (const auto* e = k.exponential_law()) {
        CrossField v = eval_profile(e->v, cs);
        for (double& x : v.values) x = std::pow(-x, n);
        return v;
    }
    if (n == 0) return CrossField(cs.size(), 1.0);
    const auto& raw = k.general_law()->raw_moments[static_cast<std::size_t>(n)];
    const double scale = (n % 2 == 0 ? 1.0 : -1.0) / to_double(detail::factorial(n));
    if (const auto* p = std::get_if<YPolynomial>(&raw)) return CrossField::sample(*p, cs) * scale;
    const auto& nodal = std::get<std::vector<double>>(raw);
    if (nodal.size() != cs.size())
        throw InvalidArgument("nodal jump moment has " + std::to_string(nodal.size()) + " values for " +
                              std::to_string(cs.size()) + " nodes");
    return CrossField(nodal) * scale;
}

/**
 * @brief The cross-channel operator of the n-th kernel moment.
 *
 * Order 0 is the zap, u -> mean(u) - u; order n >= 1 multiplies pointwise by
 * m_n(y) = (-1)^n mu_n(y)/n!, which is (-v)^n for exponential jumps.
 */
struct MomentOperator {
    int order = 0;
    CrossSection cs;
    CrossField multiplier;            ///< m_n at nodes; unused for order 0
    std::optional<YPolynomial> exact; ///< m_n as a polynomial when available
};

inline MomentOperator moment_operator(int n, const JumpKernel& k, const CrossSection& cs) {
    if (n < 0) throw InvalidArgument("moment order must be non-negative");
    MomentOperator op;
    op.order = n;
    op.cs = cs;
    if (n == 0) {
        op.exact = YPolynomial::constant(1);
        return op;
    }
    op.multiplier = moment_coefficient(n, k, cs);
    op.exact = exact_moment_coefficient(n, k);
    return op;
}

inline CrossField apply(const MomentOperator& op, const CrossField& f) {
    if (f.size() != op.cs.size())
        throw InvalidArgument("moment operator on " + std::to_string(op.cs.size()) + " nodes applied to field of " +
                              std::to_string(f.size()));
    if (op.order == 0) {
        CrossField out = -f;
        out += cross_mean(f, op.cs);
        return out;
    }
    return op.multiplier * f;
}

inline YPolynomial apply(const MomentOperator& op, const YPolynomial& f) {
    if (op.order == 0) return YPolynomial::constant(f.mean()) - f;
    if (!op.exact) throw InvalidArgument("moment operator of order " + std::to_string(op.order) + " has no exact form");
    return *op.exact * f;
}

/// mu_n(y) by numerical quadrature of the kernel's jump density over s in [0, inf).
inline double density_moment(int n, const JumpKernel& k, double y) {
    JumpDensity p = k.density();
    if (!p) throw UnsupportedKernel("kernel has no jump density to integrate");
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [&](double s) {
        const double d = p(s, y);
        return d == 0.0 || n == 0 ? d : std::pow(s, n) * d;
    };
    return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
}

}  // namespace zappa
