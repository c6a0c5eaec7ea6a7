#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "zappa/cross_section.hpp"
#include "zappa/error.hpp"
#include "zappa/polynomial.hpp"

namespace zappa {

/// Jump-velocity profile v(y), the mean jump length at cross-channel position y.
class VelocityProfile {
public:
    struct Sampled {
        std::vector<double> values;  ///< one per node of the cross-section it was built for
    };

    explicit VelocityProfile(YPolynomial p) : form_(std::move(p)) {}
    explicit VelocityProfile(Sampled s) : form_(std::move(s)) {}

    /// v = 1 - y^2
    static VelocityProfile parabolic() { return VelocityProfile(YPolynomial{1, 0, -1}); }
    static VelocityProfile constant(const Rational& c) { return VelocityProfile(YPolynomial::constant(c)); }
    static VelocityProfile polynomial(std::vector<Rational> coeffs) {
        return VelocityProfile(YPolynomial(std::move(coeffs)));
    }
    static VelocityProfile sampled(std::vector<double> values) { return VelocityProfile(Sampled{std::move(values)}); }

    bool is_polynomial() const noexcept { return std::holds_alternative<YPolynomial>(form_); }
    const YPolynomial* polynomial() const noexcept { return std::get_if<YPolynomial>(&form_); }
    const Sampled* samples() const noexcept { return std::get_if<Sampled>(&form_); }

    std::string describe() const {
        if (const auto* p = polynomial()) return "v(y) = " + p->str();
        std::ostringstream os;
        os << "sampled v at " << samples()->values.size() << " nodes";
        return os.str();
    }

    /// True when v > 0 at `samples` equispaced points strictly inside (-1, 1).
    /// Only meaningful for polynomial profiles; sampled profiles report false.
    bool positive_on_open_interval(int samples = 4001) const {
        const auto* p = polynomial();
        if (p == nullptr) return false;
        for (int k = 1; k <= samples; ++k) {
            double y = -1.0 + 2.0 * k / (samples + 1.0);
            if (!((*p)(y) > 0.0)) return false;
        }
        return true;
    }

private:
    std::variant<YPolynomial, Sampled> form_;
};

/// Samples v at the nodes; throws InvalidProfile naming the first node where v <= 0.
inline CrossField eval_profile(const VelocityProfile& v, const CrossSection& cs) {
    CrossField out;
    if (const auto* p = v.polynomial()) {
        out = CrossField::sample(*p, cs);
    } else {
        const auto& values = v.samples()->values;
        if (values.size() != cs.size())
            throw InvalidArgument("sampled profile has " + std::to_string(values.size()) +
                                  " values but the cross-section has " + std::to_string(cs.size()) + " nodes");
        out = CrossField(values);
    }
    for (std::size_t j = 0; j < out.size(); ++j) {
        if (!(out[j] > 0.0)) {
            std::ostringstream os;
            os << "velocity profile is not positive at node " << j << " (y = " << cs.nodes[j]
               << ", v = " << out[j] << ")";
            throw InvalidProfile(os.str(), static_cast<int>(j), cs.nodes[j]);
        }
    }
    return out;
}

}  // namespace zappa
