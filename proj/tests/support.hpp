#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "zappa/polynomial.hpp"
#include "zappa/profile.hpp"
#include "zappa/rational.hpp"

namespace zappa::gen {

/// Random polynomial profile of degree <= max_degree, shifted so min v >= 1/5 on [-1, 1].
inline VelocityProfile random_positive_profile(std::mt19937_64& rng, int max_degree = 6) {
    std::uniform_int_distribution<int> deg(0, max_degree), num(-6, 6), den(1, 5);
    const int d = deg(rng);
    std::vector<Rational> c;
    for (int k = 0; k <= d; ++k) c.push_back(Rational(num(rng)) / den(rng));
    if (c.back() == 0) c.back() = Rational(1, 2);
    const YPolynomial p(c);
    double lo = 1e300;
    for (int k = 0; k <= 4000; ++k) lo = std::min(lo, p(-1.0 + k / 2000.0));
    const double floor = 0.2;
    if (lo < floor) c[0] += Rational(static_cast<long long>(std::ceil((floor - lo) * 8.0)) + 1, 8);
    return VelocityProfile::polynomial(c);
}

inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace zappa::gen
