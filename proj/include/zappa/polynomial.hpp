#pragma once

#include <algorithm>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "zappa/rational.hpp"

namespace zappa {

/**
 * @brief Exact polynomial in the cross-channel coordinate y.
 *
 * Coefficients are stored in ascending powers and kept trimmed, so the zero
 * polynomial has no coefficients and equality is structural.
 */
class YPolynomial {
public:
    YPolynomial() = default;
    explicit YPolynomial(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { trim(); }
    YPolynomial(std::initializer_list<Rational> coeffs) : coeffs_(coeffs) { trim(); }

    static YPolynomial constant(const Rational& c) { return YPolynomial({c}); }
    static YPolynomial monomial(int power, const Rational& c = 1) {
        std::vector<Rational> coeffs(static_cast<std::size_t>(power) + 1, Rational(0));
        coeffs.back() = c;
        return YPolynomial(std::move(coeffs));
    }

    const std::vector<Rational>& coeffs() const noexcept { return coeffs_; }
    bool is_zero() const noexcept { return coeffs_.empty(); }
    /// Degree, with -1 for the zero polynomial.
    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    Rational coeff(int power) const {
        return power >= 0 && power < static_cast<int>(coeffs_.size()) ? coeffs_[static_cast<std::size_t>(power)]
                                                                       : Rational(0);
    }

    Rational operator()(const Rational& y) const {
        Rational acc = 0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * y + *it;
        return acc;
    }

    double operator()(double y) const {
        double acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * y + to_double(*it);
        return acc;
    }

    std::vector<double> coeffs_double() const {
        std::vector<double> out;
        out.reserve(coeffs_.size());
        for (const auto& c : coeffs_) out.push_back(to_double(c));
        return out;
    }

    /// Exact (1/2) * integral over [-1, 1].
    Rational mean() const {
        Rational acc = 0;
        for (std::size_t k = 0; k < coeffs_.size(); k += 2) acc += coeffs_[k] / Rational(static_cast<long>(k) + 1);
        return acc;
    }

    Rational integral() const { return 2 * mean(); }

    YPolynomial& operator+=(const YPolynomial& o) {
        if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
        for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
        trim();
        return *this;
    }
    YPolynomial& operator-=(const YPolynomial& o) {
        if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
        for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
        trim();
        return *this;
    }
    YPolynomial& operator*=(const Rational& s) {
        for (auto& c : coeffs_) c *= s;
        trim();
        return *this;
    }

    friend YPolynomial operator+(YPolynomial a, const YPolynomial& b) { return a += b; }
    friend YPolynomial operator-(YPolynomial a, const YPolynomial& b) { return a -= b; }
    friend YPolynomial operator-(YPolynomial a) { return a *= Rational(-1); }
    friend YPolynomial operator*(YPolynomial a, const Rational& s) { return a *= s; }
    friend YPolynomial operator*(const Rational& s, YPolynomial a) { return a *= s; }
    friend YPolynomial operator*(const YPolynomial& a, const YPolynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<Rational> out(a.coeffs_.size() + b.coeffs_.size() - 1, Rational(0));
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return YPolynomial(std::move(out));
    }
    friend bool operator==(const YPolynomial& a, const YPolynomial& b) { return a.coeffs_ == b.coeffs_; }

    YPolynomial pow(int n) const {
        YPolynomial acc = constant(1);
        for (int k = 0; k < n; ++k) acc = acc * *this;
        return acc;
    }

    /// Human-readable form, e.g. "2*y^4 - 8/3*y^2 + 22/45".
    std::string str() const {
        if (is_zero()) return "0";
        std::string out;
        for (int k = degree(); k >= 0; --k) {
            const Rational& c = coeffs_[static_cast<std::size_t>(k)];
            if (c == 0) continue;
            Rational mag = c < 0 ? Rational(-c) : c;
            if (out.empty()) {
                if (c < 0) out += "-";
            } else {
                out += c < 0 ? " - " : " + ";
            }
            if (k == 0 || mag != 1) {
                out += to_string(mag);
                if (k > 0) out += "*";
            }
            if (k >= 1) out += "y";
            if (k >= 2) out += "^" + std::to_string(k);
        }
        return out;
    }

private:
    void trim() {
        while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
    }

    std::vector<Rational> coeffs_;
};

}  // namespace zappa
