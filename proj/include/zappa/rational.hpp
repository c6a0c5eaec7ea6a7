#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <string>
#include <string_view>

#include "zappa/error.hpp"

namespace zappa {

/// Arbitrary-precision exact rational.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// "p/q" in lowest terms, or "p" for integers.
inline std::string to_string(const Rational& r) { return r.str(); }

/// Parses "-28/45", "3", "0.125", "1.5e-3" exactly.
inline Rational parse_rational(std::string_view text) {
    auto fail = [&] { throw InvalidArgument("not a rational number: '" + std::string(text) + "'"); };
    auto trim = [](std::string_view s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        return s;
    };
    std::string_view s = trim(text);
    if (s.empty()) fail();

    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        if (s.find('/', slash + 1) != std::string_view::npos) fail();
        Rational num = parse_rational(s.substr(0, slash));
        Rational den = parse_rational(s.substr(slash + 1));
        if (den == 0) throw InvalidArgument("zero denominator in '" + std::string(text) + "'");
        return num / den;
    }

    bool negative = false;
    if (s.front() == '+' || s.front() == '-') {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    BigInt mantissa = 0;
    long exponent = 0;
    bool seen_digit = false;
    bool seen_point = false;
    std::size_t pos = 0;
    for (; pos < s.size(); ++pos) {
        char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mantissa = mantissa * 10 + (c - '0');
            if (seen_point) --exponent;
            seen_digit = true;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (!seen_digit) fail();
    if (pos < s.size()) {
        if (s[pos] != 'e' && s[pos] != 'E') fail();
        ++pos;
        bool exp_negative = false;
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
            exp_negative = s[pos] == '-';
            ++pos;
        }
        if (pos >= s.size()) fail();
        long e = 0;
        for (; pos < s.size(); ++pos) {
            if (!std::isdigit(static_cast<unsigned char>(s[pos]))) fail();
            e = e * 10 + (s[pos] - '0');
            if (e > 4000) fail();
        }
        exponent += exp_negative ? -e : e;
    }
    Rational value(mantissa);
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(exponent < 0 ? -exponent : exponent));
    value = exponent < 0 ? value / Rational(scale) : value * Rational(scale);
    return negative ? Rational(-value) : value;
}

}  // namespace zappa
