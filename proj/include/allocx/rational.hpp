#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace allocx {

/// Exact rational number, always kept in canonical reduced form.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;

/// Printed as `num/den`, or just `num` when the denominator is one.
inline std::string to_string(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Accepts `n`, `-n`, and `n/d` with d > 0. No decimals.
inline Rational parse_rational(std::string_view text) {
    auto digits = [](std::string_view s, bool allow_sign) {
        if (s.empty()) return false;
        std::size_t k = 0;
        if (allow_sign && (s[0] == '-' || s[0] == '+')) k = 1;
        if (k == s.size()) return false;
        for (; k < s.size(); ++k)
            if (s[k] < '0' || s[k] > '9') return false;
        return true;
    };
    auto slash = text.find('/');
    std::string_view num = text.substr(0, slash);
    if (!digits(num, true)) throw ParseError("bad rational: '" + std::string(text) + "'");
    Rational value{std::string(num[0] == '+' ? num.substr(1) : num)};
    if (slash == std::string_view::npos) return value;
    std::string_view den = text.substr(slash + 1);
    if (!digits(den, false)) throw ParseError("bad rational: '" + std::string(text) + "'");
    Rational d{std::string(den)};
    if (d == 0) throw ParseError("zero denominator: '" + std::string(text) + "'");
    return value / d;
}

}  // namespace allocx
