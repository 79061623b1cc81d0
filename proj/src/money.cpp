#include "agora/money.hpp"

#include <cctype>
#include <cstdlib>

namespace agora {
namespace {

// Parses a decimal dollar amount into an integer count of `scale`-ths.
// scale is a power of ten (1e6 for Price, 1e12 for Cost).
std::int64_t parse_fixed(const std::string& text, std::int64_t scale, int max_frac_digits) {
    std::string s = text;
    // strip surrounding whitespace and an optional leading '$'
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    if (b == std::string::npos) throw Error(ErrorKind::Config, "empty money literal");
    s = s.substr(b, e - b + 1);
    bool negative = false;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        negative = s[i] == '-';
        ++i;
    }
    if (i < s.size() && s[i] == '$') ++i;

    std::int64_t whole = 0;
    bool any_digit = false;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
        whole = whole * 10 + (s[i] - '0');
        any_digit = true;
    }
    std::int64_t frac = 0;
    int frac_digits = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
            if (frac_digits == max_frac_digits)
                throw Error(ErrorKind::Config,
                            "money literal '" + text + "' has more than " +
                                std::to_string(max_frac_digits) + " fractional digits");
            frac = frac * 10 + (s[i] - '0');
            ++frac_digits;
            any_digit = true;
        }
    }
    if (!any_digit || i != s.size())
        throw Error(ErrorKind::Config, "malformed money literal '" + text + "'");
    for (int d = frac_digits; d < max_frac_digits; ++d) frac *= 10;
    std::int64_t units = whole * scale + frac;
    return negative ? -units : units;
}

std::string format_fixed(std::int64_t units, std::int64_t scale) {
    bool negative = units < 0;
    std::uint64_t mag = negative ? static_cast<std::uint64_t>(-(units + 1)) + 1
                                 : static_cast<std::uint64_t>(units);
    std::uint64_t whole = mag / static_cast<std::uint64_t>(scale);
    std::uint64_t frac = mag % static_cast<std::uint64_t>(scale);
    std::string frac_str;
    for (std::int64_t p = scale / 10; p >= 1; p /= 10) {
        frac_str.push_back(static_cast<char>('0' + (frac / p) % 10));
    }
    // keep at least two decimals, drop trailing zeros beyond that
    while (frac_str.size() > 2 && frac_str.back() == '0') frac_str.pop_back();
    std::string out = negative ? "-" : "";
    out += std::to_string(whole);
    out += '.';
    out += frac_str;
    return out;
}

}  // namespace

Price Price::from_micros(std::int64_t micros) {
    Price p;
    p.micros_ = micros;
    return p;
}

Price Price::parse(const std::string& text) {
    return from_micros(parse_fixed(text, 1'000'000, 6));
}

std::string Price::to_string() const { return format_fixed(micros_, 1'000'000); }

Cost Cost::parse(const std::string& text) {
    return from_picos(parse_fixed(text, 1'000'000'000'000, 12));
}

Cost Cost::of_tokens(std::int64_t tokens, const Price& price) {
    return from_picos(tokens * price.micros());
}

std::string Cost::to_string() const { return format_fixed(picos_, 1'000'000'000'000); }

}  // namespace agora
