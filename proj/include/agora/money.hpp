#pragma once

#include <cstdint>
#include <string>

#include "agora/errors.hpp"

namespace agora {

// Prices are kept as exact decimal micro-dollars (1e-6 USD) so that cost
// reports sum exactly. A price is always "per 1,000,000 tokens", which makes
// the cost of `n` tokens at price `p` exactly `n * p.micros()` pico-dollars.
class Price {
public:
    Price() = default;
    static Price from_micros(std::int64_t micros);
    // Accepts "2.50", "$2.50", "0.055", "-1.2"; at most 6 fractional digits.
    static Price parse(const std::string& text);

    std::int64_t micros() const noexcept { return micros_; }
    std::string to_string() const;  // "2.50" (at least two decimals, no trailing noise)

    friend bool operator==(const Price&, const Price&) = default;

private:
    std::int64_t micros_ = 0;
};

// An accumulated cost in pico-dollars (1e-12 USD). Addition is exact.
class Cost {
public:
    Cost() = default;
    static Cost from_picos(std::int64_t picos) {
        Cost c;
        c.picos_ = picos;
        return c;
    }
    static Cost parse(const std::string& text);  // dollars, e.g. "2.50"

    // n tokens at `price` per 1e6 tokens.
    static Cost of_tokens(std::int64_t tokens, const Price& price);

    std::int64_t picos() const noexcept { return picos_; }
    std::string to_string() const;  // dollars, e.g. "2.50"

    Cost& operator+=(const Cost& other) {
        picos_ += other.picos_;
        return *this;
    }
    friend Cost operator+(Cost a, const Cost& b) { return a += b; }
    friend bool operator==(const Cost&, const Cost&) = default;

private:
    std::int64_t picos_ = 0;
};

}  // namespace agora
