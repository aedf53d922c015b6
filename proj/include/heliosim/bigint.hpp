#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace heliosim {

using BigInt = boost::multiprecision::cpp_int;

// (base^exp) mod m, exp >= 0.
inline BigInt mod_pow(const BigInt& base, const BigInt& exp, const BigInt& m) {
    if (m == 1) return 0;
    return boost::multiprecision::powm(base % m, exp, m);
}

inline BigInt mod_mul(const BigInt& a, const BigInt& b, const BigInt& m) {
    return (a * b) % m;
}

// Inverse of a subgroup element of order q: x^(q-1) = x^-1 when x^q = 1.
inline BigInt subgroup_inverse(const BigInt& x, const BigInt& q, const BigInt& p) {
    return mod_pow(x, q - 1, p);
}

inline std::string to_dec(const BigInt& x) { return x.str(); }

// Parses a non-negative decimal string. Throws std::invalid_argument on junk.
BigInt from_dec(const std::string& s);

} // namespace heliosim
