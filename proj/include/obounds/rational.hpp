#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>

namespace obounds {

using Rat = boost::multiprecision::mpq_rational;
using Int = boost::multiprecision::mpz_int;

/// Round-to-nearest double conversion (mpq_get_d alone truncates).
double to_double(const Rat& value);

/// Parses "a", "-a" or "a/b" with decimal integers. Throws BadInput on garbage.
Rat parse_rational(const std::string& text);

/// Inverse of parse_rational; whole numbers render without the "/1".
std::string format_rational(const Rat& value);

inline Rat rat_min(const Rat& a, const Rat& b) { return a < b ? a : b; }
inline Rat rat_max(const Rat& a, const Rat& b) { return a > b ? a : b; }

}  // namespace obounds
