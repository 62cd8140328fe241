#include "obounds/rational.hpp"

#include <cctype>

#include "obounds/errors.hpp"

namespace obounds {

double to_double(const Rat& value) {
    // mpq_get_d rounds toward zero; one compensation step recovers the
    // nearest double.
    const double head = value.convert_to<double>();
    const Rat residual = value - Rat(head);
    return head + residual.convert_to<double>();
}

Rat parse_rational(const std::string& text) {
    if (text.empty()) throw Error(Errc::BadInput, "empty rational literal");
    for (char c : text) {
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '/' || c == '+')) {
            throw Error(Errc::BadInput, "bad rational literal '" + text + "'");
        }
    }
    try {
        Rat value(text);
        return value;
    } catch (const std::exception&) {
        throw Error(Errc::BadInput, "bad rational literal '" + text + "'");
    }
}

std::string format_rational(const Rat& value) {
    if (denominator(value) == 1) return numerator(value).str();
    return value.str();
}

}  // namespace obounds
