#include "heliosim/bigint.hpp"

#include <stdexcept>

namespace heliosim {

BigInt from_dec(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("from_dec: empty string");
    for (char c : s) {
        if (c < '0' || c > '9') {
            throw std::invalid_argument("from_dec: not a non-negative decimal: " + s);
        }
    }
    return BigInt(s);
}

} // namespace heliosim
