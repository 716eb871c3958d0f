// SPDX-License-Identifier: Apache-2.0
#include "simcse/format.hpp"

#include <array>
#include <charconv>

namespace simcse {

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

std::string format_fixed(double value, int digits) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed, digits);
    return std::string(buf.data(), ptr);
}

}  // namespace simcse
