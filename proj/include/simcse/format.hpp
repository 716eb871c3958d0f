// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace simcse {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Fixed-point text with `digits` decimals.
std::string format_fixed(double value, int digits);

}  // namespace simcse
