#pragma once

#include <cstdint>

namespace rtmd {

// IEEE 754 binary16 <-> binary32. Rounds to nearest-even on narrowing.
float half_to_float(std::uint16_t bits);
std::uint16_t float_to_half(float value);

}  // namespace rtmd
