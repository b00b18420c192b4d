#include "rtmd/half.hpp"

#include <bit>
#include <cmath>

namespace rtmd {

float half_to_float(std::uint16_t bits) {
  const std::uint32_t sign = static_cast<std::uint32_t>(bits & 0x8000u) << 16;
  const std::uint32_t exp = (bits >> 10) & 0x1Fu;
  const std::uint32_t mant = bits & 0x3FFu;
  if (exp == 0) {
    // zero or subnormal: mant * 2^-24
    const float mag = std::ldexp(static_cast<float>(mant), -24);
    return sign ? -mag : mag;
  }
  if (exp == 0x1F) {
    return std::bit_cast<float>(sign | 0x7F800000u | (mant << 13));
  }
  return std::bit_cast<float>(sign | ((exp + 112) << 23) | (mant << 13));
}

std::uint16_t float_to_half(float value) {
  const std::uint32_t f = std::bit_cast<std::uint32_t>(value);
  const std::uint16_t sign = static_cast<std::uint16_t>((f >> 16) & 0x8000u);
  const std::uint32_t abs = f & 0x7FFFFFFFu;

  if (abs >= 0x7F800000u) {  // inf / nan
    return sign | 0x7C00u | (abs > 0x7F800000u ? 0x200u : 0u);
  }
  if (abs >= 0x477FF000u) {  // rounds past 65504
    return sign | 0x7C00u;
  }
  if (abs < 0x38800000u) {  // below the smallest normal half
    const float mag = std::bit_cast<float>(abs);
    // nearbyint rounds half to even under the default rounding mode
    const auto m = static_cast<std::uint16_t>(std::nearbyint(std::ldexp(mag, 24)));
    return sign | m;
  }
  const std::uint32_t mant = abs & 0x7FFFFFu;
  std::uint32_t h = ((abs >> 23) - 112) << 10 | (mant >> 13);
  const std::uint32_t rest = mant & 0x1FFFu;
  if (rest > 0x1000u || (rest == 0x1000u && (h & 1u))) ++h;
  return static_cast<std::uint16_t>(sign | h);
}

}  // namespace rtmd
