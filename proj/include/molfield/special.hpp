#ifndef MOLFIELD_SPECIAL_HPP
#define MOLFIELD_SPECIAL_HPP

namespace molfield {
namespace math {

/**
 * Scaled complementary error function, erfcx(x) = exp(x^2) * erfc(x).
 *
 * The channel responses mix erf terms with exponentials whose arguments can
 * exceed the double range for distant transmitters; composing them through
 * erfcx keeps every intermediate exponent non-positive. Relative accuracy is
 * a few 1e-15 across the supported range. For x <= -26.6 the reflection
 * 2*exp(x^2) overflows and +inf is returned.
 */
double erfcx(double x);

}  // namespace math
}  // namespace molfield

#endif
