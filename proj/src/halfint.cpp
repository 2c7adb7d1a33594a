#include "spinbath/halfint.hpp"

#include <cmath>
#include <stdexcept>

namespace spinbath {

HalfInt HalfInt::from_double(double value)
{
    const double twice = 2.0 * value;
    const double rounded = std::round(twice);
    if (!std::isfinite(value) || std::abs(twice - rounded) > 1e-9)
        throw std::invalid_argument("not a half-integer: " + std::to_string(value));
    return HalfInt(static_cast<int>(rounded));
}

std::string HalfInt::str() const
{
    if (is_integer())
        return std::to_string(twice_ / 2);
    return std::to_string(twice_) + "/2";
}

} // namespace spinbath
