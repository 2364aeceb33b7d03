#pragma once

#include "bayesdetect/detail/j_integral_impl.hpp"

#include <boost/multiprecision/float128.hpp>

namespace bayesdetect::detail {

/// Working type of the extended-precision mode: IEEE binary128, 113-bit significand.
using ExtendedReal = boost::multiprecision::float128;

template <>
inline JTuning<ExtendedReal> default_j_tuning<ExtendedReal>() {
    return {ExtendedReal(1e-28), ExtendedReal(100)};
}

}  // namespace bayesdetect::detail
