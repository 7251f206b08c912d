#pragma once

#include <ceres/jet.h>

namespace hsi {

// Scalar-part access shared by plain doubles and forward-mode dual numbers.
inline double value_of(double x) { return x; }
template <class S, int N>
double value_of(const ceres::Jet<S, N>& x) {
    return x.a;
}

inline void set_value(double& x, double v) { x = v; }
template <class S, int N>
void set_value(ceres::Jet<S, N>& x, double v) {
    x.a = v;
}

}  // namespace hsi
