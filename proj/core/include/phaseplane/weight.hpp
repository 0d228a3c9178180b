#pragma once

#include "phaseplane/dyadic.hpp"

namespace phaseplane {

// Normalized tail weight of a time interval:
//   v_I(x) = (1/|I|) (1 + |x - c(I)|/|I|)^(-10).
double weight_v(const DyadicInterval& time_interval, double x);

// Closed-form integral of v_I over [a, b] (antiderivative of the power tail).
double weight_v_integral(const DyadicInterval& time_interval, double a, double b);

// Total mass over the real line: 2/9, independent of I.
inline constexpr double kWeightTotalMass = 2.0 / 9.0;

}  // namespace phaseplane
