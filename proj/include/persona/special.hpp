#pragma once

namespace persona {

// Standard normal CDF and upper tail, via erfc.
double normal_cdf(double x);
double normal_sf(double x);
// Natural log of the upper tail; stays finite far beyond where normal_sf
// underflows.
double log_normal_sf(double x);

// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]:
// Lentz continued fraction on the side of (a + 1) / (a + b + 2) where it
// converges fast, symmetry I_x(a,b) = 1 - I_{1-x}(b,a) otherwise.
double incomplete_beta(double a, double b, double x);
// log I_x(a, b), accurate when I_x(a, b) is far below double range.
double log_incomplete_beta(double a, double b, double x);

// Upper tail P(F' >= f) of the F(d1, d2) distribution, d1, d2 >= 1, f >= 0.
double f_survival(double f, double d1, double d2);
double log_f_survival(double f, double d1, double d2);

}  // namespace persona
