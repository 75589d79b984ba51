#include "persona/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "persona/error.hpp"

namespace persona {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double log_normal_sf(double x) {
  if (x < 30.0) return std::log(normal_sf(x));
  // Asymptotic expansion of Mills' ratio; at x >= 30 the first omitted term is
  // below 1e-12 relative.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) +
                        105.0 / (x2 * x2 * x2 * x2);
  return -0.5 * x2 - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

namespace {

void check_beta_args(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DataError("incomplete beta needs a, b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) throw DataError("incomplete beta needs x in [0, 1]");
}

// Continued fraction for I_x(a,b) (modified Lentz), without the front factor.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  constexpr int max_iter = 10000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

// log of x^a (1-x)^b / (a B(a,b)) * cf, valid on the direct side.
double log_direct(double a, double b, double x) {
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  return log_front + std::log(beta_continued_fraction(a, b, x) / a);
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  check_beta_args(a, b, x);
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_direct(a, b, x));
  return 1.0 - std::exp(log_direct(b, a, 1.0 - x));
}

double log_incomplete_beta(double a, double b, double x) {
  check_beta_args(a, b, x);
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (x == 1.0) return 0.0;
  if (x < (a + 1.0) / (a + b + 2.0)) return log_direct(a, b, x);
  return std::log1p(-std::exp(log_direct(b, a, 1.0 - x)));
}

namespace {

void check_f_args(double f, double d1, double d2) {
  if (!(d1 >= 1.0) || !(d2 >= 1.0)) throw DataError("F distribution needs d1, d2 >= 1");
  if (!(f >= 0.0) || std::isnan(f)) throw DataError("F statistic must be >= 0");
}

}  // namespace

double f_survival(double f, double d1, double d2) {
  check_f_args(f, d1, d2);
  if (std::isinf(f)) return 0.0;
  return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

double log_f_survival(double f, double d1, double d2) {
  check_f_args(f, d1, d2);
  if (std::isinf(f)) return -std::numeric_limits<double>::infinity();
  return log_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

}  // namespace persona
