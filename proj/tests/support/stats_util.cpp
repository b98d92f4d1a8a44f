#include "support/stats_util.hpp"

#include <cmath>
#include <stdexcept>

namespace blocklab::testutil {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Inverse standard normal (Acklam's rational approximation).
double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("normal_quantile: p in (0,1) required");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > phigh) {
    q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

}  // namespace

double chi_square_critical(int df, double alpha) {
  double z = normal_quantile(1.0 - alpha);
  double t = 1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df));
  return df * t * t * t;
}

double chi_square_stat(std::span<const long> observed, std::span<const double> expected_probs) {
  long total = 0;
  for (long o : observed) total += o;
  double stat = 0.0;
  for (size_t i = 0; i < observed.size(); ++i) {
    double e = expected_probs[i] * total;
    double d = observed[i] - e;
    stat += d * d / e;
  }
  return stat;
}

double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / xs.size();
}

double paired_p_value(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("paired_p_value: need equal-length samples of size >= 2");
  const size_t n = a.size();
  double m = 0.0;
  for (size_t i = 0; i < n; ++i) m += a[i] - b[i];
  m /= n;
  double var = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i] - m;
    var += d * d;
  }
  var /= (n - 1);
  if (var == 0.0) return m > 0.0 ? 0.0 : 1.0;
  double t = m / std::sqrt(var / n);
  return 1.0 - normal_cdf(t);
}

}  // namespace blocklab::testutil
