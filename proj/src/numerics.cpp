#include "rapsk/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rapsk {

namespace {

constexpr double kSeriesCut = 20.0;

// Power-series I_nu(x) * exp(-x) for small/moderate x.
double i0_series_scaled(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum * std::exp(-x);
}

double i1_series_scaled(double x) {
  const double q = 0.25 * x * x;
  double term = 0.5 * x, sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * (k + 1));
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum * std::exp(-x);
}

// Large-argument expansion: exp(-x) I_nu(x) ~ (2 pi x)^{-1/2} sum c_k with
// c_0 = 1 and c_{k+1} = c_k ((2k+1)^2 - 4 nu^2) / (8 x (k+1)).  Terms shrink
// well past double precision for x >= 20; stop at the smallest term in case
// the tail starts to diverge.
double asymptotic_scaled(double x, double four_nu2) {
  double term = 1.0, sum = 1.0;
  for (int k = 0; k < 40; ++k) {
    const double odd = 2.0 * k + 1.0;
    const double next = term * (odd * odd - four_nu2) / (8.0 * x * (k + 1));
    if (std::abs(next) >= std::abs(term)) break;
    sum += next;
    term = next;
    if (std::abs(next) < 1e-18 * std::abs(sum)) break;
  }
  return sum / std::sqrt(kTwoPi * x);
}

}  // namespace

double bessel_i0_scaled(double x) {
  if (!(x >= 0.0)) throw std::domain_error("bessel_i0_scaled: x must be >= 0");
  return x < kSeriesCut ? i0_series_scaled(x) : asymptotic_scaled(x, 0.0);
}

double bessel_i1_scaled(double x) {
  if (!(x >= 0.0)) throw std::domain_error("bessel_i1_scaled: x must be >= 0");
  return x < kSeriesCut ? i1_series_scaled(x) : asymptotic_scaled(x, 4.0);
}

double bessel_ratio(double kappa) {
  if (!(kappa >= 0.0)) throw std::domain_error("bessel_ratio: kappa < 0");
  if (kappa == 0.0) return 0.0;
  return bessel_i1_scaled(kappa) / bessel_i0_scaled(kappa);
}

double inverse_bessel_ratio(double r) {
  if (!(r >= 0.0) || r >= 1.0)
    throw std::domain_error("inverse_bessel_ratio: r must be in [0, 1)");
  if (r == 0.0) return 0.0;

  // Fisher's starting values, good to a few percent on each branch.
  double k;
  if (r < 0.53)
    k = 2.0 * r + r * r * r + 5.0 * std::pow(r, 5) / 6.0;
  else if (r < 0.85)
    k = -0.4 + 1.39 * r + 0.43 / (1.0 - r);
  else
    k = 1.0 / (r * r * r - 4.0 * r * r + 3.0 * r);
  if (!(k > 0.0)) k = 1e-8;

  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    const double a = bessel_ratio(k);
    if (a == r) return k;
    if (a > r)
      hi = std::min(hi, k);
    else
      lo = std::max(lo, k);
    // dA/dkappa = 1 - A/kappa - A^2
    const double da = 1.0 - a / k - a * a;
    double step = (a - r) / da;
    double next = k - step;
    if (!(next >= lo) || !(next <= hi) || !std::isfinite(next))
      next = std::isinf(hi) ? 2.0 * k : 0.5 * (lo + hi);
    if (std::abs(next - k) <= 1e-12 * k) return next;
    k = next;
  }
  return k;
}

double von_mises_pdf(double theta, double mu, double kappa) {
  if (!(kappa >= 0.0)) throw std::domain_error("von_mises_pdf: kappa < 0");
  // exp(kappa cos d) / (2 pi I0(kappa)) in overflow-free scaled form.
  const double d = theta - mu;
  return std::exp(kappa * (std::cos(d) - 1.0)) /
         (kTwoPi * bessel_i0_scaled(kappa));
}

double sample_von_mises(double kappa, RandomStream& rng) {
  if (!(kappa >= 0.0)) throw std::domain_error("sample_von_mises: kappa < 0");
  if (kappa < 1e-4) {
    // Nearly uniform; Best-Fisher's rho = (tau - sqrt(2 tau)) / (2 kappa)
    // cancels badly here.  Accept-reject against the uniform envelope: the
    // density ratio is exp(kappa (cos t - 1)) <= 1.
    for (;;) {
      const double t = kPi * (2.0 * rng.uniform() - 1.0);
      if (rng.uniform_pos() <= std::exp(kappa * (std::cos(t) - 1.0))) return t;
    }
  }
  if (kappa > 1e12) {
    // Best-Fisher's envelope parameter 1 + 1/(2 kappa) rounds to 1 past
    // 2^52 and the acceptance constant collapses to 0 (the loop would never
    // accept).  The normal limit is exact to O(1/kappa) here.
    return std::remainder(rng.normal() / std::sqrt(kappa), kTwoPi);
  }
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double rr = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double z = std::cos(kPi * rng.uniform());
    const double f = (1.0 + rr * z) / (rr + z);
    const double c = kappa * (rr - f);
    const double u = rng.uniform_pos();
    if (c * (2.0 - c) - u > 0.0 || std::log(c / u) + 1.0 - c >= 0.0) {
      const double angle = std::acos(std::clamp(f, -1.0, 1.0));
      return rng.uniform() < 0.5 ? -angle : angle;
    }
  }
}

double wrapped_normal_pdf(double theta, double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("wrapped_normal_pdf: sigma <= 0");
  const double d = std::remainder(theta - mu, kTwoPi);
  const int images = static_cast<int>(std::ceil(6.0 * sigma / kTwoPi)) + 2;
  double sum = 0.0;
  for (int k = -images; k <= images; ++k) {
    const double z = (d + kTwoPi * k) / sigma;
    sum += std::exp(-0.5 * z * z);
  }
  return sum / (sigma * std::sqrt(kTwoPi));
}

double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::domain_error("binary_entropy: p outside [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

double kappa_for_sigma_exact(double t) {
  if (!(t > 0.0)) throw std::domain_error("kappa_for_sigma_exact: t <= 0");
  const double r = std::exp(-0.5 * t * t * kPi * kPi);
  if (r >= 1.0) throw std::domain_error("kappa_for_sigma_exact: t too small");
  return inverse_bessel_ratio(r);
}

KappaTable::KappaTable() : v_(kNodes), slope_(kNodes) {
  u_min_ = std::log(t_min_);
  du_ = (std::log(t_max_) - u_min_) / static_cast<double>(kNodes - 1);
  for (std::size_t i = 0; i < kNodes; ++i)
    v_[i] = std::log(kappa_for_sigma_exact(std::exp(u_min_ + du_ * i)));

  // Fritsch-Carlson monotone cubic tangents on the uniform log-log grid.
  std::vector<double> d(kNodes - 1);
  for (std::size_t i = 0; i + 1 < kNodes; ++i) d[i] = (v_[i + 1] - v_[i]) / du_;
  // Second-order one-sided endpoint tangents (PCHIP endpoint rule).
  auto end_slope = [](double d0, double d1) {
    double s = 1.5 * d0 - 0.5 * d1;
    if (s * d0 <= 0.0) return 0.0;
    if (std::abs(s) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return s;
  };
  slope_[0] = end_slope(d[0], d[1]);
  slope_[kNodes - 1] = end_slope(d[kNodes - 2], d[kNodes - 3]);
  for (std::size_t i = 1; i + 1 < kNodes; ++i)
    slope_[i] = (d[i - 1] * d[i] > 0.0) ? 0.5 * (d[i - 1] + d[i]) : 0.0;
  for (std::size_t i = 0; i + 1 < kNodes; ++i) {
    if (d[i] == 0.0) {
      slope_[i] = slope_[i + 1] = 0.0;
      continue;
    }
    const double alpha = slope_[i] / d[i], beta = slope_[i + 1] / d[i];
    const double s = alpha * alpha + beta * beta;
    if (s > 9.0) {
      const double tau = 3.0 / std::sqrt(s);
      slope_[i] = tau * alpha * d[i];
      slope_[i + 1] = tau * beta * d[i];
    }
  }
}

KappaLookup KappaTable::lookup(double t) const {
  if (!(t > 0.0)) throw std::domain_error("KappaTable::lookup: t <= 0");
  if (t < t_min_) return {std::exp(v_.front()), true};
  if (t >= t_max_) {
    // A^{-1}(r) -> 2r as r -> 0, so past the table a(t) = 2 exp(-t^2 pi^2/2)
    // to double precision (underflows harmlessly to 0 for very large t).
    return {2.0 * std::exp(-0.5 * t * t * kPi * kPi), false};
  }
  const double u = std::log(t);
  double pos = (u - u_min_) / du_;
  std::size_t i = static_cast<std::size_t>(pos);
  if (i >= kNodes - 1) i = kNodes - 2;
  const double s = pos - static_cast<double>(i);
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  const double v = h00 * v_[i] + h10 * du_ * slope_[i] + h01 * v_[i + 1] +
                   h11 * du_ * slope_[i + 1];
  return {std::exp(v), false};
}

const KappaTable& kappa_table() {
  static const KappaTable table;
  return table;
}

KappaLookup kappa_for_sigma(double t) { return kappa_table().lookup(t); }

}  // namespace rapsk
