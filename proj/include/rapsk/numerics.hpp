#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rapsk/rng.hpp"

namespace rapsk {

inline constexpr double kPi = 3.141592653589793238462643;
inline constexpr double kTwoPi = 6.283185307179586476925287;

// ---- modified Bessel functions, exponentially scaled ----------------------
//
// bessel_iN_scaled(x) = exp(-x) * I_N(x).  Power series below x = 20,
// large-argument asymptotic expansion above.  The scaled forms stay finite
// for any x a channel model can produce (I_0(1000) alone overflows double).

double bessel_i0_scaled(double x);
double bessel_i1_scaled(double x);

// A(kappa) = I_1(kappa) / I_0(kappa), the von Mises mean resultant length.
double bessel_ratio(double kappa);

// A^{-1}(r) for r in [0, 1).  Newton with Fisher-style starting values and a
// bisection guard; |step| <= 1e-12 * max(1, kappa) at exit.
double inverse_bessel_ratio(double r);

// ---- circular distributions ------------------------------------------------

// von Mises density with mean mu and concentration kappa (kappa >= 0).
double von_mises_pdf(double theta, double mu, double kappa);

// Draw from VM(0, kappa), result in (-pi, pi].  Best-Fisher rejection for
// moderate kappa, plain rejection against uniform for kappa < 1e-4 where the
// Best-Fisher rho suffers cancellation.
double sample_von_mises(double kappa, RandomStream& rng);

// Wrapped normal density; image sum truncated once additional terms fall
// below double precision.  sigma must be > 0.
double wrapped_normal_pdf(double theta, double mu, double sigma);

double std_normal_cdf(double x);

double binary_entropy(double p);

// ---- kappa-for-sigma lookup ------------------------------------------------
//
// a(t) = A^{-1}(exp(-t^2 pi^2 / 2)) maps a normalized noise deviation t to
// the concentration of the matching von Mises factor.  The demapper calls
// this once per bit, so the exact inverse is replaced by a monotone-cubic
// table in (log t, log a); the table is built lazily on first use.

struct KappaLookup {
  double value;
  bool saturated;  // t fell below the low end and was clamped
};

class KappaTable {
 public:
  KappaTable();

  KappaLookup lookup(double t) const;

  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }

 private:
  static constexpr std::size_t kNodes = 4096;
  double t_min_ = 0.01;
  double t_max_ = 3.2;
  double u_min_, du_;              // uniform grid in u = log t
  std::vector<double> v_;          // log a at the nodes
  std::vector<double> slope_;      // Fritsch-Carlson tangents
};

const KappaTable& kappa_table();

// Convenience wrapper over the shared table.
KappaLookup kappa_for_sigma(double t);

// Exact a(t) without the table; reference/tests and table construction.
double kappa_for_sigma_exact(double t);

// ---- adaptive Simpson quadrature --------------------------------------------

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double m, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Integrate f over [a, b] to absolute tolerance tol.
template <class F>
double integrate_adaptive(const F& f, double a, double b, double tol) {
  if (!(b >= a)) throw std::invalid_argument("integrate_adaptive: b < a");
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace rapsk
