#include "rapsk/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rapsk/numerics.hpp"

namespace rapsk {

void ChannelParams::validate() const {
  if (!(sigma_z2 >= 0.0))
    throw std::invalid_argument("channel: sigma_z2 must be >= 0");
  if (!(kappa_phi > 0.0))  // +inf allowed, NaN and 0 are not
    throw std::invalid_argument("channel: kappa_phi must be > 0");
}

double ChannelParams::snr_db() const {
  return 10.0 * std::log10(1.0 / (2.0 * sigma_z2));
}

ChannelParams ChannelParams::from_snr_db(double snr_db, double kappa_phi,
                                         AngularModel model) {
  ChannelParams p;
  p.sigma_z2 = 0.5 * std::pow(10.0, -snr_db / 10.0);
  p.kappa_phi = kappa_phi;
  p.angular_model = model;
  p.validate();
  return p;
}

std::complex<double> transmit(std::complex<double> x, const ChannelParams& p,
                              RandomStream& rng) {
  std::complex<double> y = x;
  if (std::isfinite(p.kappa_phi)) {
    const double phi = sample_von_mises(p.kappa_phi, rng);
    y *= std::polar(1.0, phi);
  }
  if (p.sigma_z2 > 0.0) {
    const double s = std::sqrt(p.sigma_z2);
    y += std::complex<double>(s * rng.normal(), s * rng.normal());
  }
  return y;
}

double radial_noise_sigma(const ChannelParams& p) {
  return std::sqrt(p.sigma_z2);
}

double kappa_rho(double rho_x, double rho_y, const ChannelParams& p) {
  return rho_x * rho_y / p.sigma_z2;
}

double angular_sigma_w2(double rho_x, double rho_y, const ChannelParams& p) {
  if (p.sigma_z2 == 0.0) return 0.0;
  const double kr = kappa_rho(rho_x, rho_y, p);
  if (!(kr > 0.0))
    throw std::domain_error("angular_sigma_w2: kappa_rho must be > 0");
  switch (p.angular_model) {
    case AngularModel::PaperSaddlePoint:
      // (kappa e^kappa / (2 pi I0))^{-2/3}, scaled so e^kappa never forms
      return std::pow(kr / (kTwoPi * bessel_i0_scaled(kr)), -2.0 / 3.0);
    case AngularModel::SmoothSaddlePoint:
      return std::pow(kr / (std::sqrt(kTwoPi) * bessel_i0_scaled(kr)),
                      -2.0 / 3.0);
    case AngularModel::HighSnr:
      return 1.0 / kr;
  }
  throw std::logic_error("angular_sigma_w2: bad model");
}

double angular_sigma_p2(const ChannelParams& p) {
  if (!(p.kappa_phi > 0.0))
    throw std::domain_error("angular_sigma_p2: kappa_phi must be > 0");
  if (std::isinf(p.kappa_phi)) return 0.0;
  return std::pow(
      p.kappa_phi / (std::sqrt(kTwoPi) * bessel_i0_scaled(p.kappa_phi)),
      -2.0 / 3.0);
}

double angular_sigma_a2(double rho_x, double rho_y, const ChannelParams& p) {
  return angular_sigma_w2(rho_x, rho_y, p) + angular_sigma_p2(p);
}

double rician_radial_pdf(double rho_y, double rho_x, const ChannelParams& p) {
  if (!(p.sigma_z2 > 0.0))
    throw std::domain_error("rician_radial_pdf: sigma_z2 must be > 0");
  if (rho_y < 0.0) return 0.0;
  const double d = rho_y - rho_x;
  // (rho_y/s2) I0(kr) e^{-(rho_y^2+rho_x^2)/(2 s2)} with I0 scaled by e^{-kr}
  return rho_y / p.sigma_z2 *
         bessel_i0_scaled(rho_x * rho_y / p.sigma_z2) *
         std::exp(-0.5 * d * d / p.sigma_z2);
}

double conditional_phase_pdf(double theta, double rho_x, double rho_y,
                             const ChannelParams& p) {
  if (!(p.sigma_z2 > 0.0))
    throw std::domain_error("conditional_phase_pdf: sigma_z2 must be > 0");
  return von_mises_pdf(theta, 0.0, kappa_rho(rho_x, rho_y, p));
}

}  // namespace rapsk
