#pragma once

#include <complex>
#include <limits>

#include "rapsk/rng.hpp"

namespace rapsk {

// Which saddle-point form supplies the white-noise part of the angular
// variance.  The 2pi form follows the reference expression literally; its
// high-SNR asymptote is (2pi)^(1/3) sigma_z^2 / (rho_x rho_y), which is why
// the sqrt(2pi) variant (asymptotically exact) is the default.
enum class AngularModel { PaperSaddlePoint, SmoothSaddlePoint, HighSnr };

struct ChannelParams {
  double sigma_z2 = 0.0;  // white-noise variance per quadrature
  double kappa_phi = std::numeric_limits<double>::infinity();  // inf = none
  AngularModel angular_model = AngularModel::SmoothSaddlePoint;

  void validate() const;  // throws std::invalid_argument

  double snr_db() const;  // 10 log10(1 / (2 sigma_z2)); unit symbol power
  static ChannelParams from_snr_db(
      double snr_db,
      double kappa_phi = std::numeric_limits<double>::infinity(),
      AngularModel model = AngularModel::SmoothSaddlePoint);
};

// y = e^{j phi} x + z with phi ~ VM(0, kappa_phi) and z circular Gaussian,
// variance sigma_z2 per quadrature.  Draws: phi first, then Re z, then Im z.
std::complex<double> transmit(std::complex<double> x, const ChannelParams& p,
                              RandomStream& rng);

// Radial noise std of the Gaussian approximation: sigma_z regardless of
// phase noise (rotation preserves magnitude).
double radial_noise_sigma(const ChannelParams& p);

double kappa_rho(double rho_x, double rho_y, const ChannelParams& p);

// White-noise-induced angular variance at the given radii, per the selected
// saddle-point model.  kappa_rho = 0 is a domain error.
double angular_sigma_w2(double rho_x, double rho_y, const ChannelParams& p);

// Phase-noise angular variance, always the sqrt(2pi) saddle-point form.
double angular_sigma_p2(const ChannelParams& p);

// Total angular variance: the two contributions are independent and add.
double angular_sigma_a2(double rho_x, double rho_y, const ChannelParams& p);

// Exact reference densities (test oracles; require sigma_z2 > 0).
double rician_radial_pdf(double rho_y, double rho_x, const ChannelParams& p);
double conditional_phase_pdf(double theta, double rho_x, double rho_y,
                             const ChannelParams& p);

}  // namespace rapsk
