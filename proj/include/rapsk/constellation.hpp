#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rapsk {

// Regular APSK: rings at r0, r0 + D, ..., r0 + (N-1) D, each carrying K
// phase-aligned points.  N and K are powers of two so every ring index and
// angle index is addressable by a flat bit label.
struct RapskParams {
  int rings = 2;            // N
  int points_per_ring = 4;  // K
  double r0 = 0.5;

  void validate() const;  // throws std::invalid_argument
};

// Positive root of  r0^2 + (N-1) r0 D + (N-1)(2N-1) D^2 / 6 = 1,
// i.e. the spacing that normalizes mean symbol power to exactly 1.
double ring_spacing(int rings, double r0);

// PAPR of the unnormalized geometry r_i = 1 + i * d_over_r0 (scale cancels).
double papr_for_spacing(int rings, double d_over_r0);

// Wide-spacing limit 6(N-1)/(2N-1) of the PAPR.
double papr_limit(int rings);

struct PointIndices {
  int ring;
  int angle;
};

class RapskConstellation {
 public:
  explicit RapskConstellation(const RapskParams& params);

  const RapskParams& params() const { return params_; }
  int rings() const { return params_.rings; }
  int points_per_ring() const { return params_.points_per_ring; }
  int ring_bits() const { return ring_bits_; }    // n
  int angle_bits() const { return angle_bits_; }  // k
  int bits_per_symbol() const { return ring_bits_ + angle_bits_; }
  int size() const { return params_.rings * params_.points_per_ring; }

  double spacing() const { return d_; }
  double radius(int ring) const { return radii_[ring]; }
  const std::vector<double>& radii() const { return radii_; }
  double power() const { return power_; }
  double papr() const { return radii_.back() * radii_.back() / power_; }

  std::complex<double> point(int ring, int angle) const;
  std::complex<double> label_to_point(uint32_t label) const;
  std::complex<double> label_to_point(std::string_view bits) const;

  uint32_t label_of(int ring, int angle) const;
  std::string label_string(uint32_t label) const;

  // Hard decision: nearest ring by radius, nearest angle by phase, ties
  // toward the lower index.
  PointIndices point_to_indices(std::complex<double> y) const;

 private:
  RapskParams params_;
  int ring_bits_, angle_bits_;
  double d_;
  double power_;
  std::vector<double> radii_;
};

// Square Gray-labeled QAM, unit mean power; the PAPR/error-floor baseline.
class QamRef {
 public:
  explicit QamRef(int m);  // m in {4, 16, 64, 256, 1024, 4096}

  int size() const { return m_; }
  int side() const { return side_; }
  int bits_per_symbol() const { return bits_; }
  double papr() const;

  std::complex<double> point(int index) const { return points_[index]; }
  uint32_t label(int index) const { return labels_[index]; }

  int nearest(std::complex<double> y) const;  // index of nearest point

 private:
  int m_, side_, bits_;
  double scale_;
  std::vector<std::complex<double>> points_;
  std::vector<uint32_t> labels_;
};

}  // namespace rapsk
