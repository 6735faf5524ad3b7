#include "rapsk/constellation.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "rapsk/numerics.hpp"

namespace rapsk {

namespace {

bool power_of_two(int v) {
  return v >= 1 && std::has_single_bit(static_cast<unsigned>(v));
}

int log2_exact(int v) { return std::bit_width(static_cast<unsigned>(v)) - 1; }

}  // namespace

void RapskParams::validate() const {
  if (!power_of_two(rings))
    throw std::invalid_argument("rapsk: ring count must be a power of two");
  if (points_per_ring < 2 || !power_of_two(points_per_ring))
    throw std::invalid_argument(
        "rapsk: points per ring must be a power of two >= 2");
  if (rings == 1) {
    if (r0 != 1.0)
      throw std::invalid_argument("rapsk: single ring requires r0 = 1");
    return;
  }
  if (!(r0 > 0.0) || r0 >= 1.0)
    throw std::invalid_argument("rapsk: r0 must lie in (0, 1)");
}

double ring_spacing(int rings, double r0) {
  if (rings == 1) return 0.0;
  const double nm1 = rings - 1.0;
  const double q = nm1 * (2.0 * rings - 1.0) / 6.0;
  const double b = nm1 * r0;
  const double c = 1.0 - r0 * r0;
  // root of q D^2 + b D - c = 0, written to stay stable as r0 -> 1
  return 2.0 * c / (b + std::sqrt(b * b + 4.0 * q * c));
}

double papr_for_spacing(int rings, double d_over_r0) {
  if (rings < 1) throw std::invalid_argument("papr_for_spacing: rings < 1");
  double sum = 0.0;
  for (int i = 0; i < rings; ++i) {
    const double r = 1.0 + i * d_over_r0;
    sum += r * r;
  }
  const double peak = 1.0 + (rings - 1.0) * d_over_r0;
  return peak * peak * rings / sum;
}

double papr_limit(int rings) {
  if (rings < 1) throw std::invalid_argument("papr_limit: rings < 1");
  return 6.0 * (rings - 1.0) / (2.0 * rings - 1.0);
}

RapskConstellation::RapskConstellation(const RapskParams& params)
    : params_(params) {
  params_.validate();
  ring_bits_ = log2_exact(params_.rings);
  angle_bits_ = log2_exact(params_.points_per_ring);
  d_ = ring_spacing(params_.rings, params_.r0);
  radii_.resize(params_.rings);
  power_ = 0.0;
  for (int i = 0; i < params_.rings; ++i) {
    radii_[i] = params_.r0 + i * d_;
    power_ += radii_[i] * radii_[i];
  }
  power_ /= params_.rings;
}

std::complex<double> RapskConstellation::point(int ring, int angle) const {
  const double theta = kTwoPi * angle / params_.points_per_ring;
  return std::polar(radii_[ring], theta);
}

std::complex<double> RapskConstellation::label_to_point(uint32_t label) const {
  if (label >= static_cast<uint32_t>(size()))
    throw std::invalid_argument("rapsk: label out of range");
  return point(static_cast<int>(label >> angle_bits_),
               static_cast<int>(label & (params_.points_per_ring - 1)));
}

std::complex<double> RapskConstellation::label_to_point(
    std::string_view bits) const {
  if (static_cast<int>(bits.size()) != bits_per_symbol())
    throw std::invalid_argument("rapsk: label has wrong length");
  uint32_t label = 0;
  for (char c : bits) {
    if (c != '0' && c != '1')
      throw std::invalid_argument("rapsk: label must be binary");
    label = (label << 1) | (c == '1');
  }
  return label_to_point(label);
}

uint32_t RapskConstellation::label_of(int ring, int angle) const {
  return (static_cast<uint32_t>(ring) << angle_bits_) |
         static_cast<uint32_t>(angle);
}

std::string RapskConstellation::label_string(uint32_t label) const {
  std::string s(bits_per_symbol(), '0');
  for (int i = 0; i < bits_per_symbol(); ++i)
    if (label >> (bits_per_symbol() - 1 - i) & 1u) s[i] = '1';
  return s;
}

PointIndices RapskConstellation::point_to_indices(std::complex<double> y)
    const {
  int ring = 0;
  if (params_.rings > 1) {
    const double v = (std::abs(y) - params_.r0) / d_;
    ring = static_cast<int>(std::ceil(v - 0.5));  // midpoints go down
    if (ring < 0) ring = 0;
    if (ring >= params_.rings) ring = params_.rings - 1;
  }
  const int k = params_.points_per_ring;
  double w = std::arg(y) * k / kTwoPi;
  w -= k * std::floor(w / k);  // into [0, K)
  int angle = static_cast<int>(std::ceil(w - 0.5));
  if (angle >= k) angle -= k;
  if (angle < 0) angle = 0;
  return {ring, angle};
}

QamRef::QamRef(int m) : m_(m) {
  if (m < 4 || !power_of_two(m) || log2_exact(m) % 2 != 0)
    throw std::invalid_argument("qam: size must be an even power of two >= 4");
  bits_ = log2_exact(m);
  side_ = 1 << (bits_ / 2);
  // mean power of {+-1, +-3, ...} per axis is (side^2 - 1) / 3
  scale_ = 1.0 / std::sqrt(2.0 * (side_ * side_ - 1.0) / 3.0);
  points_.reserve(m);
  labels_.reserve(m);
  const int half = bits_ / 2;
  for (int ix = 0; ix < side_; ++ix) {
    for (int iq = 0; iq < side_; ++iq) {
      const double re = scale_ * (2.0 * ix - side_ + 1.0);
      const double im = scale_ * (2.0 * iq - side_ + 1.0);
      points_.emplace_back(re, im);
      const uint32_t gx = static_cast<uint32_t>(ix ^ (ix >> 1));
      const uint32_t gq = static_cast<uint32_t>(iq ^ (iq >> 1));
      labels_.push_back((gx << half) | gq);
    }
  }
}

double QamRef::papr() const {
  const double peak = scale_ * (side_ - 1.0);
  return 2.0 * peak * peak;  // mean power is 1 by construction
}

int QamRef::nearest(std::complex<double> y) const {
  const auto slice = [&](double v) {
    int idx = static_cast<int>(std::lround((v / scale_ + side_ - 1.0) / 2.0));
    if (idx < 0) idx = 0;
    if (idx >= side_) idx = side_ - 1;
    return idx;
  };
  return slice(y.real()) * side_ + slice(y.imag());
}

}  // namespace rapsk
