#include "rapsk/mlcodec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rapsk/numerics.hpp"

namespace rapsk {

namespace {

// Stand-in noise std for noiseless coordinates: saturates the kappa table
// and yields huge, correctly signed LLRs.
constexpr double kTinySigma = 1e-12;

double logsumexp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

LevelContext normalize_level(double y_coord, int prefix, int i, double sigma) {
  if (i < 1) throw std::invalid_argument("normalize_level: level index < 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("normalize_level: sigma <= 0");
  const double scale = std::ldexp(1.0, i - 1);  // 2^(i-1)
  return {(y_coord - prefix) / scale, sigma / scale};
}

double llr_fast(const LevelContext& ctx) {
  const double a = kappa_for_sigma(ctx.sigma_i).value;
  return 2.0 * a * std::cos(kPi * ctx.y_i);
}

double llr_exact(double y_coord, int prefix, int i, int q_bits, double sigma) {
  if (i < 1 || i > q_bits) throw std::invalid_argument("llr_exact: bad level");
  if (!(sigma > 0.0)) throw std::invalid_argument("llr_exact: sigma <= 0");
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const int survivors = 1 << (q_bits - i);
  std::vector<double> lg(survivors);
  double num[2];
  for (int b = 0; b < 2; ++b) {
    for (int j = 0; j < survivors; ++j) {
      const double x = prefix + (b << (i - 1)) + (j << i);
      const double d = y_coord - x;
      lg[j] = -d * d * inv2s2;
    }
    num[b] = logsumexp(lg);
  }
  return num[0] - num[1];
}

MlcScheme::MlcScheme(RapskConstellation constellation,
                     std::vector<ComponentCode> codes)
    : constellation_(std::move(constellation)), codes_(std::move(codes)) {
  const int m = constellation_.bits_per_symbol();
  if (static_cast<int>(codes_.size()) != m)
    throw std::invalid_argument("mlc: need one component code per label bit");
  block_len_ = codes_.front().block_len();
  info_len_ = 0;
  for (const auto& c : codes_) {
    if (c.block_len() != block_len_)
      throw std::invalid_argument("mlc: component block lengths differ");
    info_len_ += c.info_len();
  }
}

MlcScheme MlcScheme::uncoded(const RapskConstellation& c, int block_len) {
  std::vector<ComponentCode> codes(
      c.bits_per_symbol(), ComponentCode::uncoded(block_len));
  return MlcScheme(c, std::move(codes));
}

int MlcScheme::label_bit_position(int step) const {
  const int n = radial_levels(), m = levels();
  if (step < 0 || step >= m)
    throw std::invalid_argument("label_bit_position: step out of range");
  // Label string is [ring MSB..LSB][angle MSB..LSB]; decode order is ring
  // LSB-first then angle LSB-first.
  if (step < n) return n - 1 - step;
  return m - 1 - (step - n);
}

std::vector<std::complex<double>> MlcScheme::mlc_encode(
    std::span<const uint8_t> info) const {
  if (static_cast<int>(info.size()) != info_len_)
    throw std::invalid_argument("mlc_encode: wrong info length");
  const int m = levels(), n = radial_levels();
  std::vector<std::vector<uint8_t>> rows(m);
  std::size_t off = 0;
  for (int s = 0; s < m; ++s) {
    const int h = codes_[s].info_len();
    rows[s] = codes_[s].encode(info.subspan(off, h));
    off += h;
  }
  std::vector<std::complex<double>> symbols(block_len_);
  for (int t = 0; t < block_len_; ++t) {
    int ring = 0, angle = 0;
    for (int s = 0; s < n; ++s) ring |= rows[s][t] << s;
    for (int s = n; s < m; ++s) angle |= rows[s][t] << (s - n);
    symbols[t] = constellation_.point(ring, angle);
  }
  return symbols;
}

MsdResult MlcScheme::msd_decode(std::span<const std::complex<double>> ys,
                                const ChannelParams& p) const {
  if (static_cast<int>(ys.size()) != block_len_)
    throw std::invalid_argument("msd_decode: wrong block length");
  const int t_len = block_len_;
  const int n = radial_levels(), m = levels();
  const auto& c = constellation_;

  MsdResult out;
  out.level_info.resize(m);
  out.level_converged.assign(m, 1);

  std::vector<double> llr(t_len);
  std::vector<int> ring_hat(t_len, 0);

  // Stage 1: radial domain, coordinate (|y| - r0)/D, base sigma = sigma_z/D.
  if (n > 0) {
    std::vector<double> coord(t_len);
    for (int t = 0; t < t_len; ++t)
      coord[t] = (std::abs(ys[t]) - c.params().r0) / c.spacing();
    const double sigma =
        std::max(radial_noise_sigma(p) / c.spacing(), kTinySigma);
    std::vector<int> prefix(t_len, 0);
    for (int s = 0; s < n; ++s) {
      for (int t = 0; t < t_len; ++t)
        llr[t] = llr_fast(normalize_level(coord[t], prefix[t], s + 1, sigma));
      DecodeResult dr = codes_[s].decode_soft(llr);
      out.level_converged[s] = dr.converged;
      for (int t = 0; t < t_len; ++t) prefix[t] |= dr.codeword[t] << s;
      out.level_info[s] = std::move(dr.info);
    }
    ring_hat = std::move(prefix);
  }

  // Stage 2: angular domain; the decoded ring supplies rho_x, the observed
  // magnitude rho_y; coordinate arg(y) K/(2 pi) wrapped into [0, K).
  {
    const int kk = c.points_per_ring();
    std::vector<double> coord(t_len), sigma(t_len);
    for (int t = 0; t < t_len; ++t) {
      double w = std::arg(ys[t]) * kk / kTwoPi;
      w -= kk * std::floor(w / kk);
      coord[t] = w;
      const double rho_x = c.radius(ring_hat[t]);
      const double rho_y = std::max(std::abs(ys[t]), 1e-12);
      const double var = angular_sigma_a2(rho_x, rho_y, p) * kk * kk /
                         (kTwoPi * kTwoPi);
      sigma[t] = std::max(std::sqrt(var), kTinySigma);
    }
    std::vector<int> prefix(t_len, 0);
    for (int s = n; s < m; ++s) {
      const int i = s - n + 1;
      for (int t = 0; t < t_len; ++t)
        llr[t] = llr_fast(normalize_level(coord[t], prefix[t], i, sigma[t]));
      DecodeResult dr = codes_[s].decode_soft(llr);
      out.level_converged[s] = dr.converged;
      for (int t = 0; t < t_len; ++t) prefix[t] |= dr.codeword[t] << (i - 1);
      out.level_info[s] = std::move(dr.info);
    }
  }

  out.info.reserve(info_len_);
  for (const auto& row : out.level_info)
    out.info.insert(out.info.end(), row.begin(), row.end());
  return out;
}

GenieLevelStats genie_level_errors(const MlcScheme& scheme,
                                   const ChannelParams& p, uint64_t trials,
                                   RandomStream& rng) {
  const auto& c = scheme.constellation();
  const int n = scheme.radial_levels(), m = scheme.levels();
  const int rings = c.rings(), kk = c.points_per_ring();
  GenieLevelStats g;
  g.trials = trials;
  g.errors.assign(m, 0);
  g.ring_errors.assign(m, std::vector<uint64_t>(rings, 0));
  g.ring_trials.assign(m, std::vector<uint64_t>(rings, 0));

  const double sigma_r =
      rings > 1 ? std::max(radial_noise_sigma(p) / c.spacing(), kTinySigma)
                : kTinySigma;
  for (uint64_t tr = 0; tr < trials; ++tr) {
    const uint32_t label =
        static_cast<uint32_t>(rng.next_u64() % static_cast<uint64_t>(c.size()));
    const int ring = static_cast<int>(label) >> c.angle_bits();
    const int angle = static_cast<int>(label) & (kk - 1);
    const std::complex<double> y = transmit(c.point(ring, angle), p, rng);

    if (n > 0) {
      const double coord = (std::abs(y) - c.params().r0) / c.spacing();
      for (int s = 0; s < n; ++s) {
        const int bit = (ring >> s) & 1;
        const int prefix = ring & ((1 << s) - 1);
        const double v =
            llr_fast(normalize_level(coord, prefix, s + 1, sigma_r));
        const int hard = v < 0.0;
        g.ring_trials[s][ring]++;
        if (hard != bit) {
          g.errors[s]++;
          g.ring_errors[s][ring]++;
        }
      }
    }
    {
      double w = std::arg(y) * kk / kTwoPi;
      w -= kk * std::floor(w / kk);
      const double rho_y = std::max(std::abs(y), 1e-12);
      const double var = angular_sigma_a2(c.radius(ring), rho_y, p) * kk * kk /
                         (kTwoPi * kTwoPi);
      const double sigma_a = std::max(std::sqrt(var), kTinySigma);
      for (int s = n; s < m; ++s) {
        const int i = s - n + 1;
        const int bit = (angle >> (i - 1)) & 1;
        const int prefix = angle & ((1 << (i - 1)) - 1);
        const double v = llr_fast(normalize_level(w, prefix, i, sigma_a));
        const int hard = v < 0.0;
        g.ring_trials[s][ring]++;
        if (hard != bit) {
          g.errors[s]++;
          g.ring_errors[s][ring]++;
        }
      }
    }
  }
  g.rate.resize(m);
  for (int s = 0; s < m; ++s)
    g.rate[s] = static_cast<double>(g.errors[s]) / static_cast<double>(trials);
  return g;
}

std::vector<GenieLevelStats> genie_level_errors(const MlcScheme& scheme,
                                                const ChannelParams& base,
                                                std::span<const double> snr_db,
                                                uint64_t trials,
                                                RandomStream& rng) {
  std::vector<GenieLevelStats> out;
  out.reserve(snr_db.size());
  for (double s : snr_db) {
    ChannelParams p = ChannelParams::from_snr_db(s, base.kappa_phi,
                                                 base.angular_model);
    out.push_back(genie_level_errors(scheme, p, trials, rng));
  }
  return out;
}

}  // namespace rapsk
