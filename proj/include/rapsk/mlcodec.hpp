#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "rapsk/channel.hpp"
#include "rapsk/codes.hpp"
#include "rapsk/constellation.hpp"
#include "rapsk/rng.hpp"

namespace rapsk {

// Per-level view of a normalized coordinate: level i (1-based within its
// domain) sees y_i = (y - prefix)/2^(i-1) and sigma_i = sigma/2^(i-1), where
// prefix is the integer decided by the previous levels.
struct LevelContext {
  double y_i;
  double sigma_i;
};

LevelContext normalize_level(double y_coord, int prefix, int i, double sigma);

// 2 a(sigma_i) cos(pi y_i); positive favors bit 0.  Cost independent of the
// constellation size (one table lookup, one cosine).
double llr_fast(const LevelContext& ctx);

// Ground truth: log-ratio of summed Gaussian likelihoods over the candidate
// set {prefix + b 2^(i-1) + j 2^i, j = 0..2^(Q-i)-1} for b in {0, 1}.
double llr_exact(double y_coord, int prefix, int i, int q_bits, double sigma);

struct MsdResult {
  std::vector<uint8_t> info;                     // concatenated level infos
  std::vector<std::vector<uint8_t>> level_info;  // decode order
  std::vector<uint8_t> level_converged;          // 1 = decoder satisfied
};

// MLC scheme: one component code per label bit, decoded radial-domain-first
// and LSB-first within each domain.
class MlcScheme {
 public:
  MlcScheme(RapskConstellation constellation, std::vector<ComponentCode> codes);

  // All-uncoded scheme; handy for hard-detection equivalence and genies.
  static MlcScheme uncoded(const RapskConstellation& c, int block_len);

  const RapskConstellation& constellation() const { return constellation_; }
  const std::vector<ComponentCode>& codes() const { return codes_; }
  int block_len() const { return block_len_; }
  int levels() const { return static_cast<int>(codes_.size()); }
  int radial_levels() const { return constellation_.ring_bits(); }
  int angular_levels() const { return constellation_.angle_bits(); }
  int info_len() const { return info_len_; }

  // Decode step -> position of its bit in the MSB-first label string (the
  // fixed permutation between label order and MSD level order).
  int label_bit_position(int step) const;

  std::vector<std::complex<double>> mlc_encode(
      std::span<const uint8_t> info) const;

  MsdResult msd_decode(std::span<const std::complex<double>> ys,
                       const ChannelParams& p) const;

 private:
  RapskConstellation constellation_;
  std::vector<ComponentCode> codes_;
  int block_len_;
  int info_len_;
};

// Genie-aided per-level LLR error rates: every level sees the true prefix
// (and the true ring radius in the angular stage), so each measured rate is
// the raw demapper quality that ratedesign's p_i predicts.
struct GenieLevelStats {
  std::vector<double> rate;                        // per decode step
  std::vector<uint64_t> errors;                    // per decode step
  std::vector<std::vector<uint64_t>> ring_errors;  // [step][true ring]
  std::vector<std::vector<uint64_t>> ring_trials;  // [step][true ring]
  uint64_t trials = 0;
};

GenieLevelStats genie_level_errors(const MlcScheme& scheme,
                                   const ChannelParams& p, uint64_t trials,
                                   RandomStream& rng);

// Sweep flavor: one table per SNR grid point (kappa_phi/model from `base`).
std::vector<GenieLevelStats> genie_level_errors(const MlcScheme& scheme,
                                                const ChannelParams& base,
                                                std::span<const double> snr_db,
                                                uint64_t trials,
                                                RandomStream& rng);

}  // namespace rapsk
