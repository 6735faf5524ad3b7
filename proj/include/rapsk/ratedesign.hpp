#pragma once

#include <cstdint>
#include <vector>

#include "rapsk/channel.hpp"
#include "rapsk/codes.hpp"
#include "rapsk/constellation.hpp"
#include "rapsk/mlcodec.hpp"

namespace rapsk {

enum class RateRule { OneMinusP, BscCapacity };

struct LevelDesign {
  bool radial;
  int level;  // 1-based within its domain
  std::vector<double> sigmas;       // angular: per ring; radial: one entry
  std::vector<double> error_probs;  // same shape
  double mean_error_prob;
  double proposed_rate;
  CodeRate quantized_rate{1, 1};  // filled by quantize_rates
};

struct RateDesign {
  std::vector<LevelDesign> levels;  // decode order
  double overall_proposed = 0.0;
  double overall_quantized = 0.0;
  double margin = 0.0;
};

// Equivalent-BSC crossover of one level: 2 Int_{pi/2}^{pi} VM(psi|0, a(sigma))
// by adaptive quadrature (abs tol 1e-10), clamped into [0, 1/2].
double level_error_prob(double sigma_i);

// Per-level error probabilities and exact proposed rates.  Radial levels use
// base sigma = sigma_z / D; angular levels average the rule's rate over the
// per-ring base sigmas (K/2pi) sqrt(sigma_a2(r_j, r_j)).
RateDesign design_rates(const RapskConstellation& c, const ChannelParams& p,
                        RateRule rule);

// Snap each proposed rate to the largest ladder entry <= proposed - margin.
RateDesign quantize_rates(RateDesign design, double margin = 0.02);

// Instantiate component codes (seeded per level) for the quantized design.
MlcScheme make_scheme(const RapskConstellation& c, const RateDesign& design,
                      int block_len, uint64_t seed, int max_iters = 50);

}  // namespace rapsk
