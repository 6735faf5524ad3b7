#include "rapsk/ratedesign.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rapsk/numerics.hpp"

namespace rapsk {

namespace {

double rule_rate(RateRule rule, double p) {
  switch (rule) {
    case RateRule::OneMinusP:
      return 1.0 - p;
    case RateRule::BscCapacity:
      return 1.0 - binary_entropy(p);
  }
  throw std::logic_error("rule_rate: bad rule");
}

LevelDesign make_level(bool radial, int level, std::vector<double> sigmas,
                       RateRule rule) {
  LevelDesign ld;
  ld.radial = radial;
  ld.level = level;
  ld.sigmas = std::move(sigmas);
  ld.error_probs.reserve(ld.sigmas.size());
  double p_sum = 0.0, rate_sum = 0.0;
  for (double s : ld.sigmas) {
    const double p = s > 0.0 ? level_error_prob(s) : 0.0;
    ld.error_probs.push_back(p);
    p_sum += p;
    rate_sum += rule_rate(rule, p);
  }
  const double count = static_cast<double>(ld.sigmas.size());
  ld.mean_error_prob = p_sum / count;
  ld.proposed_rate = rate_sum / count;
  return ld;
}

}  // namespace

double level_error_prob(double sigma_i) {
  if (!(sigma_i > 0.0)) throw std::domain_error("level_error_prob: sigma <= 0");
  const double a = kappa_for_sigma(sigma_i).value;
  const double p = 2.0 * integrate_adaptive(
                             [a](double psi) { return von_mises_pdf(psi, 0.0, a); },
                             0.5 * kPi, kPi, 0.5e-10);
  return std::clamp(p, 0.0, 0.5);
}

RateDesign design_rates(const RapskConstellation& c, const ChannelParams& p,
                        RateRule rule) {
  p.validate();
  RateDesign design;
  const int n = c.ring_bits(), k = c.angle_bits();
  design.levels.reserve(n + k);

  if (n > 0) {
    const double base = radial_noise_sigma(p) / c.spacing();
    for (int i = 1; i <= n; ++i)
      design.levels.push_back(
          make_level(true, i, {base / std::ldexp(1.0, i - 1)}, rule));
  }

  std::vector<double> ring_base(c.rings());
  for (int j = 0; j < c.rings(); ++j) {
    const double var = angular_sigma_a2(c.radius(j), c.radius(j), p) *
                       c.points_per_ring() * c.points_per_ring() /
                       (kTwoPi * kTwoPi);
    ring_base[j] = std::sqrt(var);
  }
  for (int i = 1; i <= k; ++i) {
    std::vector<double> sigmas(ring_base.size());
    for (std::size_t j = 0; j < ring_base.size(); ++j)
      sigmas[j] = ring_base[j] / std::ldexp(1.0, i - 1);
    design.levels.push_back(make_level(false, i, std::move(sigmas), rule));
  }

  double sum = 0.0;
  for (const auto& ld : design.levels) sum += ld.proposed_rate;
  design.overall_proposed = sum / static_cast<double>(design.levels.size());
  return design;
}

RateDesign quantize_rates(RateDesign design, double margin) {
  if (!(margin >= 0.0)) throw std::invalid_argument("quantize: margin < 0");
  design.margin = margin;
  double sum = 0.0;
  for (auto& ld : design.levels) {
    CodeRate best{0, 1};
    for (const CodeRate& r : available_rates())
      if (r.value() <= ld.proposed_rate - margin && r.value() >= best.value())
        best = r;
    ld.quantized_rate = best;
    sum += best.value();
  }
  design.overall_quantized = sum / static_cast<double>(design.levels.size());
  return design;
}

MlcScheme make_scheme(const RapskConstellation& c, const RateDesign& design,
                      int block_len, uint64_t seed, int max_iters) {
  if (static_cast<int>(design.levels.size()) != c.bits_per_symbol())
    throw std::invalid_argument("make_scheme: design does not match labels");
  std::vector<ComponentCode> codes;
  codes.reserve(design.levels.size());
  for (std::size_t s = 0; s < design.levels.size(); ++s)
    codes.push_back(ComponentCode::for_rate(
        design.levels[s].quantized_rate, block_len,
        seed + 1000003ULL * s, max_iters));
  return MlcScheme(c, std::move(codes));
}

}  // namespace rapsk
