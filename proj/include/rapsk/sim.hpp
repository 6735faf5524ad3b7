#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "rapsk/channel.hpp"
#include "rapsk/constellation.hpp"
#include "rapsk/ratedesign.hpp"
#include "rapsk/rng.hpp"

namespace rapsk {

enum class SimMode { UncodedSer, CodedBer };
enum class Family { Rapsk, Qam };

struct SimConfig {
  SimMode mode = SimMode::UncodedSer;
  Family family = Family::Rapsk;
  RapskParams rapsk{8, 32, 0.6};
  int qam_m = 256;

  double snr_start = 10.0;
  double snr_stop = 20.0;
  double snr_step = 1.0;
  double kappa_phi = std::numeric_limits<double>::infinity();
  AngularModel angular_model = AngularModel::SmoothSaddlePoint;

  uint64_t max_trials = 1'000'000;  // channel symbols per sweep point
  uint64_t target_errors = 200;     // symbol errors (uncoded) / bit (coded)
  int block_len = 4096;             // T (coded mode)
  uint64_t seed = 1;
  int workers = 1;

  RateRule rule = RateRule::OneMinusP;
  double margin = 0.02;
  std::vector<CodeRate> rate_overrides;  // per decode level, optional
  // Channel the code rates are designed for; NaN = sweep midpoint.
  double design_snr_db = std::numeric_limits<double>::quiet_NaN();

  // Real wall-clock timings break run-to-run byte identity, so rows carry
  // wall_seconds = 0 unless explicitly requested.
  bool timing = false;

  void validate() const;
};

struct ResultRow {
  double snr_db = 0.0;
  double kappa_phi = 0.0;
  uint64_t trials = 0;
  uint64_t symbol_errors = 0;
  double ser = 0.0;
  uint64_t bit_errors = 0;
  double ber = 0.0;
  std::vector<uint64_t> per_level_errors;  // coded mode; JSON only
  double wall_seconds = 0.0;
  uint64_t seed = 0;
};

std::vector<double> snr_grid(const SimConfig& cfg);

// Deterministic child stream for batch `batch` of sweep point `point`.
RandomStream seed_stream(uint64_t master_seed, uint64_t point_index,
                         uint64_t batch_index);

std::vector<ResultRow> run_uncoded_ser(const SimConfig& cfg);
std::vector<ResultRow> run_coded_ber(const SimConfig& cfg);
std::vector<ResultRow> run_sim(const SimConfig& cfg);  // dispatch on mode

// CSV with the fixed header
// snr_db,kappa_phi,trials,symbol_errors,ser,bit_errors,ber,wall_seconds,seed
// and shortest-round-trip number formatting.
void write_csv(const std::vector<ResultRow>& rows, std::ostream& os);
std::string csv_string(const std::vector<ResultRow>& rows);

// JSON array mirroring ResultRow (includes per_level_errors when present).
void write_json(const std::vector<ResultRow>& rows, std::ostream& os);

}  // namespace rapsk
