#include "rapsk/sim.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <future>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rapsk/mlcodec.hpp"
#include "rapsk/numerics.hpp"

namespace rapsk {

namespace {

constexpr uint64_t kUncodedBatch = 8192;  // symbols per batch

struct Counts {
  uint64_t units = 0;  // symbols (uncoded) or blocks (coded)
  uint64_t symbol_errors = 0;
  uint64_t bit_errors = 0;
  std::vector<uint64_t> per_level;
};

// Launch batch jobs in waves of `workers`, always folding results in batch
// order; whatever a wave computed past the stop point is discarded, so the
// fold sequence -- and therefore every output byte -- is independent of the
// worker count.
template <class Job, class Fold>
void run_batches(int workers, const Job& job, const Fold& fold) {
  const int w = std::max(1, workers);
  uint64_t next = 0;
  bool more = true;
  while (more) {
    std::vector<std::future<Counts>> wave;
    wave.reserve(w);
    for (int i = 0; i < w; ++i)
      wave.push_back(std::async(std::launch::async, job,
                                next + static_cast<uint64_t>(i)));
    for (int i = 0; i < w; ++i) {
      Counts c = wave[i].get();
      if (more) more = fold(std::move(c));
    }
    next += static_cast<uint64_t>(w);
  }
}

void append_number(std::string& s, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, res.ptr);
}

void append_number(std::string& s, uint64_t v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, res.ptr);
}

uint64_t hamming(uint32_t a, uint32_t b) {
  return static_cast<uint64_t>(std::popcount(a ^ b));
}

ResultRow finish_row(const SimConfig& cfg, double snr, uint64_t trials,
                     uint64_t sym_err, uint64_t bit_err, uint64_t bits_total,
                     double wall) {
  ResultRow row;
  row.snr_db = snr;
  row.kappa_phi = cfg.kappa_phi;
  row.trials = trials;
  row.symbol_errors = sym_err;
  row.ser = trials ? static_cast<double>(sym_err) / trials : 0.0;
  row.bit_errors = bit_err;
  row.ber = bits_total ? static_cast<double>(bit_err) / bits_total : 0.0;
  row.wall_seconds = cfg.timing ? wall : 0.0;
  row.seed = cfg.seed;
  return row;
}

}  // namespace

void SimConfig::validate() const {
  if (!(snr_step > 0.0)) throw std::invalid_argument("sim: snr_step <= 0");
  if (snr_stop < snr_start)
    throw std::invalid_argument("sim: snr_stop < snr_start");
  if (max_trials < 1) throw std::invalid_argument("sim: max_trials < 1");
  if (workers < 1) throw std::invalid_argument("sim: workers < 1");
  if (!(kappa_phi > 0.0)) throw std::invalid_argument("sim: kappa_phi <= 0");
  if (mode == SimMode::CodedBer) {
    if (family != Family::Rapsk)
      throw std::invalid_argument("sim: coded mode supports RAPSK only");
    if (block_len < 1) throw std::invalid_argument("sim: block_len < 1");
  }
  if (family == Family::Rapsk) rapsk.validate();
}

std::vector<double> snr_grid(const SimConfig& cfg) {
  std::vector<double> grid;
  const int count = static_cast<int>(
      std::floor((cfg.snr_stop - cfg.snr_start) / cfg.snr_step + 1e-9));
  grid.reserve(count + 1);
  for (int i = 0; i <= count; ++i) grid.push_back(cfg.snr_start + i * cfg.snr_step);
  return grid;
}

RandomStream seed_stream(uint64_t master_seed, uint64_t point_index,
                         uint64_t batch_index) {
  return derive_stream(master_seed, point_index, batch_index);
}

std::vector<ResultRow> run_uncoded_ser(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.mode != SimMode::UncodedSer)
    throw std::invalid_argument("run_uncoded_ser: wrong mode");
  kappa_table();  // build before threads spawn

  const bool is_rapsk = cfg.family == Family::Rapsk;
  const RapskConstellation rapsk_c(is_rapsk ? cfg.rapsk : RapskParams{2, 2, 0.5});
  const QamRef qam_c(is_rapsk ? 4 : cfg.qam_m);
  const int m_points = is_rapsk ? rapsk_c.size() : qam_c.size();

  std::vector<ResultRow> rows;
  const auto grid = snr_grid(cfg);
  for (std::size_t pt = 0; pt < grid.size(); ++pt) {
    const ChannelParams params = ChannelParams::from_snr_db(
        grid[pt], cfg.kappa_phi, cfg.angular_model);
    const auto t0 = std::chrono::steady_clock::now();

    const auto job = [&, pt](uint64_t b) -> Counts {
      const uint64_t beg = b * kUncodedBatch;
      if (beg >= cfg.max_trials) return {};
      const uint64_t len = std::min(kUncodedBatch, cfg.max_trials - beg);
      RandomStream rng = seed_stream(cfg.seed, pt, b);
      Counts c;
      c.units = len;
      for (uint64_t i = 0; i < len; ++i) {
        const uint32_t tx = static_cast<uint32_t>(
            rng.next_u64() % static_cast<uint64_t>(m_points));
        if (is_rapsk) {
          const int ring = static_cast<int>(tx) >> rapsk_c.angle_bits();
          const int angle =
              static_cast<int>(tx) & (rapsk_c.points_per_ring() - 1);
          const auto y = transmit(rapsk_c.point(ring, angle), params, rng);
          const PointIndices hat = rapsk_c.point_to_indices(y);
          const uint32_t rx = rapsk_c.label_of(hat.ring, hat.angle);
          if (rx != tx) {
            ++c.symbol_errors;
            c.bit_errors += hamming(rx, tx);
          }
        } else {
          const auto y = transmit(qam_c.point(tx), params, rng);
          const int rx = qam_c.nearest(y);
          if (static_cast<uint32_t>(rx) != tx) {
            ++c.symbol_errors;
            c.bit_errors += hamming(qam_c.label(rx), qam_c.label(tx));
          }
        }
      }
      return c;
    };

    uint64_t trials = 0, sym_err = 0, bit_err = 0;
    run_batches(cfg.workers, job, [&](Counts c) {
      trials += c.units;
      sym_err += c.symbol_errors;
      bit_err += c.bit_errors;
      const bool hit_target =
          cfg.target_errors > 0 && sym_err >= cfg.target_errors;
      return trials < cfg.max_trials && !hit_target;
    });

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const int bits = is_rapsk ? rapsk_c.bits_per_symbol() : qam_c.bits_per_symbol();
    rows.push_back(finish_row(cfg, grid[pt], trials, sym_err, bit_err,
                              trials * static_cast<uint64_t>(bits), wall));
  }
  return rows;
}

std::vector<ResultRow> run_coded_ber(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.mode != SimMode::CodedBer)
    throw std::invalid_argument("run_coded_ber: wrong mode");
  kappa_table();

  const RapskConstellation c(cfg.rapsk);
  const auto grid = snr_grid(cfg);
  const double design_snr = std::isnan(cfg.design_snr_db)
                                ? 0.5 * (cfg.snr_start + cfg.snr_stop)
                                : cfg.design_snr_db;
  const ChannelParams design_params = ChannelParams::from_snr_db(
      design_snr, cfg.kappa_phi, cfg.angular_model);
  RateDesign design =
      quantize_rates(design_rates(c, design_params, cfg.rule), cfg.margin);
  if (!cfg.rate_overrides.empty()) {
    if (cfg.rate_overrides.size() != design.levels.size())
      throw std::invalid_argument("sim: rate override count != level count");
    double sum = 0.0;
    for (std::size_t s = 0; s < design.levels.size(); ++s) {
      design.levels[s].quantized_rate = cfg.rate_overrides[s];
      sum += cfg.rate_overrides[s].value();
    }
    design.overall_quantized = sum / static_cast<double>(design.levels.size());
  }
  const MlcScheme scheme = make_scheme(c, design, cfg.block_len, cfg.seed);
  const uint64_t t_len = static_cast<uint64_t>(scheme.block_len());
  const uint64_t blocks_cap = std::max<uint64_t>(1, cfg.max_trials / t_len);
  const int m = scheme.levels();

  std::vector<ResultRow> rows;
  for (std::size_t pt = 0; pt < grid.size(); ++pt) {
    const ChannelParams params = ChannelParams::from_snr_db(
        grid[pt], cfg.kappa_phi, cfg.angular_model);
    const auto t0 = std::chrono::steady_clock::now();

    const auto job = [&, pt](uint64_t b) -> Counts {
      if (b >= blocks_cap) return {};
      RandomStream rng = seed_stream(cfg.seed, pt, b);
      std::vector<uint8_t> info(scheme.info_len());
      for (auto& bit : info) bit = static_cast<uint8_t>(rng.next_u64() & 1u);
      std::vector<std::complex<double>> ys = scheme.mlc_encode(info);
      for (auto& y : ys) y = transmit(y, params, rng);
      const MsdResult res = scheme.msd_decode(ys, params);

      Counts out;
      out.units = 1;
      out.per_level.assign(m, 0);
      std::size_t off = 0;
      for (int s = 0; s < m; ++s) {
        const auto& dec = res.level_info[s];
        for (std::size_t i = 0; i < dec.size(); ++i)
          out.per_level[s] += dec[i] != info[off + i];
        out.bit_errors += out.per_level[s];
        off += dec.size();
      }
      // Symbol decisions: re-encode decided rows, compare column labels.
      std::vector<std::vector<uint8_t>> tx_rows(m), rx_rows(m);
      off = 0;
      for (int s = 0; s < m; ++s) {
        const auto& code = scheme.codes()[s];
        tx_rows[s] = code.encode(
            std::span(info).subspan(off, code.info_len()));
        rx_rows[s] = code.encode(res.level_info[s]);
        off += code.info_len();
      }
      for (uint64_t t = 0; t < t_len; ++t)
        for (int s = 0; s < m; ++s)
          if (tx_rows[s][t] != rx_rows[s][t]) {
            ++out.symbol_errors;
            break;
          }
      return out;
    };

    uint64_t blocks = 0, sym_err = 0, bit_err = 0;
    std::vector<uint64_t> per_level(m, 0);
    run_batches(cfg.workers, job, [&](Counts cnt) {
      blocks += cnt.units;
      sym_err += cnt.symbol_errors;
      bit_err += cnt.bit_errors;
      for (std::size_t s = 0; s < cnt.per_level.size(); ++s)
        per_level[s] += cnt.per_level[s];
      const bool hit_target =
          cfg.target_errors > 0 && bit_err >= cfg.target_errors;
      return blocks < blocks_cap && !hit_target;
    });

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    ResultRow row = finish_row(
        cfg, grid[pt], blocks * t_len, sym_err, bit_err,
        blocks * static_cast<uint64_t>(scheme.info_len()), wall);
    row.per_level_errors = per_level;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> run_sim(const SimConfig& cfg) {
  return cfg.mode == SimMode::UncodedSer ? run_uncoded_ser(cfg)
                                         : run_coded_ber(cfg);
}

std::string csv_string(const std::vector<ResultRow>& rows) {
  std::string s =
      "snr_db,kappa_phi,trials,symbol_errors,ser,bit_errors,ber,"
      "wall_seconds,seed\n";
  for (const ResultRow& r : rows) {
    append_number(s, r.snr_db);
    s += ',';
    append_number(s, r.kappa_phi);
    s += ',';
    append_number(s, r.trials);
    s += ',';
    append_number(s, r.symbol_errors);
    s += ',';
    append_number(s, r.ser);
    s += ',';
    append_number(s, r.bit_errors);
    s += ',';
    append_number(s, r.ber);
    s += ',';
    append_number(s, r.wall_seconds);
    s += ',';
    append_number(s, r.seed);
    s += '\n';
  }
  return s;
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  os << csv_string(rows);
}

void write_json(const std::vector<ResultRow>& rows, std::ostream& os) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ResultRow& r : rows) {
    nlohmann::json o;
    o["snr_db"] = r.snr_db;
    if (std::isinf(r.kappa_phi))
      o["kappa_phi"] = "inf";
    else
      o["kappa_phi"] = r.kappa_phi;
    o["trials"] = r.trials;
    o["symbol_errors"] = r.symbol_errors;
    o["ser"] = r.ser;
    o["bit_errors"] = r.bit_errors;
    o["ber"] = r.ber;
    if (!r.per_level_errors.empty()) o["per_level_errors"] = r.per_level_errors;
    o["wall_seconds"] = r.wall_seconds;
    o["seed"] = r.seed;
    arr.push_back(std::move(o));
  }
  os << arr.dump(2) << '\n';
}

}  // namespace rapsk
