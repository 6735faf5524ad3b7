#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "doctest.h"
#include "rapsk/rng.hpp"
#include "rapsk/sim.hpp"

using namespace rapsk;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* kHeader =
    "snr_db,kappa_phi,trials,symbol_errors,ser,bit_errors,ber,"
    "wall_seconds,seed\n";

SimConfig small_uncoded() {
  SimConfig cfg;
  cfg.mode = SimMode::UncodedSer;
  cfg.rapsk = {2, 8, 0.5};
  cfg.snr_start = 8.0;
  cfg.snr_stop = 12.0;
  cfg.snr_step = 2.0;
  cfg.kappa_phi = 200.0;
  cfg.max_trials = 20000;
  cfg.target_errors = 150;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("snr_grid covers both endpoints") {
  SimConfig cfg;
  cfg.snr_start = 10.0;
  cfg.snr_stop = 20.0;
  cfg.snr_step = 1.0;
  auto g = snr_grid(cfg);
  REQUIRE(g.size() == 11);
  CHECK(g.front() == 10.0);
  CHECK(g.back() == 20.0);

  cfg.snr_stop = 10.0;
  CHECK(snr_grid(cfg).size() == 1);

  cfg.snr_start = 0.0;
  cfg.snr_stop = 10.0;
  cfg.snr_step = 2.5;
  g = snr_grid(cfg);
  REQUIRE(g.size() == 5);
  CHECK(g[3] == 7.5);
}

TEST_CASE("seed_stream: same triple repeats, any coordinate separates") {
  RandomStream a = seed_stream(42, 3, 7);
  RandomStream b = seed_stream(42, 3, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  const uint64_t triples[][3] = {{42, 3, 8}, {42, 4, 7}, {43, 3, 7}};
  for (const auto& t : triples) {
    RandomStream base = seed_stream(42, 3, 7);
    RandomStream other = seed_stream(t[0], t[1], t[2]);
    bool differs = false;
    for (int i = 0; i < 8 && !differs; ++i)
      differs = base.next_u64() != other.next_u64();
    CHECK(differs);
  }
}

TEST_CASE("SimConfig::validate rejects bad fields") {
  auto bad = [](auto&& tweak) {
    SimConfig cfg;
    tweak(cfg);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  };
  bad([](SimConfig& c) { c.snr_step = 0.0; });
  bad([](SimConfig& c) { c.snr_stop = c.snr_start - 1.0; });
  bad([](SimConfig& c) { c.max_trials = 0; });
  bad([](SimConfig& c) { c.workers = 0; });
  bad([](SimConfig& c) { c.kappa_phi = 0.0; });
  bad([](SimConfig& c) { c.kappa_phi = -3.0; });
  bad([](SimConfig& c) {
    c.mode = SimMode::CodedBer;
    c.family = Family::Qam;
  });
  bad([](SimConfig& c) {
    c.mode = SimMode::CodedBer;
    c.block_len = 0;
  });
  bad([](SimConfig& c) { c.rapsk = {3, 32, 0.6}; });
  SimConfig ok;
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("CSV: exact header, empty run, shortest-round-trip numbers") {
  CHECK(csv_string({}) == kHeader);

  ResultRow r;
  r.snr_db = 21.5;
  r.kappa_phi = kInf;
  r.trials = 12345;
  r.symbol_errors = 67;
  r.ser = 67.0 / 12345.0;
  r.bit_errors = 89;
  r.ber = 89.0 / 98760.0;
  r.wall_seconds = 0.0;
  r.seed = 9;
  const std::string s = csv_string({r});
  REQUIRE(s.rfind(kHeader, 0) == 0);
  const std::string line = s.substr(std::string(kHeader).size());

  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  REQUIRE(cells.size() == 9);
  CHECK(std::stod(cells[0]) == 21.5);
  CHECK(std::stod(cells[1]) == kInf);
  CHECK(std::stoull(cells[2]) == 12345);
  CHECK(std::stoull(cells[3]) == 67);
  CHECK(std::stod(cells[4]) == r.ser);  // full precision round trip
  CHECK(std::stoull(cells[5]) == 89);
  CHECK(std::stod(cells[6]) == r.ber);
  CHECK(cells[7] == "0");
  CHECK(std::stoull(cells[8]) == 9);

  std::ostringstream os;
  write_csv({r}, os);
  CHECK(os.str() == s);
}

TEST_CASE("worker count never changes a byte of output") {
  SimConfig cfg = small_uncoded();
  cfg.workers = 1;
  const auto rows1 = run_sim(cfg);
  const std::string csv1 = csv_string(rows1);
  std::ostringstream json1;
  write_json(rows1, json1);

  for (int w : {2, 4}) {
    cfg.workers = w;
    const auto rows = run_sim(cfg);
    CHECK(csv_string(rows) == csv1);
    std::ostringstream js;
    write_json(rows, js);
    CHECK(js.str() == json1.str());
  }

  // Repeat run, same seed: identical; different seed: not.
  cfg.workers = 2;
  CHECK(csv_string(run_sim(cfg)) == csv1);
  cfg.seed = 6;
  CHECK(csv_string(run_sim(cfg)) != csv1);
}

TEST_CASE("JSON mirrors rows; infinite kappa_phi spelled as string") {
  SimConfig cfg = small_uncoded();
  cfg.snr_stop = cfg.snr_start;  // one point
  cfg.max_trials = 4096;
  cfg.target_errors = 0;
  const auto rows = run_sim(cfg);
  REQUIRE(rows.size() == 1);

  std::ostringstream os;
  write_json(rows, os);
  const auto arr = nlohmann::json::parse(os.str());
  REQUIRE(arr.is_array());
  REQUIRE(arr.size() == 1);
  const auto& o = arr[0];
  CHECK(o["snr_db"].get<double>() == rows[0].snr_db);
  CHECK(o["kappa_phi"].get<double>() == 200.0);
  CHECK(o["trials"].get<uint64_t>() == rows[0].trials);
  CHECK(o["symbol_errors"].get<uint64_t>() == rows[0].symbol_errors);
  CHECK(o["ser"].get<double>() == rows[0].ser);
  CHECK(o["bit_errors"].get<uint64_t>() == rows[0].bit_errors);
  CHECK(o["ber"].get<double>() == rows[0].ber);
  CHECK(o["wall_seconds"].get<double>() == 0.0);
  CHECK(o["seed"].get<uint64_t>() == 5);
  CHECK_FALSE(o.contains("per_level_errors"));  // uncoded

  cfg.kappa_phi = kInf;
  std::ostringstream os2;
  write_json(run_sim(cfg), os2);
  const auto arr2 = nlohmann::json::parse(os2.str());
  CHECK(arr2[0]["kappa_phi"].get<std::string>() == "inf");
}

TEST_CASE("noiseless sweeps are error free") {
  SimConfig cfg;
  cfg.mode = SimMode::UncodedSer;
  cfg.rapsk = {8, 32, 0.6};
  cfg.snr_start = cfg.snr_stop = 200.0;
  cfg.kappa_phi = kInf;
  cfg.max_trials = 4096;
  cfg.seed = 3;
  auto rows = run_uncoded_ser(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].trials == 4096);  // target never reached
  CHECK(rows[0].symbol_errors == 0);
  CHECK(rows[0].ser == 0.0);
  CHECK(rows[0].bit_errors == 0);

  cfg.family = Family::Qam;
  cfg.qam_m = 256;
  rows = run_uncoded_ser(cfg);
  CHECK(rows[0].ser == 0.0);
}

TEST_CASE("coded mode: one clean block decodes to zero BER") {
  SimConfig cfg;
  cfg.mode = SimMode::CodedBer;
  cfg.rapsk = {8, 32, 0.6};
  cfg.snr_start = cfg.snr_stop = 60.0;
  cfg.kappa_phi = kInf;
  cfg.block_len = 512;
  cfg.max_trials = 512;  // exactly one block
  cfg.seed = 21;
  const auto rows = run_coded_ber(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].trials == 512);
  CHECK(rows[0].bit_errors == 0);
  CHECK(rows[0].ber == 0.0);
  CHECK(rows[0].symbol_errors == 0);
  REQUIRE(rows[0].per_level_errors.size() == 8);
  for (uint64_t e : rows[0].per_level_errors) CHECK(e == 0);

  // JSON carries the per-level breakdown in coded mode.
  std::ostringstream os;
  write_json(rows, os);
  const auto arr = nlohmann::json::parse(os.str());
  CHECK(arr[0]["per_level_errors"].size() == 8);

  // Overrides must cover every decode level.
  cfg.rate_overrides.assign(3, CodeRate{1, 2});
  CHECK_THROWS_AS(run_coded_ber(cfg), std::invalid_argument);
  cfg.rate_overrides.assign(8, CodeRate{1, 1});  // all uncoded
  const auto rows2 = run_coded_ber(cfg);
  CHECK(rows2[0].ber == 0.0);
  CHECK(rows2[0].trials == 512);
}

TEST_CASE("uncoded SER decreases with SNR at kappa_phi = inf") {
  SimConfig cfg;
  cfg.mode = SimMode::UncodedSer;
  cfg.rapsk = {2, 8, 0.5};
  cfg.snr_start = 6.0;
  cfg.snr_stop = 14.0;
  cfg.snr_step = 2.0;
  cfg.kappa_phi = kInf;
  cfg.max_trials = 60000;
  cfg.target_errors = 0;  // fixed sample size at every point
  cfg.seed = 11;
  const auto rows = run_uncoded_ser(cfg);
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    CHECK(rows[i].snr_db < rows[i + 1].snr_db);  // ordered by snr_db
    const auto se = [&](const ResultRow& r) {
      return std::sqrt(r.ser * (1.0 - r.ser) / r.trials);
    };
    // Monotone up to 2-standard-error slack.
    CHECK(rows[i + 1].ser < rows[i].ser + 2.0 * (se(rows[i]) + se(rows[i + 1])));
  }
  CHECK(rows.front().ser > 4.0 * rows.back().ser);  // measured ratio ~5
}

TEST_CASE("target_errors stops a point early") {
  SimConfig cfg;
  cfg.mode = SimMode::UncodedSer;
  cfg.rapsk = {2, 8, 0.5};
  cfg.snr_start = cfg.snr_stop = 5.0;
  cfg.kappa_phi = kInf;
  cfg.max_trials = 1000000;
  cfg.target_errors = 100;
  cfg.seed = 13;
  const auto rows = run_uncoded_ser(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].symbol_errors >= 100);
  CHECK(rows[0].trials < cfg.max_trials);
  CHECK(rows[0].trials % 8192 == 0);  // whole batches only
}
