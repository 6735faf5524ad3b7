// rapsk-sim: RAPSK constellation geometry, MLC rate design, and Monte Carlo
// SER/BER sweeps over the Von Mises phase-noise channel.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rapsk/channel.hpp"
#include "rapsk/constellation.hpp"
#include "rapsk/mlcodec.hpp"
#include "rapsk/ratedesign.hpp"
#include "rapsk/sim.hpp"

namespace {

using nlohmann::json;

double parse_kappa(const std::string& s) {
  if (s == "inf" || s == "infinity" || s == "Inf")
    return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
  }
  if (pos == 0 || pos != s.size()) throw CLI::ValidationError("--kappa-phi: bad value");
  return v;
}

rapsk::AngularModel parse_model(const std::string& s) {
  if (s == "paper") return rapsk::AngularModel::PaperSaddlePoint;
  if (s == "smooth") return rapsk::AngularModel::SmoothSaddlePoint;
  if (s == "highsnr") return rapsk::AngularModel::HighSnr;
  throw CLI::ValidationError("--angular-model: paper|smooth|highsnr");
}

rapsk::RateRule parse_rule(const std::string& s) {
  if (s == "one-minus-p") return rapsk::RateRule::OneMinusP;
  if (s == "bsc-capacity") return rapsk::RateRule::BscCapacity;
  throw CLI::ValidationError("--rule: one-minus-p|bsc-capacity");
}

std::vector<rapsk::CodeRate> parse_rates(const std::string& s) {
  std::vector<rapsk::CodeRate> rates;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    rapsk::CodeRate r{};
    if (const auto slash = tok.find('/'); slash != std::string::npos) {
      r.num = std::stoi(tok.substr(0, slash));
      r.den = std::stoi(tok.substr(slash + 1));
    } else {
      r.num = std::stoi(tok);
      r.den = 1;
    }
    bool known = false;
    for (const auto& a : rapsk::available_rates())
      known |= a == r;
    if (!known) throw CLI::ValidationError("--rates: " + tok + " not in ladder");
    rates.push_back(r);
  }
  return rates;
}

void write_text(const std::string& path, const std::string& body) {
  if (path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << body;
}

json geometry_json(const rapsk::RapskConstellation& c) {
  json points = json::array();
  for (int ring = 0; ring < c.rings(); ++ring)
    for (int angle = 0; angle < c.points_per_ring(); ++angle) {
      const auto p = c.point(ring, angle);
      points.push_back({p.real(), p.imag()});
    }
  return json{{"n", c.rings()},
              {"k", c.points_per_ring()},
              {"r0", c.params().r0},
              {"d", c.spacing()},
              {"papr", c.papr()},
              {"points", std::move(points)}};
}

json design_json(const rapsk::RateDesign& d) {
  json levels = json::array();
  for (const auto& ld : d.levels) {
    json o{{"domain", ld.radial ? "radial" : "angular"},
           {"level", ld.level},
           {"p_i", ld.mean_error_prob},
           {"proposed_rate", ld.proposed_rate},
           {"quantized_rate",
            std::to_string(ld.quantized_rate.num) + "/" +
                std::to_string(ld.quantized_rate.den)}};
    if (ld.radial)
      o["sigma_i"] = ld.sigmas.front();
    else {
      o["sigmas"] = ld.sigmas;
      o["ring_p"] = ld.error_probs;
    }
    levels.push_back(std::move(o));
  }
  return json{{"levels", std::move(levels)},
              {"overall_proposed", d.overall_proposed},
              {"overall_quantized", d.overall_quantized},
              {"margin", d.margin}};
}

int run(int argc, char** argv) {
  CLI::App app{"RAPSK coded-modulation simulator"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags override");

  int n = 8, k = 32;
  double r0 = 0.6;
  std::string json_path;

  auto* geo = app.add_subcommand("constellation", "geometry and PAPR report");
  geo->add_option("--n", n, "ring count N (power of two)");
  geo->add_option("--k", k, "points per ring K (power of two)");
  geo->add_option("--r0", r0, "innermost radius");
  geo->add_option("--json", json_path, "write geometry JSON (- for stdout)");

  double snr_db = 15.0;
  std::string kappa_str = "inf", rule_str = "one-minus-p",
              model_str = "smooth";
  double margin = 0.02;

  auto* rd = app.add_subcommand("rate-design", "per-level BSC rate design");
  rd->add_option("--n", n, "ring count N");
  rd->add_option("--k", k, "points per ring K");
  rd->add_option("--r0", r0, "innermost radius");
  rd->add_option("--snr-db", snr_db, "design SNR, 10log10(1/(2*sigma_z^2))")
      ->required();
  rd->add_option("--kappa-phi", kappa_str, "phase-noise concentration or inf");
  rd->add_option("--rule", rule_str, "one-minus-p|bsc-capacity");
  rd->add_option("--angular-model", model_str, "paper|smooth|highsnr");
  rd->add_option("--margin", margin, "quantization back-off");
  rd->add_option("--json", json_path, "write design JSON (- for stdout)");

  rapsk::SimConfig cfg;
  std::string mode_str = "uncoded", family_str = "rapsk", out_path = "-",
              rates_str, sim_json_path;
  int qam_m = 256;
  double design_snr = std::numeric_limits<double>::quiet_NaN();

  auto* sim = app.add_subcommand("simulate", "Monte Carlo SER/BER sweep");
  sim->add_option("--mode", mode_str, "uncoded|coded");
  sim->add_option("--family", family_str, "rapsk|qam");
  sim->add_option("--n", n, "RAPSK ring count N");
  sim->add_option("--k", k, "RAPSK points per ring K");
  sim->add_option("--r0", r0, "RAPSK innermost radius");
  sim->add_option("--m", qam_m, "QAM size (even power of two)");
  sim->add_option("--snr-start", cfg.snr_start, "sweep start, dB")->required();
  sim->add_option("--snr-stop", cfg.snr_stop, "sweep stop, dB")->required();
  sim->add_option("--snr-step", cfg.snr_step, "sweep step, dB");
  sim->add_option("--kappa-phi", kappa_str, "phase-noise concentration or inf");
  sim->add_option("--trials", cfg.max_trials, "max channel symbols per point");
  sim->add_option("--target-errors", cfg.target_errors,
                  "early-stop error count (0 = never)");
  sim->add_option("--t", cfg.block_len, "symbols per codeword (coded mode)");
  sim->add_option("--seed", cfg.seed, "master seed");
  sim->add_option("--angular-model", model_str, "paper|smooth|highsnr");
  sim->add_option("--workers", cfg.workers, "parallel batch workers");
  sim->add_option("--rule", rule_str, "rate rule (coded mode)");
  sim->add_option("--margin", cfg.margin, "rate quantization back-off");
  sim->add_option("--rates", rates_str,
                  "override quantized rates, e.g. 1/2,2/3,8/9,... per level");
  sim->add_option("--design-snr", design_snr,
                  "SNR the code rates are designed at (default: midpoint)");
  sim->add_flag("--timing", cfg.timing,
                "record real wall_seconds (breaks byte determinism)");
  sim->add_option("--out", out_path, "CSV output path (- for stdout)");
  sim->add_option("--json", sim_json_path, "also write rows as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (geo->parsed()) {
    rapsk::RapskConstellation c({n, k, r0});
    std::printf("RAPSK N=%d K=%d r0=%g\n", n, k, r0);
    std::printf("spacing d      %.12g\n", c.spacing());
    std::printf("mean power     %.15g\n", c.power());
    std::printf("papr           %.12g\n", c.papr());
    if (c.rings() >= 2)
      std::printf("papr limit     %.12g (d/r0 -> inf)\n",
                  rapsk::papr_limit(c.rings()));
    if (!json_path.empty()) write_text(json_path, geometry_json(c).dump(2) + "\n");
    return 0;
  }

  if (rd->parsed()) {
    rapsk::RapskConstellation c({n, k, r0});
    const rapsk::ChannelParams p = rapsk::ChannelParams::from_snr_db(
        snr_db, parse_kappa(kappa_str), parse_model(model_str));
    rapsk::RateDesign d = rapsk::quantize_rates(
        rapsk::design_rates(c, p, parse_rule(rule_str)), margin);
    std::printf("level  domain   p_i          proposed  quantized\n");
    for (const auto& ld : d.levels)
      std::printf("%-6d %-8s %-12.5g %-9.5f %d/%d\n", ld.level,
                  ld.radial ? "radial" : "angular", ld.mean_error_prob,
                  ld.proposed_rate, ld.quantized_rate.num,
                  ld.quantized_rate.den);
    std::printf("overall proposed %.5f quantized %.5f\n", d.overall_proposed,
                d.overall_quantized);
    if (!json_path.empty()) write_text(json_path, design_json(d).dump(2) + "\n");
    return 0;
  }

  // simulate
  cfg.mode = mode_str == "coded" ? rapsk::SimMode::CodedBer
                                 : rapsk::SimMode::UncodedSer;
  if (mode_str != "coded" && mode_str != "uncoded")
    throw CLI::ValidationError("--mode: uncoded|coded");
  if (family_str == "qam")
    cfg.family = rapsk::Family::Qam;
  else if (family_str == "rapsk")
    cfg.family = rapsk::Family::Rapsk;
  else
    throw CLI::ValidationError("--family: rapsk|qam");
  cfg.rapsk = {n, k, r0};
  cfg.qam_m = qam_m;
  cfg.kappa_phi = parse_kappa(kappa_str);
  cfg.angular_model = parse_model(model_str);
  cfg.rule = parse_rule(rule_str);
  cfg.design_snr_db = design_snr;
  if (!rates_str.empty()) cfg.rate_overrides = parse_rates(rates_str);

  const std::vector<rapsk::ResultRow> rows = rapsk::run_sim(cfg);
  write_text(out_path, rapsk::csv_string(rows));
  if (!sim_json_path.empty()) {
    std::ostringstream ss;
    rapsk::write_json(rows, ss);
    write_text(sim_json_path, ss.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
