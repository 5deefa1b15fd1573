#include "nldof/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "nldof/errors.hpp"

namespace nldof::cli {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

const char* flag(bool b) { return b ? "true" : "false"; }

template <class T>
T required_field(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw InvalidInput(std::string("config is missing \"") + key + "\"");
  return doc.at(key).get<T>();
}

std::vector<double> parse_snr_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
               item.end());
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw InvalidInput("--snr: cannot parse \"" + item + "\" as dB value");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidInput("--snr: empty list");
  return out;
}

struct Flags {
  int nt = 0, nr = 0, q = 0, t = 0, m = 0, trials = 0;
  std::uint64_t seed = 0;
  std::string snr, a_file, out, config;

  CLI::Option* o_nt = nullptr;
  CLI::Option* o_nr = nullptr;
  CLI::Option* o_q = nullptr;
  CLI::Option* o_t = nullptr;
  CLI::Option* o_m = nullptr;
  CLI::Option* o_trials = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_snr = nullptr;
  CLI::Option* o_a_file = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_config = nullptr;

  void attach(CLI::App& app) {
    o_nt = app.add_option("--nt", nt, "Transmit antennas");
    o_nr = app.add_option("--nr", nr, "Receive antennas");
    o_q = app.add_option("--q", q, "Correlation rank Q");
    o_t = app.add_option("--t", t, "Block length T");
    o_m = app.add_option("--m", m, "Effective transmit antennas (default M*)");
    o_seed = app.add_option("--seed", seed, "Base seed");
    o_trials = app.add_option("--trials", trials, "Monte Carlo trials");
    o_snr = app.add_option("--snr", snr, "Comma-separated SNR grid in dB");
    o_a_file = app.add_option("--a-file", a_file, "Correlation basis JSON file");
    o_out = app.add_option("--out", out, "Output file");
    o_config = app.add_option("--config", config, "Config JSON file (nldof-config-v1)");
  }

  bool has(const CLI::Option* o) const { return o->count() > 0; }
};

// Config file first, then flags on top.
ExperimentConfig resolve_config(const Flags& f, bool need_dims) {
  ExperimentConfig cfg;
  bool dims_from_file = false;
  if (f.has(f.o_config)) {
    cfg = load_config(f.config);
    dims_from_file = true;
  }
  if (need_dims && !dims_from_file) {
    for (auto [opt, name] : {std::pair{f.o_nt, "--nt"}, {f.o_nr, "--nr"}, {f.o_q, "--q"}, {f.o_t, "--t"}}) {
      if (!f.has(opt)) throw InvalidInput(std::string("missing ") + name + " (or --config)");
    }
  }
  if (f.has(f.o_nt)) cfg.dims.n_t = f.nt;
  if (f.has(f.o_nr)) cfg.dims.n_r = f.nr;
  if (f.has(f.o_q)) cfg.dims.q = f.q;
  if (f.has(f.o_t)) cfg.dims.t = f.t;
  if (f.has(f.o_m)) cfg.m = f.m;
  if (f.has(f.o_seed)) cfg.seed = f.seed;
  if (f.has(f.o_trials)) cfg.trials = f.trials;
  if (f.has(f.o_snr)) cfg.snr_grid_db = parse_snr_list(f.snr);
  if (f.has(f.o_a_file)) cfg.a_file = std::filesystem::path(f.a_file);
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InvalidInput("cannot write output file: " + path);
  file << text;
}

void print_conditions(std::ostream& out, const ConditionsReport& r) {
  out << "m_le_nt=" << flag(r.m_le_nt) << '\n'
      << "mq_le_nr=" << flag(r.mq_le_nr) << '\n'
      << "mq1_le_t=" << flag(r.mq1_le_t) << '\n'
      << "genericity=" << flag(r.genericity.pass) << '\n';
  if (r.genericity.evaluated) {
    out << "worst_subset={";
    for (std::size_t i = 0; i < r.genericity.worst_subset.size(); ++i) {
      out << (i ? "," : "") << r.genericity.worst_subset[i];
    }
    out << "}\n"
        << "worst_min_sv=" << fmt(r.genericity.worst_min_sv) << '\n'
        << "worst_ratio=" << fmt(r.genericity.worst_ratio) << '\n';
    if (!r.genericity.pass) {
      out << "note=genericity is sufficient, not necessary; failing it does not prove the block is unrecoverable\n";
    }
  } else {
    out << "note=genericity not evaluated because M(Q+1) > T\n";
  }
  out << "all_pass=" << flag(r.all_pass) << '\n';
}

int cmd_dof(const Flags& f, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(f, true);
  const DofResult dof = compute_dof(cfg.dims);
  out << "regime=" << to_string(dof.regime) << '\n'
      << "m_star=" << dof.m_star << '\n'
      << "dof_per_symbol=" << fmt(dof.dof_per_symbol) << '\n'
      << "dof_per_block=" << fmt(dof.dof_per_block) << '\n';
  if (dof.regime == DofRegime::simo_small_nr) {
    out << "note=n_r < Q: formula only, no encoder/decoder is provided for this regime\n";
  }
  if (f.has(f.o_out)) write_text(f.out, to_json(dof, cfg.dims).dump(2) + "\n");
  return kSuccess;
}

int cmd_check_a(const Flags& f, std::ostream& out) {
  ExperimentConfig cfg = resolve_config(f, false);
  if (!cfg.a_file) throw InvalidInput("check-a needs --a-file (or a_file in the config)");
  const ComplexMatrix a = read_basis_file(*cfg.a_file);
  if (!f.has(f.o_q) && !f.has(f.o_config)) cfg.dims.q = static_cast<int>(a.rows());
  if (!f.has(f.o_t) && !f.has(f.o_config)) cfg.dims.t = static_cast<int>(a.cols());
  const bool antennas_given = f.has(f.o_config) || (f.has(f.o_nt) && f.has(f.o_nr));
  int m = cfg.m.value_or(1);
  if (!cfg.m && antennas_given && cfg.dims.n_r >= cfg.dims.q) m = compute_mstar(cfg.dims);
  // Without antenna counts only the A-dependent checks carry information.
  if (!f.has(f.o_config)) {
    if (!f.has(f.o_nt)) cfg.dims.n_t = m;
    if (!f.has(f.o_nr)) cfg.dims.n_r = m * cfg.dims.q;
  }
  const CorrelationBasis basis = validate_correlation_basis(a, cfg.dims);
  const ConditionsReport report = check_recovery_conditions(cfg.dims, m, basis);
  out << "m=" << m << '\n';
  print_conditions(out, report);
  if (f.has(f.o_out)) {
    nlohmann::json doc = to_json(report);
    doc["m"] = m;
    doc["dims"] = {{"nt", cfg.dims.n_t}, {"nr", cfg.dims.n_r}, {"q", cfg.dims.q}, {"t", cfg.dims.t}};
    write_text(f.out, doc.dump(2) + "\n");
  }
  return report.all_pass ? kSuccess : kAnalysisNegative;
}

int refused(const Flags& f, const ExperimentConfig& cfg, const ConditionsRefused& ex, std::ostream& out,
            std::ostream& err) {
  err << "refused: " << ex.what() << '\n';
  print_conditions(out, ex.report());
  if (f.has(f.o_out)) {
    nlohmann::json doc;
    doc["config"] = to_json(cfg);
    doc["refused"] = true;
    doc["conditions"] = to_json(ex.report());
    write_text(f.out, doc.dump(2) + "\n");
  }
  return kAnalysisNegative;
}

int cmd_simulate(const Flags& f, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = resolve_config(f, true);
  cfg.validate();
  try {
    const NoiselessSummary summary = run_noiseless_suite(cfg);
    nlohmann::json doc;
    doc["config"] = to_json(cfg);
    doc["summary"] = to_json(summary);
    const std::string text = doc.dump(2) + "\n";
    if (f.has(f.o_out)) {
      write_text(f.out, text);
      out << "trials=" << summary.trials << '\n'
          << "pass_count=" << summary.pass_count << '\n'
          << "max_err=" << fmt(summary.max_err) << '\n'
          << "min_det_j_abs=" << fmt(summary.min_det_j_abs) << '\n'
          << "min_det_j_ratio=" << fmt(summary.min_det_j_ratio) << '\n'
          << "decode_failures=" << summary.decode_failures << '\n';
    } else {
      out << text;
    }
    return kSuccess;
  } catch (const ConditionsRefused& ex) {
    return refused(f, cfg, ex, out, err);
  }
}

int cmd_sweep(const Flags& f, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = resolve_config(f, true);
  cfg.validate();
  if (cfg.snr_grid_db.empty()) throw InvalidInput("sweep-snr needs --snr (or snr_db in the config)");
  try {
    const SweepResult result = run_snr_sweep(cfg);
    std::ostringstream csv;
    write_sweep_csv(csv, result.rows);
    if (f.has(f.o_out)) {
      write_text(f.out, csv.str());
      nlohmann::json doc;
      doc["config"] = to_json(cfg);
      doc["sigma0"] = result.sigma0;
      auto rows = nlohmann::json::array();
      for (const SweepRow& r : result.rows) {
        rows.push_back({{"snr_db", r.snr_db},
                        {"trials", r.trials},
                        {"ser", r.ser},
                        {"ber", r.ber},
                        {"mean_coord_err", r.mean_coord_err},
                        {"decode_failure_rate", r.decode_failure_rate},
                        {"bits_per_block", r.bits_per_block},
                        {"bits_per_dim", r.bits_per_dim},
                        {"d_min_x", r.d_min_x}});
      }
      doc["rows"] = std::move(rows);
      write_text(f.out + ".json", doc.dump(2) + "\n");
      out << "sigma0=" << fmt(result.sigma0) << '\n' << csv.str();
    } else {
      out << csv.str();
    }
    return kSuccess;
  } catch (const ConditionsRefused& ex) {
    return refused(f, cfg, ex, out, err);
  }
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file: " + path.string());
  try {
    nlohmann::json doc;
    in >> doc;
    const auto version = required_field<std::string>(doc, "version");
    if (version != kConfigVersion) {
      throw InvalidInput("unsupported config version \"" + version + "\" (expected " + kConfigVersion + ")");
    }
    ExperimentConfig cfg;
    cfg.dims.n_t = required_field<int>(doc, "nt");
    cfg.dims.n_r = required_field<int>(doc, "nr");
    cfg.dims.q = required_field<int>(doc, "q");
    cfg.dims.t = required_field<int>(doc, "t");
    if (doc.contains("m") && !doc.at("m").is_null()) cfg.m = doc.at("m").get<int>();
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("trials")) cfg.trials = doc.at("trials").get<int>();
    if (doc.contains("snr_db")) cfg.snr_grid_db = doc.at("snr_db").get<std::vector<double>>();
    if (doc.contains("a_file") && !doc.at("a_file").is_null()) {
      std::filesystem::path a = doc.at("a_file").get<std::string>();
      cfg.a_file = a.is_relative() ? path.parent_path() / a : a;
    }
    if (doc.contains("qam")) {
      const auto& qam = doc.at("qam");
      if (qam.contains("bits_per_dim")) cfg.qam.bits_per_dim = qam.at("bits_per_dim").get<int>();
      if (qam.contains("delta")) cfg.qam.delta = qam.at("delta").get<double>();
      if (qam.contains("sigma0") && !qam.at("sigma0").is_null()) cfg.qam.sigma0 = qam.at("sigma0").get<double>();
    }
    return cfg;
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidInput("malformed config file " + path.string() + ": " + ex.what());
  }
}

nlohmann::json to_json(const ConditionsReport& report) {
  nlohmann::json g;
  g["evaluated"] = report.genericity.evaluated;
  g["pass"] = report.genericity.pass;
  g["worst_subset"] = report.genericity.worst_subset;
  g["worst_min_sv"] = report.genericity.worst_min_sv;
  g["worst_ratio"] = report.genericity.worst_ratio;
  g["subsets_checked"] = report.genericity.subsets_checked;
  return {{"m_le_nt", report.m_le_nt},
          {"mq_le_nr", report.mq_le_nr},
          {"mq1_le_t", report.mq1_le_t},
          {"genericity", std::move(g)},
          {"all_pass", report.all_pass}};
}

nlohmann::json to_json(const DofResult& dof, const ChannelDims& dims) {
  return {{"dims", {{"nt", dims.n_t}, {"nr", dims.n_r}, {"q", dims.q}, {"t", dims.t}}},
          {"regime", to_string(dof.regime)},
          {"m_star", dof.m_star},
          {"dof_per_symbol", dof.dof_per_symbol},
          {"dof_per_block", dof.dof_per_block}};
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["version"] = kConfigVersion;
  j["nt"] = cfg.dims.n_t;
  j["nr"] = cfg.dims.n_r;
  j["q"] = cfg.dims.q;
  j["t"] = cfg.dims.t;
  j["m"] = cfg.m ? nlohmann::json(*cfg.m) : nlohmann::json(nullptr);
  j["seed"] = cfg.seed;
  j["trials"] = cfg.trials;
  j["snr_db"] = cfg.snr_grid_db;
  j["a_file"] = cfg.a_file ? nlohmann::json(cfg.a_file->string()) : nlohmann::json(nullptr);
  j["qam"] = {{"bits_per_dim", cfg.qam.bits_per_dim},
              {"delta", cfg.qam.delta},
              {"sigma0", cfg.qam.sigma0 ? nlohmann::json(*cfg.qam.sigma0) : nlohmann::json(nullptr)}};
  return j;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlinear degrees-of-freedom toolkit for correlatively changing MIMO fading channels", "nldof"};
  app.require_subcommand(1);
  CLI::App* dof = app.add_subcommand("dof", "Achievable degrees of freedom for (n_t, n_r, Q, T)");
  CLI::App* check_a = app.add_subcommand("check-a", "Recovery conditions and genericity of a correlation basis");
  CLI::App* simulate = app.add_subcommand("simulate", "Noiseless exact-recovery Monte Carlo suite");
  CLI::App* sweep = app.add_subcommand("sweep-snr", "SER / coordinate error versus SNR");
  // One flag set per subcommand: option counts are tracked per CLI::Option.
  Flags dof_flags, check_flags, simulate_flags, sweep_flags;
  dof_flags.attach(*dof);
  check_flags.attach(*check_a);
  simulate_flags.attach(*simulate);
  sweep_flags.attach(*sweep);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << '\n';
    return kUsageError;
  }

  try {
    if (dof->parsed()) return cmd_dof(dof_flags, out);
    if (check_a->parsed()) return cmd_check_a(check_flags, out);
    if (simulate->parsed()) return cmd_simulate(simulate_flags, out, err);
    return cmd_sweep(sweep_flags, out, err);
  } catch (const InvalidInput& ex) {
    err << "error: " << ex.what() << '\n';
  } catch (const DegenerateBasis& ex) {
    err << "error: " << ex.what() << '\n';
  } catch (const RegimeError& ex) {
    err << "error: " << ex.what() << '\n';
  } catch (const LimitError& ex) {
    err << "error: " << ex.what() << '\n';
  }
  return kUsageError;
}

}  // namespace nldof::cli
