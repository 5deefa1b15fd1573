#include "nldof/experiment.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>

#include "nldof/errors.hpp"
#include "nldof/mapping.hpp"

namespace nldof {

namespace {

// Seed stream for sigma0 calibration, kept apart from the per-trial streams.
constexpr std::uint64_t kCalibrationStream = 0x5157A0CA11B8A7E5ULL;

ComplexVector uniform_box_coords(Rng& rng, Index n) {
  ComplexVector c(n);
  for (Index i = 0; i < n; ++i) {
    const double re = 2.0 * rng.uniform() - 1.0;
    const double im = 2.0 * rng.uniform() - 1.0;
    c(i) = Complex(re, im);
  }
  return c;
}

void require_conditions(const ExperimentConfig& cfg, const CorrelationBasis& basis) {
  ConditionsReport report = check_recovery_conditions(cfg.dims, cfg.effective_m(), basis);
  if (!report.all_pass) throw ConditionsRefused(std::move(report));
}

std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct SweepTrial {
  long long symbol_errors = 0;
  long long bit_errors = 0;
  double coord_err_sum = 0.0;
  bool failed = false;
};

}  // namespace

int ExperimentConfig::effective_m() const { return m ? *m : compute_mstar(dims); }

void ExperimentConfig::validate() const {
  dims.validate();
  if (m && *m < 1) throw InvalidInput("M must be >= 1");
  if (trials < 1) throw InvalidInput("trials must be >= 1");
  if (workers < 0) throw InvalidInput("workers must be >= 0");
  if (qam.bits_per_dim < 2 || qam.bits_per_dim % 2 != 0 || qam.bits_per_dim > 30) {
    throw InvalidInput("bits_per_dim must be an even count in [2, 30]");
  }
  if (!(qam.delta > 0.0 && qam.delta < 0.5)) throw InvalidInput("delta must lie in (0, 1/2)");
  if (qam.sigma0 && !(*qam.sigma0 > 0.0)) throw InvalidInput("sigma0 must be positive");
  for (double db : snr_grid_db) {
    if (!std::isfinite(db)) throw InvalidInput("SNR grid values must be finite");
  }
}

CorrelationBasis resolve_basis(const ExperimentConfig& cfg) {
  if (cfg.a_file) return validate_correlation_basis(read_basis_file(*cfg.a_file), cfg.dims);
  return fourier_basis(cfg.dims);
}

ConditionsRefused::ConditionsRefused(ConditionsReport report)
    : std::runtime_error("recovery conditions do not hold for this configuration"), report_(std::move(report)) {}

int worker_count(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(n, 1);
  if (const char* env = std::getenv("NLDOF_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

std::vector<NoiselessTrial> noiseless_trials(const ExperimentConfig& cfg, const CorrelationBasis& basis,
                                             int workers) {
  const int m = cfg.effective_m();
  const Index n_coords = coordinate_count(m, cfg.dims.t);
  const std::function<NoiselessTrial(int)> run_trial = [&](int k) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(k)));
    const MessageCoordinates coords{m, uniform_box_coords(rng, n_coords)};
    const TransmitBlock block = build_transmit_block(coords, cfg.dims, m);
    const FadingState fading = sample_fading(basis, cfg.dims.n_t, cfg.dims.n_r, rng);
    const NoisyBlock y{apply_channel(block.transmitted(), fading), std::numeric_limits<double>::infinity()};
    const RecoveryReport report = decode_block(y, basis, m);

    NoiselessTrial trial;
    trial.status = report.status;
    trial.det_j_abs = report.det_j_abs;
    trial.det_j_ratio = report.det_j_ratio;
    if (report.ok()) {
      const double scale = coords.coords.cwiseAbs().maxCoeff();
      const double err = (report.coords_hat.coords - coords.coords).cwiseAbs().maxCoeff();
      trial.rel_err = scale > 0.0 ? err / scale : err;
    } else {
      trial.rel_err = std::numeric_limits<double>::infinity();
    }
    return trial;
  };
  return parallel_map<NoiselessTrial>(cfg.trials, workers, run_trial);
}

NoiselessSummary summarize(const std::vector<NoiselessTrial>& trials) {
  NoiselessSummary s;
  s.trials = static_cast<int>(trials.size());
  s.min_det_j_abs = std::numeric_limits<double>::infinity();
  s.min_det_j_ratio = std::numeric_limits<double>::infinity();
  for (const NoiselessTrial& t : trials) {
    s.max_err = std::max(s.max_err, t.rel_err);
    if (t.status == RecoveryStatus::ok && t.rel_err < kExactRecoveryTol) ++s.pass_count;
    if (t.status != RecoveryStatus::ok) ++s.decode_failures;
    if (std::isfinite(t.det_j_abs)) s.min_det_j_abs = std::min(s.min_det_j_abs, t.det_j_abs);
    if (std::isfinite(t.det_j_ratio)) s.min_det_j_ratio = std::min(s.min_det_j_ratio, t.det_j_ratio);
  }
  return s;
}

NoiselessSummary run_noiseless_suite(const ExperimentConfig& cfg, const CorrelationBasis& basis) {
  cfg.validate();
  require_conditions(cfg, basis);
  return summarize(noiseless_trials(cfg, basis, worker_count(cfg.workers)));
}

NoiselessSummary run_noiseless_suite(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_noiseless_suite(cfg, resolve_basis(cfg));
}

nlohmann::json to_json(const NoiselessSummary& summary) {
  nlohmann::json j;
  j["trials"] = summary.trials;
  j["max_err"] = summary.max_err;
  j["pass_threshold"] = kExactRecoveryTol;
  j["pass_count"] = summary.pass_count;
  j["min_det_j_abs"] = summary.min_det_j_abs;
  j["min_det_j_ratio"] = summary.min_det_j_ratio;
  j["decode_failures"] = summary.decode_failures;
  return j;
}

QamScheme scheme_for_snr(double snr_db, const QamParams& params, double sigma0) {
  const double d_rule = asymptotic_dmin(db_to_linear(snr_db), sigma0, params.delta);
  const double per_axis = 2.0 / d_rule;
  const int max_levels = 1 << (params.bits_per_dim / 2);
  int levels = 2;
  while (levels * 2 <= max_levels && levels * 2 <= per_axis) levels *= 2;
  QamScheme scheme;
  scheme.bits_per_dim = 2 * std::countr_zero(static_cast<unsigned>(levels));
  scheme.d_min_x = 2.0 / levels;
  scheme.delta = params.delta;
  scheme.sigma0 = sigma0;
  return scheme;
}

SweepResult run_snr_sweep(const ExperimentConfig& cfg, const CorrelationBasis& basis) {
  cfg.validate();
  if (cfg.snr_grid_db.empty()) throw InvalidInput("SNR sweep needs a non-empty SNR grid");
  require_conditions(cfg, basis);
  const int m = cfg.effective_m();
  const Index n_coords = coordinate_count(m, cfg.dims.t);
  const int workers = worker_count(cfg.workers);

  SweepResult result;
  result.sigma0 = cfg.qam.sigma0 ? *cfg.qam.sigma0 : calibrate_sigma0(cfg, basis, 100).sigma0;

  for (double snr_db : cfg.snr_grid_db) {
    const QamScheme scheme = scheme_for_snr(snr_db, cfg.qam, result.sigma0);
    const double snr = db_to_linear(snr_db);
    const std::size_t n_bits = static_cast<std::size_t>(n_coords) * scheme.bits_per_dim;

    const std::function<SweepTrial(int)> run_trial = [&](int k) {
      Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(k)));
      BitString bits(n_bits);
      for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_u64() >> 63);
      const MessageCoordinates coords{m, encode_qam(bits, scheme, n_coords)};
      const TransmitBlock block = build_transmit_block(coords, cfg.dims, m);
      const FadingState fading = sample_fading(basis, cfg.dims.n_t, cfg.dims.n_r, rng);
      const NoisyBlock y = add_awgn(apply_channel(block.transmitted(), fading), snr, rng);
      const RecoveryReport report = decode_block(y, basis, m);

      SweepTrial trial;
      if (!report.ok()) {
        trial.failed = true;
        trial.symbol_errors = n_coords;
        trial.bit_errors = static_cast<long long>(n_bits);
        return trial;
      }
      const auto sent = nearest_levels(coords.coords, scheme);
      const auto got = nearest_levels(report.coords_hat.coords, scheme);
      for (std::size_t i = 0; i < sent.size(); ++i) trial.symbol_errors += sent[i] != got[i];
      const BitString decoded = decode_qam(report.coords_hat.coords, scheme);
      for (std::size_t i = 0; i < n_bits; ++i) trial.bit_errors += decoded[i] != bits[i];
      trial.coord_err_sum = (report.coords_hat.coords - coords.coords).cwiseAbs().sum();
      return trial;
    };
    const std::vector<SweepTrial> trials = parallel_map<SweepTrial>(cfg.trials, workers, run_trial);

    long long symbol_errors = 0;
    long long bit_errors = 0;
    long long failures = 0;
    double coord_err = 0.0;
    for (const SweepTrial& t : trials) {
      symbol_errors += t.symbol_errors;
      bit_errors += t.bit_errors;
      failures += t.failed;
      coord_err += t.coord_err_sum;
    }
    const long long decoded = cfg.trials - failures;
    SweepRow row;
    row.snr_db = snr_db;
    row.trials = cfg.trials;
    row.ser = static_cast<double>(symbol_errors) / (static_cast<double>(cfg.trials) * n_coords);
    row.ber = static_cast<double>(bit_errors) / (static_cast<double>(cfg.trials) * n_bits);
    row.mean_coord_err = decoded > 0 ? coord_err / (static_cast<double>(decoded) * n_coords)
                                     : std::numeric_limits<double>::quiet_NaN();
    row.decode_failure_rate = static_cast<double>(failures) / cfg.trials;
    row.bits_per_dim = scheme.bits_per_dim;
    row.bits_per_block = static_cast<long long>(n_coords) * scheme.bits_per_dim;
    row.d_min_x = scheme.d_min_x;
    result.rows.push_back(row);
  }
  return result;
}

SweepResult run_snr_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_snr_sweep(cfg, resolve_basis(cfg));
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepCsvHeader << '\n';
  for (const SweepRow& r : rows) {
    out << format_g6(r.snr_db) << ',' << r.trials << ',' << format_g6(r.ser) << ',' << format_g6(r.mean_coord_err)
        << ',' << format_g6(r.decode_failure_rate) << ',' << r.bits_per_block << '\n';
  }
}

ComplexMatrix finite_difference_jacobian(const std::function<ComplexVector(const ComplexVector&)>& f,
                                         const ComplexVector& x0, double step) {
  const ComplexVector f0 = f(x0);
  ComplexMatrix jac(f0.size(), x0.size());
  for (Index k = 0; k < x0.size(); ++k) {
    const double h = step * std::max(1.0, std::abs(x0(k)));
    ComplexVector plus = x0;
    ComplexVector minus = x0;
    plus(k) += h;
    minus(k) -= h;
    jac.col(k) = (f(plus) - f(minus)) / (2.0 * h);
  }
  return jac;
}

ComplexVector rref_chart(const CorrelationBasis& basis, const ComplexVector& coords, int m) {
  const ComplexMatrix core = layout_core(coords, m, basis.q(), basis.t());
  const FaSubspace fa = fa_subspace(basis, core);
  const SubspaceRREF b = canonical_rref(fa.span);
  const Index mq = b.dim();
  const ComplexMatrix free = b.b().rightCols(basis.t() - mq);
  return free.reshaped();
}

Sigma0Calibration calibrate_sigma0(const ExperimentConfig& cfg, const CorrelationBasis& basis, int samples) {
  cfg.validate();
  if (samples < 1) throw InvalidInput("calibrate_sigma0: samples must be >= 1");
  require_conditions(cfg, basis);
  const int m = cfg.effective_m();
  const Index n_coords = coordinate_count(m, cfg.dims.t);
  const std::uint64_t base = derive_seed(cfg.seed, kCalibrationStream);

  const std::function<double(int)> smallest_sv = [&](int i) {
    Rng rng(derive_seed(base, static_cast<std::uint64_t>(i)));
    const ComplexVector coords = uniform_box_coords(rng, n_coords);
    try {
      const auto chart = [&](const ComplexVector& c) { return rref_chart(basis, c, m); };
      const Eigen::VectorXd sv = singular_values(finite_difference_jacobian(chart, coords));
      return sv(sv.size() - 1);
    } catch (const std::runtime_error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  const std::vector<double> raw = parallel_map<double>(samples, worker_count(cfg.workers), smallest_sv);

  Sigma0Calibration out;
  out.samples = samples;
  for (double v : raw) {
    if (std::isfinite(v) && v >= 1e-12) {
      out.smallest_sv.push_back(v);
    } else {
      ++out.excluded;
    }
  }
  if (out.smallest_sv.empty()) throw std::runtime_error("calibrate_sigma0: every sample had a degenerate Jacobian");
  std::vector<double> sorted = out.smallest_sv;
  std::sort(sorted.begin(), sorted.end());
  const auto idx = static_cast<std::size_t>(std::floor(0.01 * static_cast<double>(sorted.size() - 1)));
  out.sigma0 = sorted[idx];
  return out;
}

}  // namespace nldof
