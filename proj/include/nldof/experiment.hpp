#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nldof/channel.hpp"
#include "nldof/conditions.hpp"
#include "nldof/decoder.hpp"
#include "nldof/signal.hpp"

namespace nldof {

struct QamParams {
  /// Upper bound on bits per complex coordinate; the SNR rule may pick fewer.
  int bits_per_dim = 2;
  double delta = 0.1;
  /// Jacobian floor; calibrated from the configuration when absent.
  std::optional<double> sigma0;
};

struct ExperimentConfig {
  ChannelDims dims;
  /// Effective transmit antennas; M* when absent.
  std::optional<int> m;
  /// Correlation basis file; Fourier rows when absent.
  std::optional<std::filesystem::path> a_file;
  std::uint64_t seed = 1;
  int trials = 100;
  std::vector<double> snr_grid_db;
  QamParams qam;
  /// Worker threads; 0 means hardware concurrency. Always capped by NLDOF_THREADS.
  int workers = 0;

  int effective_m() const;
  void validate() const;
};

CorrelationBasis resolve_basis(const ExperimentConfig& cfg);

/// Thrown when a run is refused because the recovery conditions fail.
class ConditionsRefused : public std::runtime_error {
 public:
  explicit ConditionsRefused(ConditionsReport report);
  const ConditionsReport& report() const { return report_; }

 private:
  ConditionsReport report_;
};

/// Threads to use: `requested` (or hardware concurrency when 0), capped by NLDOF_THREADS.
int worker_count(int requested);

/// Evaluates fn(0..n-1) on `workers` threads; results are stored by index, so the
/// output never depends on scheduling.
template <class Result>
std::vector<Result> parallel_map(int n, int workers, const std::function<Result(int)>& fn) {
  std::vector<Result> out(static_cast<std::size_t>(std::max(n, 0)));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto drain = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        out[static_cast<std::size_t>(i)] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  const int threads = std::clamp(workers, 1, std::max(n, 1));
  if (threads == 1) {
    drain();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(drain);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

inline constexpr double kExactRecoveryTol = 1e-8;

struct NoiselessTrial {
  RecoveryStatus status = RecoveryStatus::ok;
  /// max |c_hat - c| / max |c|; +inf when decoding failed.
  double rel_err = 0.0;
  double det_j_abs = 0.0;
  double det_j_ratio = 0.0;

  bool operator==(const NoiselessTrial&) const = default;
};

struct NoiselessSummary {
  int trials = 0;
  double max_err = 0.0;
  int pass_count = 0;
  double min_det_j_abs = 0.0;
  double min_det_j_ratio = 0.0;
  int decode_failures = 0;
};

/// Trial k draws coordinates uniformly in the unit box [-1, 1]^2 from
/// Rng(derive_seed(seed, k)), then fading, then decodes the noiseless block.
std::vector<NoiselessTrial> noiseless_trials(const ExperimentConfig& cfg, const CorrelationBasis& basis,
                                             int workers);
NoiselessSummary summarize(const std::vector<NoiselessTrial>& trials);

/// Refuses with ConditionsRefused unless every recovery condition passes.
NoiselessSummary run_noiseless_suite(const ExperimentConfig& cfg, const CorrelationBasis& basis);
NoiselessSummary run_noiseless_suite(const ExperimentConfig& cfg);

nlohmann::json to_json(const NoiselessSummary& summary);

/// Constellation used at one SNR point: d = 1 / (sigma0 snr^(1/2 - delta)) sets
/// 2/d levels per axis, rounded down to a power of two and clamped to
/// [2, 2^(max_bits/2)]; the spacing is then 2 / levels so the grid fills the unit box.
QamScheme scheme_for_snr(double snr_db, const QamParams& params, double sigma0);

struct SweepRow {
  double snr_db = 0.0;
  int trials = 0;
  double ser = 0.0;
  double ber = 0.0;
  /// Mean |c_hat - c| over coordinates of successfully decoded trials (before snapping).
  double mean_coord_err = 0.0;
  double decode_failure_rate = 0.0;
  long long bits_per_block = 0;
  int bits_per_dim = 0;
  double d_min_x = 0.0;

  bool operator==(const SweepRow&) const = default;
};

struct SweepResult {
  double sigma0 = 0.0;
  std::vector<SweepRow> rows;
};

/// Every SNR point reuses trial k's seed derive_seed(seed, k), so points differ only in
/// noise level (and constellation, when the rule changes it). Failed decodes count every
/// symbol and bit of the block as an error.
SweepResult run_snr_sweep(const ExperimentConfig& cfg, const CorrelationBasis& basis);
SweepResult run_snr_sweep(const ExperimentConfig& cfg);

inline constexpr const char* kSweepCsvHeader = "snr_db,trials,ser,mean_coord_err,decode_failure_rate,bits_per_block";

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Central differences of a holomorphic map f: C^n -> C^k (k x n result).
ComplexMatrix finite_difference_jacobian(const std::function<ComplexVector(const ComplexVector&)>& f,
                                         const ComplexVector& x0, double step = 1e-6);

/// The coordinate chart of the output manifold: coordinates -> core -> F_A(X) ->
/// the free (non-identity) entries of its canonical form, flattened column-major.
ComplexVector rref_chart(const CorrelationBasis& basis, const ComplexVector& coords, int m);

struct Sigma0Calibration {
  double sigma0 = 0.0;
  int samples = 0;
  int excluded = 0;
  std::vector<double> smallest_sv;
};

/// Smallest singular value of the finite-difference Jacobian of rref_chart at
/// `samples` random coordinate points; sigma0 is their 1st percentile. Points with a
/// singular value below 1e-12 (or a failed canonicalization) are excluded and counted.
Sigma0Calibration calibrate_sigma0(const ExperimentConfig& cfg, const CorrelationBasis& basis, int samples);

}  // namespace nldof
