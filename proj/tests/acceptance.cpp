// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nldof/cli.hpp"
#include "nldof/conditions.hpp"
#include "nldof/decoder.hpp"
#include "nldof/errors.hpp"
#include "nldof/experiment.hpp"
#include "nldof/mapping.hpp"

using namespace nldof;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ChannelDims dims_of(int n_t, int n_r, int q, int t) { return ChannelDims{n_t, n_r, t, q}; }

const ChannelDims kMain = dims_of(2, 4, 2, 8);

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ComplexVector box_coords(Rng& rng, Index n) {
  ComplexVector c(n);
  for (Index i = 0; i < n; ++i) c(i) = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
  return c;
}

TransmitBlock random_block(Rng& rng, const ChannelDims& dims, int m) {
  return build_transmit_block(MessageCoordinates{m, box_coords(rng, coordinate_count(m, dims.t))}, dims, m);
}

Outcome dof_table() {
  struct Row {
    ChannelDims dims;
    double expected;
  };
  const std::vector<Row> rows = {{dims_of(2, 4, 2, 8), 1.5},
                                 {dims_of(4, 4, 1, 8), 2.0},
                                 {dims_of(3, 7, 3, 100), 2.0 * (1.0 - 2.0 / 100.0)},
                                 {dims_of(2, 1, 3, 12), 0.75}};
  double worst = 0.0;
  for (const Row& r : rows) worst = std::max(worst, std::abs(compute_dof(r.dims).dof_per_symbol - r.expected));
  const bool simo = compute_dof(rows[3].dims).regime == DofRegime::simo_small_nr;
  return {worst <= 1e-12 && simo, "max |error| " + num(worst) + " over 4 configs"};
}

Outcome noiseless_recovery() {
  ExperimentConfig cfg;
  cfg.dims = kMain;
  cfg.m = 2;
  cfg.seed = 20240601;
  cfg.trials = 1000;
  const auto start = std::chrono::steady_clock::now();
  const NoiselessSummary s = run_noiseless_suite(cfg);
  const double secs = seconds_since(start);
  return {s.pass_count == 1000 && s.max_err < 1e-8 && secs < 60.0,
          std::to_string(s.pass_count) + "/1000 recovered, max rel err " + num(s.max_err) + ", " + num(secs) + " s"};
}

Outcome scalar_case() {
  Rng rng(3);
  double worst = 0.0;
  int checked = 0;
  for (int t = 2; t <= 5; ++t) {
    const ChannelDims dims = dims_of(1, 1, 1, t);
    const CorrelationBasis basis = validate_correlation_basis(ComplexMatrix::Ones(1, t), dims);
    for (int draw = 0; draw < 25; ++draw) {
      const TransmitBlock block = random_block(rng, dims, 1);
      const Complex x1 = block.x_tilde()(0, 0);
      const SubspaceRREF b = canonical_rref(fa_subspace(basis, block).span);
      const JMatrix j = build_j(basis, b, 1);
      const ComplexMatrix x_first = nonlinear_phase(j, basis, 1);
      worst = std::max({worst, std::abs(j.j(0, 0) - 1.0 / x1) * std::abs(x1), std::abs(x_first(0, 0) - x1)});
      const FadingState fading = sample_fading(basis, 1, 1, rng);
      const RecoveryReport r = decode_block(NoisyBlock{apply_channel(block.transmitted(), fading), kInf}, basis, 1);
      if (!r.ok()) return {false, "decode failed: " + r.detail};
      worst = std::max(worst, (r.x_tilde_hat - block.x_tilde()).cwiseAbs().maxCoeff());
      ++checked;
    }
  }
  return {worst < 1e-12, std::to_string(checked) + " draws, max error " + num(worst)};
}

Outcome subspace_dimension() {
  Rng rng(4);
  const CorrelationBasis basis = fourier_basis(kMain);
  double worst_gap = kInf;
  int rank_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const TransmitBlock block = random_block(rng, kMain, 2);
    const FaSubspace fa = fa_subspace(basis, block);
    rank_ok += rank_with_tol(fa.basis.r) == 4;
    // Eight receive antennas observe more rows than MQ; the fifth singular value must vanish.
    const FadingState fading = sample_fading(basis, 2, 8, rng);
    const Eigen::VectorXd sv = singular_values(apply_channel(block.transmitted(), fading));
    worst_gap = std::min(worst_gap, sv(3) / std::max(sv(4), std::numeric_limits<double>::min()));
  }
  return {rank_ok == 100 && worst_gap > 1e6,
          std::to_string(rank_ok) + "/100 blocks rank 4, min gap ratio " + num(worst_gap)};
}

Outcome genericity() {
  const GenericityResult fourier = check_genericity(fourier_basis(kMain), 2);
  ComplexMatrix dup = fourier_rows(2, 8);
  dup.col(1) = dup.col(0);
  const GenericityResult bad = check_genericity(validate_correlation_basis(dup, kMain), 2);
  const bool named = !bad.pass && bad.worst_subset == std::vector<int>{1, 2};

  Rng rng(5);
  const CorrelationBasis basis = fourier_basis(kMain);
  double min_ratio = kInf;
  for (int trial = 0; trial < 1000; ++trial) {
    const TransmitBlock block = random_block(rng, kMain, 2);
    min_ratio = std::min(min_ratio, build_j(basis, canonical_rref(fa_subspace(basis, block).span), 2).det_ratio);
  }
  return {fourier.pass && fourier.subsets_checked == 15 && named && min_ratio > 1e-12,
          "Fourier " + std::to_string(fourier.subsets_checked) + " subsets " + (fourier.pass ? "pass" : "fail") +
              ", duplicate names {" + (bad.worst_subset.size() == 2
                                           ? std::to_string(bad.worst_subset[0]) + "," + std::to_string(bad.worst_subset[1])
                                           : std::string("?")) +
              "}, min |det J| ratio " + num(min_ratio)};
}

double covariance_error(const CorrelationBasis& basis, std::uint64_t seed) {
  Rng rng(seed);
  ComplexMatrix acc = ComplexMatrix::Zero(basis.t(), basis.t());
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const Eigen::RowVectorXcd h = sample_fading(basis, 1, 1, rng).h().row(0);
    acc += h.adjoint() * h;
  }
  const ComplexMatrix k = basis.covariance();
  return (acc / static_cast<double>(draws) - k).norm() / k.norm();
}

Outcome whitening() {
  Rng rng(6);
  const ChannelDims dims = dims_of(1, 1, 3, 7);
  const double fourier = covariance_error(fourier_basis(kMain), 61);
  const double random = covariance_error(validate_correlation_basis(sample_complex_gaussian(rng, 3, 7), dims), 62);
  return {fourier < 0.05 && random < 0.05, "relative Frobenius error Fourier " + num(fourier) + ", random " + num(random)};
}

Outcome rref_properties() {
  Rng rng(7);
  bool idempotent = true;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ComplexMatrix r = sample_complex_gaussian(rng, 4, 8);
    const SubspaceRREF once = canonical_rref(Subspace(r));
    idempotent = idempotent && canonical_rref(once.as_subspace()).b() == once.b();
    const ComplexMatrix left = sample_complex_gaussian(rng, 4, 4);
    worst = std::max(worst, (canonical_rref(Subspace(left * r)).b() - once.b()).cwiseAbs().maxCoeff());
  }
  return {idempotent && worst < 1e-10,
          std::string("idempotent ") + (idempotent ? "exactly" : "NOT exactly") + ", max basis-change deviation " +
              num(worst)};
}

Outcome snr_sweep() {
  ExperimentConfig cfg;
  cfg.dims = kMain;
  cfg.seed = 1;
  cfg.trials = 10000;
  cfg.snr_grid_db = {10.0, 20.0, 30.0, 40.0};
  cfg.qam.bits_per_dim = 2;
  const auto start = std::chrono::steady_clock::now();
  const SweepResult r = run_snr_sweep(cfg);
  const double secs = seconds_since(start);
  int inversions = 0;
  bool bits_ok = true;
  std::string sers;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const SweepRow& row = r.rows[i];
    if (i > 0) inversions += row.ser > r.rows[i - 1].ser;
    bits_ok = bits_ok && row.bits_per_dim == 2 && row.bits_per_block == 2LL * (8 - 2) * row.bits_per_dim;
    sers += (i ? " " : "") + num(row.ser);
  }
  const double ser40 = r.rows.back().ser;
  return {inversions <= 1 && ser40 < 1e-2 && bits_ok && secs < 600.0,
          "SER at 10/20/30/40 dB: " + sers + " (" + std::to_string(inversions) + " inversions, target < 0.01 at 40 dB)" +
              ", bits_per_block " + (bits_ok ? "ok" : "wrong") + ", " + num(secs) + " s"};
}

Outcome jacobians() {
  Rng rng(9);
  const CorrelationBasis basis = fourier_basis(kMain);
  const TransmitBlock block = random_block(rng, kMain, 2);
  const SubspaceRREF b = canonical_rref(fa_subspace(basis, block).span);
  const int mq = 4;
  double worst = 0.0;
  for (int t = 6; t < 8; ++t) {
    const auto step = [&](const ComplexVector& flat) {
      const ComplexMatrix x_first = flat.reshaped(2, mq);
      return ComplexVector(linear_phase(basis, b, x_first, t));
    };
    const ComplexVector x0 = block.x_tilde().leftCols(mq).reshaped();
    const ComplexMatrix fd = finite_difference_jacobian(step, x0);
    const ComplexVector w = basis.a().row(0).head(mq).transpose().cwiseProduct(b.b().col(t)) / basis.a()(0, t);
    ComplexMatrix analytic = ComplexMatrix::Zero(2, 2 * mq);
    for (int m = 0; m < 2; ++m) {
      for (int k = 0; k < mq; ++k) analytic(m, k * 2 + m) = w(k);
    }
    worst = std::max(worst, (fd - analytic).cwiseAbs().maxCoeff());
  }
  ExperimentConfig cfg;
  cfg.dims = kMain;
  const double sigma0 = calibrate_sigma0(cfg, basis, 100).sigma0;
  return {worst < 1e-6 && sigma0 > 0.0, "linear-phase Jacobian error " + num(worst) + ", sigma0 " + num(sigma0)};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("nldof_accept_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  write_basis_file(dir / "a.json", fourier_rows(2, 8));
  const std::vector<std::string> common = {"--nt", "2", "--nr", "4", "--q", "2", "--t", "8", "--seed", "42"};
  struct Case {
    std::string name;
    std::vector<std::string> args;
    std::vector<std::string> files;
  };
  const std::vector<Case> cases = {
      {"dof", {"dof"}, {"out"}},
      {"check-a", {"check-a", "--a-file", (dir / "a.json").string()}, {"out"}},
      {"simulate", {"simulate", "--trials", "300"}, {"out"}},
      {"sweep-snr", {"sweep-snr", "--trials", "300", "--snr", "10,20,30"}, {"out", "out.json"}}};
  int identical = 0;
  std::string broken;
  for (const Case& c : cases) {
    std::vector<std::string> seen;
    for (int run = 0; run < 2; ++run) {
      const fs::path out = dir / (c.name + std::to_string(run));
      std::vector<std::string> args = c.args;
      args.insert(args.end(), common.begin(), common.end());
      args.insert(args.end(), {"--out", out.string()});
      std::ostringstream console, err;
      const int code = cli::run(args, console, err);
      std::string all = std::to_string(code) + "\n" + console.str();
      for (const std::string& f : c.files) all += slurp(f == "out" ? out : fs::path(out.string() + ".json"));
      seen.push_back(all);
    }
    if (seen[0] == seen[1] && !seen[0].empty()) {
      ++identical;
    } else {
      broken += " " + c.name;
    }
  }
  fs::remove_all(dir);
  return {identical == static_cast<int>(cases.size()),
          std::to_string(identical) + "/" + std::to_string(cases.size()) + " subcommands byte-identical" +
              (broken.empty() ? "" : " (differs:" + broken + ")")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"C1 DOF formula table", dof_table},
      {"C2 noiseless exact recovery", noiseless_recovery},
      {"C3 scalar worked case", scalar_case},
      {"C4 subspace dimension", subspace_dimension},
      {"C5 genericity checker", genericity},
      {"C6 whitening statistics", whitening},
      {"C7 canonical form properties", rref_properties},
      {"C8 SNR sweep", snr_sweep},
      {"C9 Jacobian checks", jacobians},
      {"C10 determinism", determinism}};
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& ex) {
      o = {false, std::string("threw: ") + ex.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
