#include "nldof/channel.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <json.hpp>

#include "nldof/errors.hpp"

namespace nldof {

void ChannelDims::validate() const {
  if (n_t < 1 || n_r < 1 || t < 1 || q < 1) {
    throw InvalidInput("n_t, n_r, T and Q must all be >= 1");
  }
  if (q >= t) throw InvalidInput("Q must be < T");
}

CorrelationBasis validate_correlation_basis(const ComplexMatrix& a, const ChannelDims& dims) {
  if (dims.q < 1 || dims.t < 1 || dims.q >= dims.t) {
    throw InvalidInput("correlation basis: need 1 <= Q < T");
  }
  if (a.rows() != dims.q || a.cols() != dims.t) {
    throw InvalidInput("correlation basis: expected " + std::to_string(dims.q) + "x" + std::to_string(dims.t) +
                       ", got " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  require_finite(a, "correlation basis");
  const Index rank = rank_with_tol(a);
  if (rank != dims.q) {
    throw DegenerateBasis("correlation basis has rank " + std::to_string(rank) + " < Q = " + std::to_string(dims.q));
  }
  return CorrelationBasis(a);
}

ComplexMatrix fourier_rows(int q, int t) {
  if (q < 1 || t < 1) throw InvalidInput("fourier_rows: q and t must be >= 1");
  ComplexMatrix a(q, t);
  const double scale = 1.0 / std::sqrt(static_cast<double>(q));
  for (int r = 0; r < q; ++r) {
    for (int c = 0; c < t; ++c) {
      // Reduce the exponent mod T before scaling so large products stay exact.
      const double turns = static_cast<double>((static_cast<long long>(r) * c) % t) / t;
      a(r, c) = std::polar(scale, -2.0 * std::numbers::pi * turns);
    }
  }
  return a;
}

CorrelationBasis fourier_basis(const ChannelDims& dims) {
  return validate_correlation_basis(fourier_rows(dims.q, dims.t), dims);
}

ComplexMatrix read_basis_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open correlation basis file: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
    const int q = doc.at("q").get<int>();
    const int t = doc.at("t").get<int>();
    const auto& entries = doc.at("entries");
    if (q < 1 || t < 1) throw InvalidInput("q and t must be >= 1");
    if (!entries.is_array() || entries.size() != static_cast<std::size_t>(q) * t) {
      throw InvalidInput("expected q * t entries");
    }
    ComplexMatrix a(q, t);
    for (int r = 0; r < q; ++r) {
      for (int c = 0; c < t; ++c) {
        const auto& e = entries.at(static_cast<std::size_t>(r) * t + c);
        if (!e.is_array() || e.size() != 2) throw InvalidInput("each entry must be [re, im]");
        a(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      }
    }
    return a;
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidInput("malformed correlation basis file " + path.string() + ": " + ex.what());
  } catch (const InvalidInput& ex) {
    throw InvalidInput("invalid correlation basis file " + path.string() + ": " + ex.what());
  }
}

void write_basis_file(const std::filesystem::path& path, const ComplexMatrix& a) {
  nlohmann::json doc;
  doc["q"] = a.rows();
  doc["t"] = a.cols();
  auto entries = nlohmann::json::array();
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index c = 0; c < a.cols(); ++c) entries.push_back({a(r, c).real(), a(r, c).imag()});
  }
  doc["entries"] = std::move(entries);
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write correlation basis file: " + path.string());
  out << doc.dump(2) << '\n';
}

FadingState::FadingState(ComplexMatrix s, ComplexMatrix h, int n_t, int n_r)
    : s_(std::move(s)), h_(std::move(h)), n_t_(n_t), n_r_(n_r) {
  if (s_.rows() != static_cast<Index>(n_t) * n_r || h_.rows() != s_.rows()) {
    throw InvalidInput("FadingState: expected one row per antenna pair");
  }
}

ComplexMatrix FadingState::h_at(int t) const {
  ComplexMatrix out(n_r_, n_t_);
  for (int n = 0; n < n_r_; ++n) {
    for (int m = 0; m < n_t_; ++m) out(n, m) = h(m, n, t);
  }
  return out;
}

FadingState sample_fading(const CorrelationBasis& basis, int n_t, int n_r, Rng& rng) {
  if (n_t < 1 || n_r < 1) throw InvalidInput("sample_fading: antenna counts must be >= 1");
  ComplexMatrix s = sample_complex_gaussian(rng, static_cast<Index>(n_t) * n_r, basis.q());
  ComplexMatrix h = s * basis.a();
  return FadingState(std::move(s), std::move(h), n_t, n_r);
}

ComplexMatrix apply_channel(const ComplexMatrix& x, const FadingState& fading) {
  if (x.rows() != fading.n_t() || x.cols() != fading.t()) {
    throw InvalidInput("apply_channel: transmit block is " + std::to_string(x.rows()) + "x" +
                       std::to_string(x.cols()) + ", channel expects " + std::to_string(fading.n_t()) + "x" +
                       std::to_string(fading.t()));
  }
  ComplexMatrix y = ComplexMatrix::Zero(fading.n_r(), x.cols());
  for (int t = 0; t < x.cols(); ++t) y.col(t) = fading.h_at(t) * x.col(t);
  return y;
}

NoisyBlock add_awgn(const ComplexMatrix& y, double snr, Rng& rng) {
  if (!(snr > 0.0) || !std::isfinite(snr)) throw InvalidInput("add_awgn: snr must be positive and finite");
  const double sigma = 1.0 / std::sqrt(snr);
  ComplexMatrix w = sample_complex_gaussian(rng, y.rows(), y.cols());
  return NoisyBlock{y + sigma * w, snr};
}

}  // namespace nldof
