#include "neurokey/features.hpp"

#include <cmath>
#include <cstring>

#include <Eigen/Dense>

#include "neurokey/errors.hpp"
#include "neurokey/rng.hpp"

namespace neurokey::features {

double legendre_polynomial(unsigned n, double x) {
  if (!(std::fabs(x) <= 1.0))
    throw DomainError("legendre_polynomial: x outside [-1, 1]");
  if (n > 64) throw ArgumentError("legendre_polynomial: degree above 64");
  if (n == 0) return 1.0;
  double pm1 = 1.0;
  double p = x;
  for (unsigned k = 1; k < n; ++k) {
    double pn = ((2.0 * k + 1.0) * x * p - double(k) * pm1) / double(k + 1);
    pm1 = p;
    p = pn;
  }
  return p;
}

LegendreFit fit_legendre(const eeg::BetaSignal& signal, unsigned degree) {
  const size_t n = signal.samples.size();
  if (degree > 64) throw ArgumentError("fit_legendre: degree above 64");
  if (n < degree + 1)
    throw InsufficientDataError("fit_legendre: need at least degree+1 samples");

  // Time axis rescaled to [-1, 1].
  Eigen::MatrixXd design(n, degree + 1);
  Eigen::VectorXd y(n);
  for (size_t k = 0; k < n; ++k) {
    double x = n == 1 ? 0.0 : -1.0 + 2.0 * double(k) / double(n - 1);
    // Fill one row with the recurrence directly; cheaper than per-entry calls.
    double pm1 = 1.0, p = x;
    design(k, 0) = 1.0;
    if (degree >= 1) design(k, 1) = x;
    for (unsigned j = 2; j <= degree; ++j) {
      double pn = ((2.0 * (j - 1) + 1.0) * x * p - double(j - 1) * pm1) / double(j);
      pm1 = p;
      p = pn;
      design(k, j) = pn;
    }
    y(k) = signal.samples[k];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < static_cast<Eigen::Index>(degree + 1))
    throw RankError("fit_legendre: rank-deficient design matrix");
  Eigen::VectorXd coeffs = qr.solve(y);

  LegendreFit fit;
  fit.degree = degree;
  fit.coefficients.assign(coeffs.data(), coeffs.data() + degree + 1);
  Eigen::VectorXd resid = design * coeffs - y;
  fit.residual_rms = std::sqrt(resid.squaredNorm() / double(n));
  return fit;
}

RawFeatureVector build_raw_features(const LegendreFit& fit,
                                    const eeg::BetaSignal& signal,
                                    double scale_constant) {
  if (!(scale_constant > 0))
    throw ArgumentError("build_raw_features: scale constant must be positive");
  RawFeatureVector z;
  z.scale_constant = scale_constant;
  z.values.reserve(fit.coefficients.size() + 2);
  for (double a : fit.coefficients) z.values.push_back(scale_constant * a);
  z.values.push_back(signal.amplitude_multiplier);
  z.values.push_back(signal.window_seconds);
  return z;
}

namespace {

constexpr double kDetTolerance = 1e-12;

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
matrix_view(const MaskParameters& p) {
  return {p.matrix.data(), p.dimension, p.dimension};
}

}  // namespace

bool mask_is_invertible(const MaskParameters& params) {
  auto m = matrix_view(params);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  return std::isfinite(lu.determinant()) &&
         std::fabs(lu.determinant()) > kDetTolerance;
}

MaskParameters generate_mask(uint64_t seed, unsigned dimension, double theta) {
  if (dimension < 1) throw ArgumentError("generate_mask: dimension must be >= 1");
  if (!(theta > 0)) throw ArgumentError("generate_mask: theta must be positive");

  rng::Prng prng(seed);
  MaskParameters params;
  params.dimension = dimension;
  params.theta = theta;
  params.seed = seed;
  params.matrix.resize(size_t(dimension) * dimension);
  params.offset.resize(dimension);

  const unsigned d = dimension;
  bool ok = false;
  for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
    // Entries uniform in (0,1), then each column normalized to sum 1.
    for (unsigned i = 0; i < d; ++i)
      for (unsigned j = 0; j < d; ++j)
        params.matrix[size_t(i) * d + j] = prng.uniform01_pos();
    for (unsigned j = 0; j < d; ++j) {
      double sum = 0.0;
      for (unsigned i = 0; i < d; ++i) sum += params.matrix[size_t(i) * d + j];
      for (unsigned i = 0; i < d; ++i) params.matrix[size_t(i) * d + j] /= sum;
    }
    ok = mask_is_invertible(params);
  }
  if (!ok) throw GenerationError("generate_mask: no invertible matrix found");

  const double lo = std::exp2(-theta);
  const double hi = std::exp2(theta);
  for (unsigned k = 0; k < d; ++k) {
    double mag = lo + prng.uniform01() * (hi - lo);
    bool negative = (prng.next_u64() & 1) != 0;
    params.offset[k] = negative ? -mag : mag;
  }
  return params;
}

MaskedFeatureVector mask_features(const RawFeatureVector& z,
                                  const MaskParameters& params) {
  if (z.values.size() != params.dimension)
    throw ArgumentError("mask_features: dimension mismatch");
  const unsigned d = params.dimension;
  MaskedFeatureVector w;
  w.values.resize(d);
  // Row vector times matrix: w_j = sum_i z_i m_ij + gamma_j.
  for (unsigned j = 0; j < d; ++j) {
    double acc = 0.0;
    for (unsigned i = 0; i < d; ++i)
      acc += z.values[i] * params.matrix[size_t(i) * d + j];
    w.values[j] = acc + params.offset[j];
  }
  for (double v : w.values)
    if (!std::isfinite(v)) throw ArgumentError("mask_features: non-finite result");
  return w;
}

std::vector<double> unmask_features(const MaskedFeatureVector& w,
                                    const MaskParameters& params) {
  if (w.values.size() != params.dimension)
    throw ArgumentError("unmask_features: dimension mismatch");
  const unsigned d = params.dimension;
  Eigen::VectorXd rhs(d);
  for (unsigned j = 0; j < d; ++j) rhs(j) = w.values[j] - params.offset[j];
  // z M = w - gamma  =>  M^T z^T = (w - gamma)^T
  Eigen::MatrixXd mt = matrix_view(params).transpose();
  Eigen::VectorXd z = mt.partialPivLu().solve(rhs);
  return {z.data(), z.data() + d};
}

namespace {

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

void put_f64(std::vector<uint8_t>& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

struct Reader {
  std::span<const uint8_t> data;
  size_t pos = 0;
  uint8_t u8() {
    if (pos + 1 > data.size()) throw ParseError("mask blob truncated");
    return data[pos++];
  }
  uint16_t u16() { return uint16_t(u8()) | (uint16_t(u8()) << 8); }
  uint64_t u64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(u8()) << (8 * i);
    return v;
  }
  double f64() {
    uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

constexpr uint8_t kMaskBlobVersion = 1;

}  // namespace

std::vector<uint8_t> encode_mask(const MaskParameters& params) {
  std::vector<uint8_t> out;
  out.push_back(kMaskBlobVersion);
  put_u16(out, uint16_t(params.dimension));
  put_f64(out, params.theta);
  put_u64(out, params.seed);
  for (double v : params.matrix) put_f64(out, v);
  for (double v : params.offset) put_f64(out, v);
  return out;
}

MaskParameters decode_mask(std::span<const uint8_t> blob) {
  Reader r{blob};
  if (r.u8() != kMaskBlobVersion) throw ParseError("unsupported mask blob version");
  MaskParameters params;
  params.dimension = r.u16();
  params.theta = r.f64();
  params.seed = r.u64();
  params.matrix.resize(size_t(params.dimension) * params.dimension);
  params.offset.resize(params.dimension);
  for (double& v : params.matrix) v = r.f64();
  for (double& v : params.offset) v = r.f64();
  if (r.pos != blob.size()) throw ParseError("mask blob has trailing bytes");
  return params;
}

}  // namespace neurokey::features
