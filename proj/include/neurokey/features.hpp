#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "neurokey/eeg.hpp"

namespace neurokey::features {

struct LegendreFit {
  std::vector<double> coefficients;  // a_0 .. a_degree
  unsigned degree = 0;
  double residual_rms = 0.0;
};

// z = {c*a_0, ..., c*a_n, A, T}
struct RawFeatureVector {
  std::vector<double> values;
  double scale_constant = 1.0;
};

// Invertible masking transform w = z*M + gamma. matrix is row-major d x d
// with unit column sums; |offset_k| lies in [2^-theta, 2^theta].
struct MaskParameters {
  unsigned dimension = 0;
  double theta = 0.0;
  uint64_t seed = 0;
  std::vector<double> matrix;  // row-major, d*d
  std::vector<double> offset;  // length d
};

struct MaskedFeatureVector {
  std::vector<double> values;
};

// p_n(x) by the stable three-term recurrence; |x| <= 1, n <= 64.
double legendre_polynomial(unsigned n, double x);

// Least-squares fit of y(x) = a_0 + sum a_i p_i(x) with the window's time
// axis rescaled to [-1, 1].
LegendreFit fit_legendre(const eeg::BetaSignal& signal, unsigned degree);

RawFeatureVector build_raw_features(const LegendreFit& fit,
                                    const eeg::BetaSignal& signal,
                                    double scale_constant);

MaskParameters generate_mask(uint64_t seed, unsigned dimension, double theta);

MaskedFeatureVector mask_features(const RawFeatureVector& z,
                                  const MaskParameters& params);

// Inverse of mask_features: recovers z from w.
std::vector<double> unmask_features(const MaskedFeatureVector& w,
                                    const MaskParameters& params);

// True when the matrix is numerically invertible (|det| above tolerance).
bool mask_is_invertible(const MaskParameters& params);

// Versioned little-endian blob: version u8, dimension u16, theta f64,
// seed u64, matrix row-major f64[d*d], offset f64[d].
std::vector<uint8_t> encode_mask(const MaskParameters& params);
MaskParameters decode_mask(std::span<const uint8_t> blob);

}  // namespace neurokey::features
