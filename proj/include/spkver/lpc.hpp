// spkver/lpc.hpp

// Copyright 2026  The spkver authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Linear prediction analysis: autocorrelation, the Levinson-Durbin recursion
// for the all-pole model A(z) = 1 + sum_{k=1..P} a_k z^-k, and the cepstrum
// of 1/A(z).

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spkver {

// Predictor coefficients a[1..P] (stored at coeffs[0..P-1]) and the final
// prediction error r[0] * prod(1 - k_i^2).
struct FrameLpc {
  std::vector<double> coeffs;
  double prediction_error = 0.0;
};

// Cepstral coefficients c[1..n] (stored at coeffs[0..n-1]); the gain term c0
// is excluded throughout.
struct FrameCepstrum {
  std::vector<double> coeffs;
};

// Biased autocorrelation r[k] = sum_{n=0}^{L-1-k} x[n]*x[n+k], k = 0..order.
inline std::vector<double> autocorrelate(std::span<const double> x, int order) {
  const int len = static_cast<int>(x.size());
  if (order < 0 || order >= len) {
    throw std::invalid_argument("autocorrelation order " + std::to_string(order) +
                                " must be in [0, frame length)");
  }
  std::vector<double> r(order + 1, 0.0);
  for (int k = 0; k <= order; ++k) {
    double acc = 0.0;
    for (int n = 0; n + k < len; ++n) {
      acc += x[n] * x[n + k];
    }
    r[k] = acc;
  }
  return r;
}

// Solves the Toeplitz normal equations R a = -r[1..P] by the Levinson-Durbin
// recursion. Throws if r[0] <= 0 or a reflection coefficient leaves (-1, 1).
inline FrameLpc levinson_durbin(std::span<const double> r) {
  if (r.size() < 2) {
    throw std::invalid_argument("autocorrelation must cover at least lag 1");
  }
  const int order = static_cast<int>(r.size()) - 1;
  if (!(r[0] > 0.0)) {
    throw std::runtime_error("degenerate frame: zero-lag autocorrelation is not positive");
  }
  FrameLpc lpc;
  lpc.coeffs.assign(order, 0.0);
  std::vector<double> prev(order, 0.0);
  double error = r[0];
  for (int i = 1; i <= order; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) {
      acc += prev[j - 1] * r[i - j];
    }
    const double k = -acc / error;
    if (!(std::abs(k) < 1.0)) {
      throw std::runtime_error("unstable reflection coefficient at index " +
                               std::to_string(i));
    }
    lpc.coeffs[i - 1] = k;
    for (int j = 1; j < i; ++j) {
      lpc.coeffs[j - 1] = prev[j - 1] + k * prev[i - j - 1];
    }
    error *= 1.0 - k * k;
    for (int j = 0; j < i; ++j) prev[j] = lpc.coeffs[j];
  }
  lpc.prediction_error = error;
  return lpc;
}

// Cepstrum of 1/A(z): c[1] = -a[1],
// c[n] = -a[n] - sum_{k=1}^{n-1} (k/n) c[k] a[n-k],
// with a[m] = 0 beyond the predictor order. Equals sum_i p_i^n / n over the
// roots p_i of A(z) when A is minimum phase.
inline FrameCepstrum lpc_to_cepstrum(std::span<const double> a, int ncep) {
  if (ncep < 1) {
    throw std::invalid_argument("cepstrum length must be at least 1");
  }
  const int order = static_cast<int>(a.size());
  FrameCepstrum cep;
  cep.coeffs.assign(ncep, 0.0);
  for (int n = 1; n <= ncep; ++n) {
    double acc = (n <= order) ? -a[n - 1] : 0.0;
    for (int k = 1; k < n; ++k) {
      const int m = n - k;
      if (m <= order) {
        acc -= (static_cast<double>(k) / n) * cep.coeffs[k - 1] * a[m - 1];
      }
    }
    cep.coeffs[n - 1] = acc;
  }
  return cep;
}

inline FrameCepstrum lpc_to_cepstrum(const FrameLpc& lpc, int ncep) {
  return lpc_to_cepstrum(std::span<const double>(lpc.coeffs), ncep);
}

inline FrameCepstrum lpc_to_cepstrum(const FrameLpc& lpc) {
  return lpc_to_cepstrum(lpc, static_cast<int>(lpc.coeffs.size()));
}

}  // namespace spkver
