// tests/test_features.cpp

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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "spkver/features.hpp"
#include "test_utils.hpp"

using namespace spkver;

namespace {

FrameLpc lpc_of(std::vector<double> a) {
  FrameLpc lpc;
  lpc.coeffs = std::move(a);
  return lpc;
}

FeatureMatrix matrix_of(std::initializer_list<std::initializer_list<double>> rows) {
  FeatureMatrix f;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.begin()->size());
  f.values.resize(n, d);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) f.values(i, j++) = v;
    ++i;
  }
  return f;
}

// ACW reference: cepstra of the pole set of A and the explicit roots of the
// unit-residue numerator, both taken straight from the roots.
std::vector<double> acw_oracle(const std::vector<testutil::Cplx>& poles, int ncep) {
  const int order = static_cast<int>(poles.size());
  const std::vector<double> a = testutil::poly_from_poles(poles);
  std::vector<double> numerator(static_cast<std::size_t>(order - 1));
  for (int k = 1; k < order; ++k) {
    numerator[k - 1] = (order - k) * a[k - 1] / order;  // monic after / order
  }
  const std::vector<testutil::Cplx> zeros = testutil::companion_roots(numerator);
  const std::vector<double> from_poles = testutil::pole_power_cepstrum(poles, ncep);
  const std::vector<double> from_zeros = testutil::pole_power_cepstrum(zeros, ncep);
  std::vector<double> c(ncep);
  for (int n = 0; n < ncep; ++n) c[n] = from_poles[n] - from_zeros[n];
  return c;
}

}  // namespace

TEST_CASE("first-order ACW reduces to the plain cepstrum") {
  const FrameLpc lpc = lpc_of({-0.6});
  const FrameCepstrum acw = acw_cepstrum(lpc, 6);
  const FrameCepstrum plain = lpc_to_cepstrum(lpc, 6);
  for (int n = 0; n < 6; ++n) {
    CHECK(acw.coeffs[n] == plain.coeffs[n]);
  }
}

TEST_CASE("ACW of a flat predictor is zero") {
  const FrameCepstrum acw = acw_cepstrum(lpc_of(std::vector<double>(6, 0.0)));
  for (double v : acw.coeffs) CHECK(v == 0.0);
}

TEST_CASE("second-order ACW matches the root-finding oracle") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    const std::vector<testutil::Cplx> poles = testutil::random_stable_poles(rng, 2);
    const std::vector<double> a = testutil::poly_from_poles(poles);
    const FrameCepstrum acw = acw_cepstrum(lpc_of(a), 8);
    const std::vector<double> expected = acw_oracle(poles, 8);
    for (int n = 0; n < 8; ++n) {
      REQUIRE(acw.coeffs[n] == Catch::Approx(expected[n]).margin(1e-8));
    }
  }
}

TEST_CASE("ACW matches the root-finding oracle across orders") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 100; ++rep) {
    const int order = 2 + static_cast<int>(rng() % 11);
    const std::vector<testutil::Cplx> poles = testutil::random_stable_poles(rng, order);
    const std::vector<double> a = testutil::poly_from_poles(poles);
    const FrameCepstrum acw = acw_cepstrum(lpc_of(a), order);
    const std::vector<double> expected = acw_oracle(poles, order);
    for (int n = 0; n < order; ++n) {
      REQUIRE(acw.coeffs[n] == Catch::Approx(expected[n]).margin(1e-8));
    }
  }
}

TEST_CASE("ACW numerator equals the unit-residue expansion from the poles") {
  // sum_i prod_{j != i} (1 - p_j x) expanded directly must reproduce the
  // closed-form coefficients (P - k) a_k.
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    const int order = 2 + static_cast<int>(rng() % 9);
    const std::vector<testutil::Cplx> poles = testutil::random_stable_poles(rng, order);
    const std::vector<double> a = testutil::poly_from_poles(poles);
    std::vector<testutil::Cplx> sum(static_cast<std::size_t>(order), 0.0);
    for (int i = 0; i < order; ++i) {
      std::vector<testutil::Cplx> others;
      for (int j = 0; j < order; ++j) {
        if (j != i) others.push_back(poles[static_cast<std::size_t>(j)]);
      }
      std::vector<testutil::Cplx> poly{1.0};
      for (const testutil::Cplx& p : others) {
        std::vector<testutil::Cplx> next(poly.size() + 1, testutil::Cplx(0.0));
        for (std::size_t q = 0; q < poly.size(); ++q) {
          next[q] += poly[q];
          next[q + 1] -= poly[q] * p;
        }
        poly = std::move(next);
      }
      for (std::size_t q = 0; q < poly.size(); ++q) sum[q] += poly[q];
    }
    for (int k = 0; k < order; ++k) {
      const double closed_form = (k == 0) ? order : (order - k) * a[k - 1];
      REQUIRE(sum[static_cast<std::size_t>(k)].imag() ==
              Catch::Approx(0.0).margin(1e-8));
      REQUIRE(sum[static_cast<std::size_t>(k)].real() ==
              Catch::Approx(closed_form).margin(1e-8));
    }
  }
}

TEST_CASE("lifter weights: linear, bandpass and postfilter") {
  FrameCepstrum c;
  c.coeffs = {1.0, 1.0, 1.0};
  const FrameCepstrum lw = lifter(c, LifterKind::Linear, 3);
  CHECK(lw.coeffs[0] == 1.0);
  CHECK(lw.coeffs[1] == 2.0);
  CHECK(lw.coeffs[2] == 3.0);

  FrameCepstrum c2;
  c2.coeffs = {1.0, 1.0};
  const FrameCepstrum bpl = lifter(c2, LifterKind::Bandpass, 2);
  CHECK(bpl.coeffs[0] == Catch::Approx(1.5));
  CHECK(bpl.coeffs[1] == Catch::Approx(1.0));

  const FrameCepstrum pf = lifter(c2, LifterKind::Postfilter, 2, 1.0, 0.9);
  CHECK(pf.coeffs[0] == Catch::Approx(0.1));
  CHECK(pf.coeffs[1] == Catch::Approx(0.19));
}

TEST_CASE("lifter length must cover every coefficient") {
  FrameCepstrum c;
  c.coeffs = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(lifter(c, LifterKind::Linear, 2), std::invalid_argument);
}

TEST_CASE("cepstral mean subtraction examples") {
  const FeatureMatrix identical = cms(matrix_of({{2.0, -1.0}, {2.0, -1.0}, {2.0, -1.0}}));
  CHECK(identical.values.cwiseAbs().maxCoeff() == Catch::Approx(0.0).margin(1e-15));

  const FeatureMatrix two = cms(matrix_of({{1.0, 2.0}, {3.0, 4.0}}));
  CHECK(two.values(0, 0) == Catch::Approx(-1.0));
  CHECK(two.values(0, 1) == Catch::Approx(-1.0));
  CHECK(two.values(1, 0) == Catch::Approx(1.0));
  CHECK(two.values(1, 1) == Catch::Approx(1.0));

  const FeatureMatrix single = cms(matrix_of({{5.0, -3.0}}));
  CHECK(single.values.cwiseAbs().maxCoeff() == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("cms zeroes column means and is idempotent") {
  std::mt19937_64 rng(21);
  FeatureMatrix f;
  f.values.resize(40, 6);
  for (Eigen::Index i = 0; i < 40; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) f.values(i, j) = testutil::uniform(rng, -5.0, 5.0);
  }
  const FeatureMatrix once = cms(f);
  CHECK(once.values.colwise().mean().cwiseAbs().maxCoeff() <= 1e-12);
  const FeatureMatrix twice = cms(once);
  CHECK((twice.values - once.values).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("sigma normalization scales columns to unit deviation") {
  const FeatureMatrix f = sigma_normalize(matrix_of({{-2.0}, {2.0}}));
  CHECK(f.values(0, 0) == Catch::Approx(-1.0));
  CHECK(f.values(1, 0) == Catch::Approx(1.0));

  std::vector<Eigen::Index> degenerate;
  const FeatureMatrix constant =
      sigma_normalize(matrix_of({{3.0, 1.0}, {3.0, 2.0}}), &degenerate);
  REQUIRE(degenerate.size() == 1);
  CHECK(degenerate[0] == 0);
  CHECK(constant.values(0, 0) == 3.0);
  CHECK(constant.values(1, 0) == 3.0);
}

TEST_CASE("sigma normalization yields unit deviations and is idempotent") {
  std::mt19937_64 rng(22);
  FeatureMatrix f;
  f.values.resize(50, 5);
  for (Eigen::Index i = 0; i < 50; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) f.values(i, j) = testutil::uniform(rng, -3.0, 3.0);
  }
  const FeatureMatrix once = sigma_normalize(f);
  for (Eigen::Index j = 0; j < 5; ++j) {
    const double mean = once.values.col(j).mean();
    const double sigma =
        std::sqrt((once.values.col(j).array() - mean).square().sum() / 50.0);
    CHECK(sigma == Catch::Approx(1.0).margin(1e-12));
  }
  const FeatureMatrix twice = sigma_normalize(once);
  CHECK((twice.values - once.values).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("dropping coefficients removes leading columns") {
  FeatureMatrix f;
  f.values.resize(2, 20);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (Eigen::Index j = 0; j < 20; ++j) f.values(i, j) = static_cast<double>(j + 1);
  }
  const FeatureMatrix dropped = drop_coefficients(f, 2);
  CHECK(dropped.values.cols() == 18);
  CHECK(dropped.values(0, 0) == 3.0);

  const FeatureMatrix same = drop_coefficients(f, 0);
  CHECK(same.values == f.values);

  CHECK_THROWS_AS(drop_coefficients(f, 20), std::invalid_argument);
}

TEST_CASE("fixed lifters commute with cms") {
  std::mt19937_64 rng(23);
  FeatureMatrix f;
  f.values.resize(30, 8);
  for (Eigen::Index i = 0; i < 30; ++i) {
    for (Eigen::Index j = 0; j < 8; ++j) f.values(i, j) = testutil::uniform(rng, -2.0, 2.0);
  }
  FeatureMatrix lifted_first = f;
  for (Eigen::Index j = 0; j < 8; ++j) {
    lifted_first.values.col(j) *= lifter_weight(LifterKind::Linear, static_cast<int>(j) + 1, 8);
  }
  lifted_first = cms(lifted_first);

  FeatureMatrix cms_first = cms(f);
  for (Eigen::Index j = 0; j < 8; ++j) {
    cms_first.values.col(j) *= lifter_weight(LifterKind::Linear, static_cast<int>(j) + 1, 8);
  }
  CHECK((lifted_first.values - cms_first.values).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("chain names parse case-insensitively into canonical forms") {
  CHECK(ParamChain::parse("LPCC").name() == "LPCC");
  CHECK(ParamChain::parse("lpcc[3..p]").name() == "LPCC[3..P]");
  CHECK(ParamChain::parse("SIGMA-LPCC").name() == "LPCC+SIGMA");
  CHECK(ParamChain::parse("\xcf\x83-LPCC").name() == "LPCC+SIGMA");
  CHECK(ParamChain::parse("ACW").name() == "ACW");
  CHECK(ParamChain::parse("CMS").name() == "LPCC+CMS");
  CHECK(ParamChain::parse("CMS+ACW").name() == "ACW+CMS");
  CHECK(ParamChain::parse("CMS+ACW+SIGMA").name() == "ACW+CMS+SIGMA");
  CHECK(ParamChain::parse("CMS+SIGMA").name() == "LPCC+CMS+SIGMA");
  CHECK(ParamChain::parse("CMS-LW").name() == "LPCC+LW+CMS");
  CHECK(ParamChain::parse("ACW+SIGMA").name() == "ACW+SIGMA");
  CHECK(ParamChain::parse("PF").name() == "LPCC+PF(1,0.9)");
  CHECK(ParamChain::parse("pf(1,0.9)").name() == "LPCC+PF(1,0.9)");
  CHECK(ParamChain::parse("CMS+PF").name() == "LPCC+PF(1,0.9)+CMS");
  CHECK(ParamChain::parse("CMS+PF+SIGMA").name() == "LPCC+PF(1,0.9)+CMS+SIGMA");
  CHECK(ParamChain::parse("PF(0.8,0.5)").name() == "LPCC+PF(0.8,0.5)");
  CHECK(ParamChain::parse("ACW-LPCC").name() == "ACW");
}

TEST_CASE("normalization order follows the listed order") {
  const ParamChain cms_then_sigma = ParamChain::parse("CMS+SIGMA");
  REQUIRE(cms_then_sigma.normalizations.size() == 2);
  CHECK(cms_then_sigma.normalizations[0] == Normalization::Cms);
  CHECK(cms_then_sigma.normalizations[1] == Normalization::Sigma);
  const ParamChain sigma_then_cms = ParamChain::parse("SIGMA+CMS");
  CHECK(sigma_then_cms.normalizations[0] == Normalization::Sigma);
  CHECK(sigma_then_cms.normalizations[1] == Normalization::Cms);
}

TEST_CASE("malformed chains are rejected") {
  CHECK_THROWS_WITH(ParamChain::parse("XYZ"),
                    Catch::Matchers::ContainsSubstring("unknown parameterization token"));
  CHECK_THROWS_AS(ParamChain::parse("CMS+CMS"), std::invalid_argument);
  CHECK_THROWS_AS(ParamChain::parse("LW+BPL"), std::invalid_argument);
  CHECK_THROWS_AS(ParamChain::parse("LPCC[0..P]"), std::invalid_argument);
  CHECK_THROWS_AS(ParamChain::parse("PF(1)"), std::invalid_argument);
  CHECK_THROWS_AS(ParamChain::parse(""), std::invalid_argument);
}

namespace {

std::vector<FrameAnalysis> random_analyses(std::mt19937_64& rng, int frames, int order) {
  std::vector<FrameAnalysis> out(static_cast<std::size_t>(frames));
  for (FrameAnalysis& a : out) {
    const std::vector<testutil::Cplx> poles = testutil::random_stable_poles(rng, order);
    a.lpc.coeffs = testutil::poly_from_poles(poles);
    a.cepstrum = lpc_to_cepstrum(a.lpc);
  }
  return out;
}

}  // namespace

TEST_CASE("the identity chain reproduces raw cepstra") {
  std::mt19937_64 rng(31);
  const std::vector<FrameAnalysis> analyses = random_analyses(rng, 10, 8);
  const FeatureMatrix f = apply_chain(analyses, ParamChain::parse("LPCC"));
  CHECK(f.chain_id == "LPCC");
  REQUIRE(f.values.rows() == 10);
  REQUIRE(f.values.cols() == 8);
  for (Eigen::Index i = 0; i < 10; ++i) {
    for (Eigen::Index j = 0; j < 8; ++j) {
      REQUIRE(f.values(i, j) == analyses[static_cast<std::size_t>(i)].cepstrum.coeffs
                                     [static_cast<std::size_t>(j)]);
    }
  }
}

TEST_CASE("CMS-LW differs from CMS exactly by the linear weights") {
  std::mt19937_64 rng(32);
  const std::vector<FrameAnalysis> analyses = random_analyses(rng, 25, 8);
  const FeatureMatrix with_lw = apply_chain(analyses, ParamChain::parse("CMS-LW"));
  const FeatureMatrix plain = apply_chain(analyses, ParamChain::parse("CMS"));
  for (Eigen::Index j = 0; j < 8; ++j) {
    const double w = static_cast<double>(j + 1);
    for (Eigen::Index i = 0; i < 25; ++i) {
      REQUIRE(with_lw.values(i, j) ==
              Catch::Approx(w * plain.values(i, j)).margin(1e-12));
    }
  }
}

TEST_CASE("CMS+ACW equals cms applied to the ACW matrix") {
  std::mt19937_64 rng(33);
  const std::vector<FrameAnalysis> analyses = random_analyses(rng, 25, 8);
  const FeatureMatrix chained = apply_chain(analyses, ParamChain::parse("CMS+ACW"));
  FeatureMatrix manual;
  manual.values.resize(25, 8);
  for (std::size_t i = 0; i < analyses.size(); ++i) {
    const FrameCepstrum acw = acw_cepstrum(analyses[i].lpc, 8);
    for (int j = 0; j < 8; ++j) {
      manual.values(static_cast<Eigen::Index>(i), j) = acw.coeffs[static_cast<std::size_t>(j)];
    }
  }
  manual = cms(manual);
  CHECK((chained.values - manual.values).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("chain application is bit-deterministic") {
  std::mt19937_64 rng(34);
  const std::vector<FrameAnalysis> analyses = random_analyses(rng, 15, 6);
  const ParamChain chain = ParamChain::parse("CMS+ACW+SIGMA");
  const FeatureMatrix a = apply_chain(analyses, chain);
  const FeatureMatrix b = apply_chain(analyses, chain);
  REQUIRE(a.values == b.values);
}
