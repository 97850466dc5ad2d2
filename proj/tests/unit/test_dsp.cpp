// Copyright 2026 The emgspeech Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "emgspeech/dsp.hpp"
#include "emgspeech/error.hpp"
#include "emgspeech/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace emgspeech;

namespace {

std::vector<double> Sine(double hz, double fs, std::size_t n, double amplitude = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / fs);
  return x;
}

double CentralRms(const std::vector<double>& x) {
  const std::size_t lo = x.size() / 10;
  const std::size_t hi = x.size() - lo;
  double sum = 0.0;
  for (std::size_t i = lo; i < hi; ++i) sum += x[i] * x[i];
  return std::sqrt(sum / static_cast<double>(hi - lo));
}

Recording NoiseRecording(std::size_t channels, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Recording rec;
  rec.samples.resize(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < rec.samples.size(); ++i) rec.samples.data()[i] = static_cast<float>(rng.Normal());
  for (std::size_t c = 0; c < channels; ++c) rec.channel_ids.push_back(std::to_string(c + 1));
  rec.segments = {{0, static_cast<std::int64_t>(n)}};
  return rec;
}

}  // namespace

TEST_CASE("single-pass response matches the analytic Butterworth magnitude") {
  const FilterSpec spec;
  const ButterworthBandpass filter(spec);
  CHECK(filter.sections().size() == 3);
  for (double f : {5.0, 40.0, 80.0, 150.0, 282.8, 500.0, 1000.0, 1500.0, 2400.0}) {
    const double expected = std::sqrt(oracle::ButterworthBandpassPower(f, 80.0, 1000.0, 5000.0, 3));
    CHECK(std::abs(filter.Response(f)) == doctest::Approx(expected).epsilon(1e-9));
  }
  // Band edges sit at -3 dB.
  CHECK(std::norm(filter.Response(80.0)) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::norm(filter.Response(1000.0)) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("zero-phase filtering gives the squared magnitude on sinusoids") {
  const ButterworthBandpass filter(FilterSpec{});
  for (double f : {40.0, 300.0, 1500.0}) {
    std::vector<double> x = Sine(f, 5000.0, 10000);
    const double in_rms = CentralRms(x);
    filter.FiltFilt(x);
    const double ratio = CentralRms(x) / in_rms;
    const double expected = oracle::ButterworthBandpassPower(f, 80.0, 1000.0, 5000.0, 3);
    CHECK(ratio == doctest::Approx(expected).epsilon(0.05));
  }
}

TEST_CASE("zero-phase filtering introduces no lag") {
  const ButterworthBandpass filter(FilterSpec{});
  std::vector<double> x = Sine(300.0, 5000.0, 5000);
  const std::vector<double> original = x;
  filter.FiltFilt(x);
  // In-band sinusoid: output tracks input sample by sample in the interior.
  const double gain = oracle::ButterworthBandpassPower(300.0, 80.0, 1000.0, 5000.0, 3);
  double worst = 0.0;
  for (std::size_t i = 1000; i < 4000; ++i) worst = std::max(worst, std::abs(x[i] - gain * original[i]));
  CHECK(worst < 1e-3);
}

TEST_CASE("steady-state initial conditions suppress the DC step") {
  const ButterworthBandpass filter(FilterSpec{});
  std::vector<double> x(400, 2.5);
  filter.FiltFilt(x);
  for (double v : x) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("filtering rejects short signals and bad specs") {
  const ButterworthBandpass filter(FilterSpec{});
  std::vector<double> x(filter.PadLength(), 1.0);
  CHECK_THROWS_AS(filter.FiltFilt(x), Error);
  FilterSpec bad;
  bad.f_hi = 3000.0;
  CHECK_THROWS_AS(bad.Validate(), Error);
  bad = FilterSpec{};
  bad.f_lo = 1200.0;
  CHECK_THROWS_AS(bad.Validate(), Error);
}

TEST_CASE("reference subtraction drops the reference row") {
  Recording rec = NoiseRecording(3, 50, 1);
  rec.channel_ids = {"a", "b", "ref"};
  rec.reference_channel = "ref";
  const Recording out = SubtractReference(rec);
  REQUIRE(out.channels() == 2);
  CHECK(out.reference_channel.empty());
  CHECK(out.channel_ids == std::vector<std::string>{"a", "b"});
  for (Eigen::Index t = 0; t < 50; ++t) {
    CHECK(out.samples(0, t) == doctest::Approx(rec.samples(0, t) - rec.samples(2, t)));
    CHECK(out.samples(1, t) == doctest::Approx(rec.samples(1, t) - rec.samples(2, t)));
  }
  CHECK_THROWS_AS(SubtractReference(out), Error);
}

TEST_CASE("segments split a recording") {
  Recording rec = NoiseRecording(2, 100, 2);
  rec.segments = {{0, 30}, {50, 100}};
  const auto parts = SplitSegments(rec);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].length() == 30);
  CHECK(parts[1].length() == 50);
  CHECK(parts[1].samples(1, 0) == rec.samples(1, 50));
}

TEST_CASE("frame count formula matches enumeration on random triples") {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t window = 1 + rng.Index(400);
    const std::size_t hop = 1 + rng.Index(300);
    const std::size_t n = window + rng.Index(20000);
    const FrameGeometry g{window, hop};
    REQUIRE(FrameCount(n, g) == oracle::CountFrames(n, hop, window));
  }
  CHECK_THROWS_AS(FrameCount(10, FrameGeometry{20, 5}), Error);
}

TEST_CASE("5 kHz framing uses 125-sample windows every 100 samples") {
  const FrameGeometry g = FrameGeometry::FromMs(5000.0, 20.0, 25.0);
  CHECK(g.window == 125);
  CHECK(g.hop == 100);
  Recording rec = NoiseRecording(2, 1025, 3);
  const auto frames = Frame(rec, 20.0, 25.0);
  REQUIRE(frames.size() == 10);
  CHECK(frames[3].cols() == 125);
  CHECK(frames[3](1, 0) == rec.samples(1, 300));
}

TEST_CASE("Hann window and FFT size helpers") {
  CHECK(NextPowerOfTwo(125) == 128);
  CHECK(NextPowerOfTwo(128) == 128);
  CHECK(NextPowerOfTwo(1) == 1);
  const auto w = HannWindow(8);
  CHECK(w[0] == doctest::Approx(0.0));
  CHECK(w[4] == doctest::Approx(1.0));
  for (std::size_t i = 1; i < 8; ++i) CHECK(w[i] == doctest::Approx(w[8 - i]));
}

TEST_CASE("band layouts") {
  const BandLayout log5 = BandLayout::Log5();
  REQUIRE(log5.size() == 5);
  CHECK(log5.edges[3].lo == 375.0);
  CHECK(log5.edges[3].hi == 687.5);
  const BandLayout lin31 = BandLayout::Lin31();
  REQUIRE(lin31.size() == 31);
  CHECK(lin31.edges.front().lo == 80.0);
  CHECK(lin31.edges.back().hi == 1000.0);
  CHECK(lin31.edges[10].hi - lin31.edges[10].lo == doctest::Approx(920.0 / 31.0));
}

TEST_CASE("a 300 Hz tone concentrates its band power in the 250-375 Hz band") {
  Recording rec;
  rec.samples.resize(1, 5000);
  const auto tone = Sine(300.0, 5000.0, 5000);
  for (std::size_t i = 0; i < tone.size(); ++i) rec.samples(0, static_cast<Eigen::Index>(i)) = static_cast<float>(tone[i]);
  rec.channel_ids = {"1"};
  const FeatureSequence f = EmgBandPower(rec, BandLayout::Log5());
  CHECK(f.kind == FeatureKind::kVecB);
  CHECK(f.bands == 5);
  CHECK(f.length() == 49);
  const Eigen::VectorXd mean = f.frames.cast<double>().colwise().mean();
  CHECK(mean(2) / mean.sum() >= 0.9);
}

TEST_CASE("white noise spreads evenly over the 31 linear bands") {
  const Recording rec = NoiseRecording(1, 50000, 11);
  const FeatureSequence f = EmgBandPower(rec, BandLayout::Lin31(), 20.0, 50.0);
  CHECK(f.bands == 31);
  const Eigen::VectorXd mean = f.frames.cast<double>().colwise().mean();
  const double mu = mean.mean();
  const double sd = std::sqrt((mean.array() - mu).square().sum() / static_cast<double>(mean.size() - 1));
  CHECK(sd / mu < 0.2);
}

TEST_CASE("linear bands narrower than the bin spacing are rejected") {
  const Recording rec = NoiseRecording(1, 5000, 12);
  CHECK_THROWS_AS(EmgBandPower(rec, BandLayout::Lin31(), 20.0, 25.0), Error);
}

TEST_CASE("band power channel-major layout") {
  Recording rec = NoiseRecording(2, 2000, 13);
  rec.samples.row(1) *= 3.0f;
  const FeatureSequence f = EmgBandPower(rec, BandLayout::Log5());
  REQUIRE(f.dim() == 10);
  const Eigen::VectorXd mean = f.frames.cast<double>().colwise().mean();
  CHECK(mean.segment(5, 5).sum() / mean.segment(0, 5).sum() == doctest::Approx(9.0).epsilon(0.3));
}

TEST_CASE("mel filterbank rows sum to one") {
  const MatrixXdR fb = MelFilterbank(80, 512, 16000.0, 20.0, 8000.0);
  REQUIRE(fb.rows() == 80);
  REQUIRE(fb.cols() == 257);
  for (Eigen::Index r = 0; r < fb.rows(); ++r) {
    const double sum = fb.row(r).sum();
    if (sum > 0.0) CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(HzToMel(MelToHz(1234.5)) == doctest::Approx(1234.5));
  CHECK(HzToMel(700.0) == doctest::Approx(2595.0 * std::log10(2.0)));
}

TEST_CASE("a pure tone peaks in the mel band covering it") {
  const double fs = 16000.0;
  const auto tone = Sine(1000.0, fs, 16000);
  std::vector<float> audio(tone.begin(), tone.end());
  MelConfig config;
  const FeatureSequence mel = MelSpectrogram(audio, fs, config);
  CHECK(mel.kind == FeatureKind::kMelA);
  REQUIRE(mel.dim() == 80);
  const Eigen::VectorXd mean = mel.frames.cast<double>().colwise().mean();
  Eigen::Index peak = 0;
  mean.maxCoeff(&peak);
  // Centre of mel band m on the HTK scale.
  const double lo = HzToMel(20.0);
  const double hi = HzToMel(8000.0);
  const double centre = MelToHz(lo + (hi - lo) * static_cast<double>(peak + 1) / 81.0);
  CHECK(std::abs(centre - 1000.0) < 60.0);
}

TEST_CASE("short audio is padded to one frame and f_max above Nyquist is rejected") {
  std::vector<float> audio(100, 0.5f);
  const FeatureSequence mel = MelSpectrogram(audio, 16000.0);
  CHECK(mel.length() == 1);
  MelConfig config;
  config.f_max = 9000.0;
  CHECK_THROWS_AS(MelSpectrogram(audio, 16000.0, config), Error);
}
