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

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace emgspeech {

namespace {

using Complex = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& PlannerMutex() {
  static std::mutex mutex;
  return mutex;
}

/// Real-to-complex FFT of a fixed size. One instance per worker.
class RealFft {
 public:
  explicit RealFft(std::size_t n)
      : n_(n),
        input_(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        output_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    std::lock_guard lock(PlannerMutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), input_, output_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(PlannerMutex());
    fftw_destroy_plan(plan_);
    fftw_free(input_);
    fftw_free(output_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return input_; }

  /// |X_k|^2 for k = 0..n/2, scaled by `scale`.
  void PowerSpectrum(std::vector<double>& power, double scale) {
    fftw_execute(plan_);
    power.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k <= n_ / 2; ++k) {
      power[k] = (output_[k][0] * output_[k][0] + output_[k][1] * output_[k][1]) * scale;
    }
  }

 private:
  std::size_t n_;
  double* input_;
  fftw_complex* output_;
  fftw_plan plan_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Band layouts
// ---------------------------------------------------------------------------

BandLayout BandLayout::Log5() {
  return {{{80.0, 125.0}, {125.0, 250.0}, {250.0, 375.0}, {375.0, 687.5}, {687.5, 1000.0}},
          BandMode::kLog5};
}

BandLayout BandLayout::Lin31() {
  BandLayout layout;
  layout.mode = BandMode::kLin31;
  const double width = (1000.0 - 80.0) / 31.0;
  for (int b = 0; b < 31; ++b) {
    layout.edges.push_back({80.0 + b * width, b == 30 ? 1000.0 : 80.0 + (b + 1) * width});
  }
  return layout;
}

void BandLayout::Validate() const {
  if (edges.empty()) throw Error(ErrorCode::kInvalidArgument, "band layout is empty");
  for (std::size_t b = 0; b < edges.size(); ++b) {
    const Band& band = edges[b];
    if (!(band.lo < band.hi) || band.lo < 80.0 || band.hi > 1000.0) {
      throw Error(ErrorCode::kInvalidArgument, "band " + std::to_string(b) + " outside [80, 1000] Hz");
    }
    if (b > 0 && band.lo < edges[b - 1].hi) {
      throw Error(ErrorCode::kInvalidArgument, "bands overlap or are not ascending");
    }
  }
}

// ---------------------------------------------------------------------------
// Butterworth
// ---------------------------------------------------------------------------

void FilterSpec::Validate() const {
  if (order < 1) throw Error(ErrorCode::kInvalidArgument, "filter order must be >= 1");
  if (!(fs > 0.0)) throw Error(ErrorCode::kInvalidArgument, "fs must be > 0");
  if (!(0.0 < f_lo && f_lo < f_hi && f_hi < fs / 2.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bandpass edges must satisfy 0 < f_lo < f_hi < fs/2");
  }
}

ButterworthBandpass::ButterworthBandpass(const FilterSpec& spec) : spec_(spec) {
  spec_.Validate();
  const int n = spec_.order;
  const double fs2 = 2.0 * spec_.fs;
  const double w_lo = fs2 * std::tan(kPi * spec_.f_lo / spec_.fs);
  const double w_hi = fs2 * std::tan(kPi * spec_.f_hi / spec_.fs);
  const double bw = w_hi - w_lo;
  const double w0_sq = w_lo * w_hi;

  // Lowpass prototype poles -> bandpass poles -> z-plane via bilinear map.
  std::vector<Complex> poles;
  for (int k = 0; k < n; ++k) {
    const Complex p = std::polar(1.0, kPi * (2.0 * k + n + 1) / (2.0 * n));
    const Complex disc = std::sqrt(p * p * bw * bw - 4.0 * w0_sq);
    for (const Complex s : {(p * bw + disc) / 2.0, (p * bw - disc) / 2.0}) {
      poles.push_back((fs2 + s) / (fs2 - s));
    }
  }

  std::vector<Complex> upper;
  std::vector<double> real;
  for (const Complex& z : poles) {
    if (std::abs(z.imag()) <= 1e-12 * std::abs(z)) {
      real.push_back(z.real());
    } else if (z.imag() > 0) {
      upper.push_back(z);
    }
  }
  std::sort(real.begin(), real.end());
  if (real.size() % 2 != 0 || upper.size() * 2 + real.size() != poles.size()) {
    throw Error(ErrorCode::kDegenerate, "could not pair Butterworth poles into sections");
  }
  auto make_section = [](double a1, double a2) {
    Biquad q;
    q.b = {1.0, 0.0, -1.0};  // zeros at z = 1 and z = -1
    q.a = {a1, a2};
    return q;
  };
  for (const Complex& z : upper) sections_.push_back(make_section(-2.0 * z.real(), std::norm(z)));
  for (std::size_t i = 0; i < real.size(); i += 2) {
    sections_.push_back(make_section(-(real[i] + real[i + 1]), real[i] * real[i + 1]));
  }

  // Unit gain at the centre frequency, spread evenly across sections.
  const double f0 = spec_.fs / kPi * std::atan(std::sqrt(w0_sq) / fs2);
  const double gain = 1.0 / std::abs(Response(f0));
  const double per_section = std::pow(gain, 1.0 / static_cast<double>(sections_.size()));
  for (auto& q : sections_) {
    for (auto& b : q.b) b *= per_section;
  }
}

std::complex<double> ButterworthBandpass::Response(double hz) const {
  const Complex z1 = std::polar(1.0, -2.0 * kPi * hz / spec_.fs);  // z^-1
  const Complex z2 = z1 * z1;
  Complex h = 1.0;
  for (const auto& q : sections_) {
    h *= (q.b[0] + q.b[1] * z1 + q.b[2] * z2) / (1.0 + q.a[0] * z1 + q.a[1] * z2);
  }
  return h;
}

std::vector<double> ButterworthBandpass::SteadyStateInitial() const {
  std::vector<double> zi(2 * sections_.size(), 0.0);
  double scale = 1.0;
  for (std::size_t s = 0; s < sections_.size(); ++s) {
    const auto& q = sections_[s];
    const double b0 = q.b[0];
    const double rhs0 = q.b[1] - q.a[0] * b0;
    const double rhs1 = q.b[2] - q.a[1] * b0;
    const double z0 = (rhs0 + rhs1) / (1.0 + q.a[0] + q.a[1]);
    zi[2 * s] = scale * z0;
    zi[2 * s + 1] = scale * (rhs1 - q.a[1] * z0);
    scale *= (q.b[0] + q.b[1] + q.b[2]) / (1.0 + q.a[0] + q.a[1]);
  }
  return zi;
}

void ButterworthBandpass::Filter(std::span<double> signal,
                                 std::span<const double> initial_state) const {
  for (std::size_t s = 0; s < sections_.size(); ++s) {
    const auto& q = sections_[s];
    double s1 = initial_state.empty() ? 0.0 : initial_state[2 * s];
    double s2 = initial_state.empty() ? 0.0 : initial_state[2 * s + 1];
    for (double& x : signal) {
      const double y = q.b[0] * x + s1;
      s1 = q.b[1] * x - q.a[0] * y + s2;
      s2 = q.b[2] * x - q.a[1] * y;
      x = y;
    }
  }
}

void ButterworthBandpass::FiltFilt(std::span<double> signal) const {
  const std::size_t n = signal.size();
  const std::size_t pad = PadLength();
  if (n <= pad) {
    throw Error(ErrorCode::kInvalidArgument, "signal of " + std::to_string(n) +
                                                 " samples is shorter than the filter warm-up of " +
                                                 std::to_string(pad + 1));
  }
  std::vector<double> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) {
    ext[i] = 2.0 * signal[0] - signal[pad - i];
    ext[n + pad + i] = 2.0 * signal[n - 1] - signal[n - 2 - i];
  }
  std::copy(signal.begin(), signal.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));

  const std::vector<double> zi = SteadyStateInitial();
  std::vector<double> state(zi.size());
  auto scaled = [&](double x0) {
    for (std::size_t i = 0; i < zi.size(); ++i) state[i] = zi[i] * x0;
    return std::span<const double>(state);
  };
  Filter(ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());
  Filter(ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());
  std::copy(ext.begin() + static_cast<std::ptrdiff_t>(pad),
            ext.begin() + static_cast<std::ptrdiff_t>(pad + n), signal.begin());
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

Recording SubtractReference(const Recording& recording) {
  recording.Validate();
  if (recording.reference_channel.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "recording has no reference channel");
  }
  const auto ref = recording.ChannelIndex(recording.reference_channel);
  if (!ref) {
    throw Error(ErrorCode::kInvalidArgument,
                "reference channel '" + recording.reference_channel + "' missing");
  }
  Recording out = recording;
  out.reference_channel.clear();
  out.channel_ids.clear();
  out.samples.resize(static_cast<Eigen::Index>(recording.channels() - 1),
                     static_cast<Eigen::Index>(recording.length()));
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < recording.channels(); ++c) {
    if (c == *ref) continue;
    out.samples.row(row++) = recording.samples.row(static_cast<Eigen::Index>(c)) -
                             recording.samples.row(static_cast<Eigen::Index>(*ref));
    out.channel_ids.push_back(recording.channel_ids[c]);
  }
  return out;
}

Recording Bandpass(const Recording& recording, const FilterSpec& spec) {
  FilterSpec effective = spec;
  effective.fs = recording.fs;
  const ButterworthBandpass filter(effective);
  Recording out = recording;
  std::vector<double> buffer(recording.length());
  for (Eigen::Index c = 0; c < recording.samples.rows(); ++c) {
    for (std::size_t t = 0; t < buffer.size(); ++t) {
      buffer[t] = recording.samples(c, static_cast<Eigen::Index>(t));
    }
    filter.FiltFilt(buffer);
    for (std::size_t t = 0; t < buffer.size(); ++t) {
      out.samples(c, static_cast<Eigen::Index>(t)) = static_cast<float>(buffer[t]);
    }
  }
  return out;
}

std::vector<Recording> SplitSegments(const Recording& recording) {
  recording.Validate();
  std::vector<Recording> out;
  for (const auto& seg : recording.segments) {
    Recording piece = recording;
    piece.samples = recording.samples.middleCols(seg.start, seg.end - seg.start);
    piece.segments = {{0, seg.end - seg.start}};
    out.push_back(std::move(piece));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Framing
// ---------------------------------------------------------------------------

FrameGeometry FrameGeometry::FromMs(double fs, double hop_ms, double window_ms) {
  FrameGeometry g;
  g.window = static_cast<std::size_t>(std::lround(window_ms * fs / 1000.0));
  g.hop = static_cast<std::size_t>(std::lround(hop_ms * fs / 1000.0));
  if (g.window == 0 || g.hop == 0) {
    throw Error(ErrorCode::kInvalidArgument, "window and hop must cover at least one sample");
  }
  return g;
}

std::size_t FrameCount(std::size_t n, const FrameGeometry& geometry) {
  if (geometry.window == 0 || geometry.hop == 0) {
    throw Error(ErrorCode::kInvalidArgument, "window and hop must be positive");
  }
  if (n < geometry.window) {
    throw Error(ErrorCode::kInvalidArgument, "signal of " + std::to_string(n) +
                                                 " samples is shorter than one window (" +
                                                 std::to_string(geometry.window) + ")");
  }
  return (n - geometry.window) / geometry.hop + 1;
}

std::vector<MatrixXfR> Frame(const Recording& recording, double hop_ms, double window_ms) {
  const FrameGeometry g = FrameGeometry::FromMs(recording.fs, hop_ms, window_ms);
  const std::size_t count = FrameCount(recording.length(), g);
  std::vector<MatrixXfR> frames;
  frames.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    frames.emplace_back(recording.samples.middleCols(static_cast<Eigen::Index>(t * g.hop),
                                                     static_cast<Eigen::Index>(g.window)));
  }
  return frames;
}

// ---------------------------------------------------------------------------
// Spectral features
// ---------------------------------------------------------------------------

std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> HannWindow(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

FeatureSequence EmgBandPower(const Recording& recording, const BandLayout& layout,
                             double hop_ms, double window_ms) {
  layout.Validate();
  const FrameGeometry g = FrameGeometry::FromMs(recording.fs, hop_ms, window_ms);
  const std::size_t count = FrameCount(recording.length(), g);
  const std::size_t nfft = NextPowerOfTwo(g.window);
  const double resolution = recording.fs / static_cast<double>(nfft);
  if (layout.edges.back().hi > recording.fs / 2.0) {
    throw Error(ErrorCode::kInvalidArgument, "bands extend beyond the Nyquist frequency");
  }
  for (const Band& band : layout.edges) {
    if (resolution > band.hi - band.lo) {
      throw Error(ErrorCode::kInvalidArgument,
                  "window too short: FFT resolution " + std::to_string(resolution) +
                      " Hz exceeds band width " + std::to_string(band.hi - band.lo) + " Hz");
    }
  }

  // Bin -> band, lowest band wins on shared edges.
  const std::size_t bands = layout.size();
  std::vector<int> band_of(nfft / 2 + 1, -1);
  std::vector<std::size_t> bins_in(bands, 0);
  for (std::size_t k = 0; k <= nfft / 2; ++k) {
    const double f = static_cast<double>(k) * resolution;
    for (std::size_t b = 0; b < bands; ++b) {
      if (layout.edges[b].lo <= f && f <= layout.edges[b].hi) {
        band_of[k] = static_cast<int>(b);
        ++bins_in[b];
        break;
      }
    }
  }
  for (std::size_t b = 0; b < bands; ++b) {
    if (bins_in[b] == 0) {
      throw Error(ErrorCode::kInvalidArgument, "band " + std::to_string(b) + " contains no FFT bins");
    }
  }

  const std::vector<double> window = HannWindow(g.window);
  const double scale = 1.0 / (static_cast<double>(nfft) * static_cast<double>(g.window));
  const std::size_t channels = recording.channels();

  FeatureSequence out;
  out.kind = FeatureKind::kVecB;
  out.hop_ms = hop_ms;
  out.window_ms = window_ms;
  out.electrodes = static_cast<std::uint32_t>(channels);
  out.bands = static_cast<std::uint32_t>(bands);
  out.frames.setZero(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(channels * bands));

  RealFft fft(nfft);
  std::vector<double> power;
  std::vector<double> sums(bands);
  for (std::size_t t = 0; t < count; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      double* in = fft.input();
      for (std::size_t i = 0; i < nfft; ++i) {
        in[i] = i < g.window ? window[i] * recording.samples(static_cast<Eigen::Index>(c),
                                                             static_cast<Eigen::Index>(t * g.hop + i))
                             : 0.0;
      }
      fft.PowerSpectrum(power, scale);
      std::fill(sums.begin(), sums.end(), 0.0);
      for (std::size_t k = 0; k < power.size(); ++k) {
        if (band_of[k] >= 0) sums[static_cast<std::size_t>(band_of[k])] += power[k];
      }
      for (std::size_t b = 0; b < bands; ++b) {
        out.frames(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c * bands + b)) =
            static_cast<float>(sums[b] / static_cast<double>(bins_in[b]));
      }
    }
  }
  return out;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MatrixXdR MelFilterbank(std::size_t n_mels, std::size_t nfft, double fs, double f_min,
                        double f_max) {
  if (n_mels == 0) throw Error(ErrorCode::kInvalidArgument, "n_mels must be >= 1");
  if (f_max > fs / 2.0) throw Error(ErrorCode::kInvalidArgument, "f_max exceeds fs/2");
  if (!(0.0 <= f_min && f_min < f_max)) throw Error(ErrorCode::kInvalidArgument, "need 0 <= f_min < f_max");
  const double mel_lo = HzToMel(f_min);
  const double mel_hi = HzToMel(f_max);
  std::vector<double> points(n_mels + 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i] = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1);
  }
  const std::size_t bins = nfft / 2 + 1;
  MatrixXdR fb = MatrixXdR::Zero(static_cast<Eigen::Index>(n_mels), static_cast<Eigen::Index>(bins));
  for (std::size_t b = 0; b < n_mels; ++b) {
    const double left = points[b];
    const double centre = points[b + 1];
    const double right = points[b + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double m = HzToMel(static_cast<double>(k) * fs / static_cast<double>(nfft));
      double w = 0.0;
      if (m > left && m <= centre) {
        w = (m - left) / (centre - left);
      } else if (m > centre && m < right) {
        w = (right - m) / (right - centre);
      }
      fb(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(k)) = w;
    }
    const double total = fb.row(static_cast<Eigen::Index>(b)).sum();
    if (total > 0.0) fb.row(static_cast<Eigen::Index>(b)) /= total;
  }
  return fb;
}

FeatureSequence MelSpectrogram(std::span<const float> audio, double fs, const MelConfig& config) {
  if (audio.empty()) throw Error(ErrorCode::kInvalidArgument, "audio is empty");
  const double f_max = config.f_max > 0.0 ? config.f_max : fs / 2.0;
  const FrameGeometry g = FrameGeometry::FromMs(fs, config.hop_ms, config.window_ms);
  const std::size_t nfft = NextPowerOfTwo(g.window);
  const MatrixXdR fb = MelFilterbank(config.n_mels, nfft, fs, config.f_min, f_max);

  // Short clips are zero-padded to a single window.
  const std::size_t n = std::max(audio.size(), g.window);
  const std::size_t count = FrameCount(n, g);
  const std::vector<double> window = HannWindow(g.window);
  const double scale = 1.0 / (static_cast<double>(nfft) * static_cast<double>(g.window));

  FeatureSequence out;
  out.kind = FeatureKind::kMelA;
  out.hop_ms = config.hop_ms;
  out.window_ms = config.window_ms;
  out.frames.setZero(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(config.n_mels));

  RealFft fft(nfft);
  std::vector<double> power;
  for (std::size_t t = 0; t < count; ++t) {
    double* in = fft.input();
    for (std::size_t i = 0; i < nfft; ++i) {
      const std::size_t idx = t * g.hop + i;
      in[i] = (i < g.window && idx < audio.size()) ? window[i] * audio[idx] : 0.0;
    }
    fft.PowerSpectrum(power, scale);
    const Eigen::Map<const Eigen::VectorXd> spectrum(power.data(), static_cast<Eigen::Index>(power.size()));
    const Eigen::VectorXd mel = fb * spectrum;
    out.frames.row(static_cast<Eigen::Index>(t)) = mel.cast<float>().transpose();
  }
  return out;
}

}  // namespace emgspeech
