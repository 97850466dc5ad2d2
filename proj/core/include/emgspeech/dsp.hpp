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

#pragma once

#include "emgspeech/signal_io.hpp"
#include "emgspeech/types.hpp"

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace emgspeech {

// ---------------------------------------------------------------------------
// Band layouts
// ---------------------------------------------------------------------------

struct Band {
  double lo = 0.0;
  double hi = 0.0;
};

enum class BandMode { kLog5, kLin31 };

struct BandLayout {
  std::vector<Band> edges;
  BandMode mode = BandMode::kLog5;

  /// 80-125, 125-250, 250-375, 375-687.5, 687.5-1000 Hz.
  static BandLayout Log5();
  /// 31 equal-width bands spanning 80-1000 Hz.
  static BandLayout Lin31();

  std::size_t size() const { return edges.size(); }
  void Validate() const;
};

// ---------------------------------------------------------------------------
// Butterworth bandpass
// ---------------------------------------------------------------------------

struct FilterSpec {
  int order = 3;
  double f_lo = 80.0;
  double f_hi = 1000.0;
  double fs = 5000.0;

  void Validate() const;
};

/// One biquad: b0 + b1 z^-1 + b2 z^-2 over 1 + a1 z^-1 + a2 z^-2.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 2> a{};
};

/// Digital Butterworth bandpass as a cascade of `order` biquads, designed by
/// the bilinear transform with pre-warped band edges and normalized to unit
/// gain at the geometric centre frequency.
class ButterworthBandpass {
 public:
  explicit ButterworthBandpass(const FilterSpec& spec);

  const std::vector<Biquad>& sections() const { return sections_; }
  const FilterSpec& spec() const { return spec_; }

  /// Complex single-pass response at frequency `hz`.
  std::complex<double> Response(double hz) const;

  /// Causal single pass with optional per-section initial state (two values
  /// per section, transposed direct form II).
  void Filter(std::span<double> signal, std::span<const double> initial_state = {}) const;

  /// Zero-phase forward-backward filtering with odd extension of `PadLength()`
  /// samples at each end and steady-state initial conditions. Output length
  /// equals input length; the magnitude response is |H(f)|^2.
  void FiltFilt(std::span<double> signal) const;

  /// Warm-up length: 3 x order x 2 samples. Signals must be strictly longer.
  std::size_t PadLength() const { return static_cast<std::size_t>(6 * spec_.order); }

  /// Initial state making the cascade's step response start at steady state.
  std::vector<double> SteadyStateInitial() const;

 private:
  FilterSpec spec_;
  std::vector<Biquad> sections_;
};

// ---------------------------------------------------------------------------
// Recording preprocessing
// ---------------------------------------------------------------------------

/// x_v(t) - x_ref(t) for every data channel; the reference row is dropped.
Recording SubtractReference(const Recording& recording);

/// Zero-phase Butterworth bandpass applied to every channel.
Recording Bandpass(const Recording& recording, const FilterSpec& spec);

/// One recording per segment, samples [start, end).
std::vector<Recording> SplitSegments(const Recording& recording);

// ---------------------------------------------------------------------------
// Framing
// ---------------------------------------------------------------------------

struct FrameGeometry {
  std::size_t window = 0;  // samples
  std::size_t hop = 0;     // samples

  static FrameGeometry FromMs(double fs, double hop_ms, double window_ms);
};

/// floor((n - window) / hop) + 1; throws if n < window.
std::size_t FrameCount(std::size_t n, const FrameGeometry& geometry);

/// Frame t covers samples [t*hop, t*hop + window). No padding.
std::vector<MatrixXfR> Frame(const Recording& recording, double hop_ms = 20.0,
                             double window_ms = 25.0);

// ---------------------------------------------------------------------------
// Spectral features
// ---------------------------------------------------------------------------

std::size_t NextPowerOfTwo(std::size_t n);

/// Periodic Hann window of length n.
std::vector<double> HannWindow(std::size_t n);

/// Per-frame band powers of every channel, flattened channel-major (d = V*B).
/// The per-bin power is |FFT(hann * x)|^2 / (nfft * window) over the one-sided
/// spectrum, so the sum over bins never exceeds the frame's mean-square power.
/// A bin belongs to the lowest-index band with lo <= f <= hi.
FeatureSequence EmgBandPower(const Recording& recording, const BandLayout& layout,
                             double hop_ms = 20.0, double window_ms = 25.0);

struct MelConfig {
  std::size_t n_mels = 80;
  double f_min = 20.0;
  double f_max = 0.0;  // 0 means fs / 2
  double hop_ms = 20.0;
  double window_ms = 25.0;
};

double HzToMel(double hz);
double MelToHz(double mel);

/// HTK-scale triangular filters over the one-sided bins of an nfft-point FFT.
/// Each row is scaled to sum to one (rows with no bins stay zero).
MatrixXdR MelFilterbank(std::size_t n_mels, std::size_t nfft, double fs, double f_min,
                        double f_max);

/// Hann-windowed STFT power projected onto the mel filterbank.
FeatureSequence MelSpectrogram(std::span<const float> audio, double fs,
                               const MelConfig& config = {});

}  // namespace emgspeech
