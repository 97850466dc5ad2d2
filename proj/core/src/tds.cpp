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

#include "emgspeech/tds.hpp"

#include "binary_io.hpp"
#include "emgspeech/ctc.hpp"
#include "emgspeech/error.hpp"
#include "emgspeech/rng.hpp"
#include "emgspeech/signal_io.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

namespace emgspeech {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr std::array<int, 3> kShifts = {-1, 0, 1};

std::size_t Mod(long value, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((value % m) + m) % m);
}

}  // namespace

// ---------------------------------------------------------------------------
// Architecture and layouts
// ---------------------------------------------------------------------------

std::size_t TdsArch::ParameterCount() const { return ParamLayout(*this).total; }

void TdsArch::Validate() const {
  if (d_in == 0 || hidden == 0 || kernel == 0) {
    throw Error(ErrorCode::kInvalidArgument, "model dimensions must be positive");
  }
  if (classes < 2) throw Error(ErrorCode::kInvalidArgument, "model needs at least one symbol plus blank");
  if (ReceptiveField() > kMaxReceptiveField) {
    throw Error(ErrorCode::kInvalidArgument, "receptive field " + std::to_string(ReceptiveField()) +
                                                 " frames exceeds " + std::to_string(kMaxReceptiveField));
  }
  const ChannelLayout layout = ChannelLayout::For(kind, electrodes, bands);
  if (layout.dim() != d_in) {
    throw Error(ErrorCode::kDimensionMismatch, "input dim " + std::to_string(d_in) +
                                                   " does not match the electrode layout (" +
                                                   std::to_string(layout.dim()) + ")");
  }
}

ChannelLayout ChannelLayout::For(FeatureKind kind, std::uint32_t electrodes, std::uint32_t bands) {
  ChannelLayout layout;
  layout.kind_ = kind;
  layout.electrodes_ = electrodes;
  switch (kind) {
    case FeatureKind::kDiagE:
      layout.sub_ = 1;
      layout.dim_ = electrodes;
      break;
    case FeatureKind::kVecB:
      layout.sub_ = bands;
      layout.dim_ = static_cast<std::size_t>(electrodes) * bands;
      break;
    case FeatureKind::kVecE:
      layout.sub_ = electrodes;
      layout.dim_ = static_cast<std::size_t>(electrodes) * electrodes;
      break;
    default:
      throw Error(ErrorCode::kInvalidArgument,
                  "no electrode layout for feature kind " + std::string(FeatureKindName(kind)));
  }
  if (electrodes == 0 || layout.dim_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "electrode layout needs V >= 1 (and B >= 1 for vec-b)");
  }
  return layout;
}

std::vector<std::size_t> ChannelLayout::Permutation(int shift) const {
  std::vector<std::size_t> source(dim_);
  const std::size_t v = electrodes_;
  if (kind_ == FeatureKind::kVecE) {
    for (std::size_t i = 0; i < v; ++i) {
      for (std::size_t j = 0; j < v; ++j) {
        source[i * v + j] = Mod(static_cast<long>(i) - shift, v) * v + Mod(static_cast<long>(j) - shift, v);
      }
    }
    return source;
  }
  for (std::size_t e = 0; e < v; ++e) {
    for (std::size_t b = 0; b < sub_; ++b) source[e * sub_ + b] = Mod(static_cast<long>(e) - shift, v) * sub_ + b;
  }
  return source;
}

ParamLayout::ParamLayout(const TdsArch& arch) {
  const std::size_t h = arch.hidden;
  std::size_t off = 0;
  auto take = [&off](std::size_t n) {
    const std::size_t at = off;
    off += n;
    return at;
  };
  rot_w = take(h * arch.d_in);
  rot_b = take(h);
  for (std::size_t b = 0; b < arch.blocks; ++b) {
    Block blk{};
    blk.conv_k = take(h * arch.kernel);
    blk.conv_b = take(h);
    blk.ln1_g = take(h);
    blk.ln1_b = take(h);
    blk.w1 = take(2 * h * h);
    blk.b1 = take(2 * h);
    blk.w2 = take(h * 2 * h);
    blk.b2 = take(h);
    blk.ln2_g = take(h);
    blk.ln2_b = take(h);
    blocks.push_back(blk);
  }
  out_w = take(arch.classes * h);
  out_b = take(arch.classes);
  total = off;
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

template <typename Scalar>
struct TdsModel<Scalar>::Cache {
  struct Block {
    Matrix input;     // u
    Matrix conv;      // pre-activation of the depthwise conv
    Matrix ln1_xhat;
    Vector ln1_inv;
    Matrix v;         // LN1 output
    Matrix m1;        // first MLP pre-activation
    Matrix q;         // ReLU(m1)
    Matrix ln2_xhat;
    Vector ln2_inv;
  };
  std::array<Matrix, 3> shifted;
  std::array<Matrix, 3> pre;
  std::vector<Block> blocks;
  Matrix last;       // final block output
  Matrix log_probs;
};

namespace {

template <typename Scalar, typename Matrix, typename Vector>
Matrix LayerNormForward(const Matrix& x, const Scalar* gain, const Scalar* bias, Matrix& xhat, Vector& inv) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  xhat.resize(rows, cols);
  inv.resize(rows);
  Matrix y(rows, cols);
  for (Eigen::Index t = 0; t < rows; ++t) {
    const Scalar mean = x.row(t).mean();
    const Scalar var = (x.row(t).array() - mean).square().mean();
    const Scalar is = Scalar(1) / std::sqrt(var + Scalar(kLayerNormEps));
    inv(t) = is;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Scalar xh = (x(t, c) - mean) * is;
      xhat(t, c) = xh;
      y(t, c) = gain[c] * xh + bias[c];
    }
  }
  return y;
}

template <typename Scalar, typename Matrix, typename Vector>
Matrix LayerNormBackward(const Matrix& dy, const Matrix& xhat, const Vector& inv, const Scalar* gain,
                         Scalar* dgain, Scalar* dbias) {
  const Eigen::Index rows = dy.rows();
  const Eigen::Index cols = dy.cols();
  Matrix dx(rows, cols);
  std::vector<Scalar> dxhat(static_cast<std::size_t>(cols));
  for (Eigen::Index t = 0; t < rows; ++t) {
    Scalar mean_d = 0;
    Scalar mean_dx = 0;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Scalar g = dy(t, c);
      dgain[c] += g * xhat(t, c);
      dbias[c] += g;
      const Scalar d = g * gain[c];
      dxhat[static_cast<std::size_t>(c)] = d;
      mean_d += d;
      mean_dx += d * xhat(t, c);
    }
    mean_d /= static_cast<Scalar>(cols);
    mean_dx /= static_cast<Scalar>(cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      dx(t, c) = inv(t) * (dxhat[static_cast<std::size_t>(c)] - mean_d - xhat(t, c) * mean_dx);
    }
  }
  return dx;
}

}  // namespace

template <typename Scalar>
TdsModel<Scalar>::TdsModel(const TdsArch& arch)
    : arch_(arch), layout_(arch), channels_(ChannelLayout::For(arch.kind, arch.electrodes, arch.bands)) {
  arch_.Validate();
  for (int s : kShifts) shifts_.push_back(channels_.Permutation(s));
  params_.assign(layout_.total, Scalar(0));
  for (const auto& blk : layout_.blocks) {
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(blk.ln1_g), arch_.hidden, Scalar(1));
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(blk.ln2_g), arch_.hidden, Scalar(1));
  }
}

template <typename Scalar>
void TdsModel<Scalar>::InitializeRandom(std::uint64_t seed) {
  Rng rng(seed);
  std::fill(params_.begin(), params_.end(), Scalar(0));
  auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) params_[offset + i] = static_cast<Scalar>(rng.Uniform(-bound, bound));
  };
  const std::size_t h = arch_.hidden;
  fill(layout_.rot_w, h * arch_.d_in, arch_.d_in);
  for (const auto& blk : layout_.blocks) {
    fill(blk.conv_k, h * arch_.kernel, arch_.kernel);
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(blk.ln1_g), h, Scalar(1));
    fill(blk.w1, 2 * h * h, h);
    fill(blk.w2, 2 * h * h, 2 * h);
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(blk.ln2_g), h, Scalar(1));
  }
  fill(layout_.out_w, arch_.classes * h, h);
}

template <typename Scalar>
typename TdsModel<Scalar>::Matrix TdsModel<Scalar>::EncodeBranch(const Matrix& x, int shift) const {
  if (static_cast<std::size_t>(x.cols()) != arch_.d_in) {
    throw Error(ErrorCode::kDimensionMismatch, "input has d = " + std::to_string(x.cols()) +
                                                   ", model expects " + std::to_string(arch_.d_in));
  }
  const std::vector<std::size_t> source = channels_.Permutation(shift);
  Matrix shifted(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) shifted.col(i) = x.col(static_cast<Eigen::Index>(source[static_cast<std::size_t>(i)]));
  const Eigen::Map<const Matrix> w(params_.data() + layout_.rot_w, static_cast<Eigen::Index>(arch_.hidden),
                                   static_cast<Eigen::Index>(arch_.d_in));
  const Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>> b(params_.data() + layout_.rot_b,
                                                                       static_cast<Eigen::Index>(arch_.hidden));
  Matrix z = (shifted * w.transpose()).rowwise() + b;
  return z.cwiseMax(Scalar(0));
}

template <typename Scalar>
typename TdsModel<Scalar>::Matrix TdsModel<Scalar>::Encode(const Matrix& x) const {
  Matrix out = EncodeBranch(x, kShifts[0]);
  out += EncodeBranch(x, kShifts[1]);
  out += EncodeBranch(x, kShifts[2]);
  return out / Scalar(3);
}

template <typename Scalar>
typename TdsModel<Scalar>::Matrix TdsModel<Scalar>::ForwardImpl(const Matrix& x, Cache* cache) const {
  const auto frames = x.rows();
  const auto h = static_cast<Eigen::Index>(arch_.hidden);
  const auto d_in = static_cast<Eigen::Index>(arch_.d_in);
  const auto kernel = static_cast<Eigen::Index>(arch_.kernel);
  if (frames < 1) throw Error(ErrorCode::kInvalidArgument, "input has no frames");
  if (x.cols() != d_in) {
    throw Error(ErrorCode::kDimensionMismatch, "input has d = " + std::to_string(x.cols()) +
                                                   ", model expects " + std::to_string(d_in));
  }
  const Scalar* p = params_.data();
  using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  // Rotation-invariant encoder.
  const Eigen::Map<const Matrix> w_rot(p + layout_.rot_w, h, d_in);
  const Eigen::Map<const RowVec> b_rot(p + layout_.rot_b, h);
  Matrix u = Matrix::Zero(frames, h);
  for (std::size_t s = 0; s < kShifts.size(); ++s) {
    Matrix shifted(frames, d_in);
    const auto& source = shifts_[s];
    for (Eigen::Index i = 0; i < d_in; ++i) shifted.col(i) = x.col(static_cast<Eigen::Index>(source[static_cast<std::size_t>(i)]));
    Matrix pre = (shifted * w_rot.transpose()).rowwise() + b_rot;
    u += pre.cwiseMax(Scalar(0));
    if (cache) {
      cache->shifted[s] = std::move(shifted);
      cache->pre[s] = std::move(pre);
    }
  }
  u /= Scalar(3);

  if (cache) cache->blocks.resize(layout_.blocks.size());
  for (std::size_t bi = 0; bi < layout_.blocks.size(); ++bi) {
    const auto& blk = layout_.blocks[bi];
    // Depthwise causal convolution; kernel tap j looks back kernel - 1 - j frames.
    const Scalar* k = p + blk.conv_k;
    Matrix conv(frames, h);
    for (Eigen::Index t = 0; t < frames; ++t) {
      for (Eigen::Index c = 0; c < h; ++c) conv(t, c) = p[blk.conv_b + static_cast<std::size_t>(c)];
      for (Eigen::Index j = 0; j < kernel; ++j) {
        const Eigen::Index src = t - (kernel - 1) + j;
        if (src < 0) continue;
        for (Eigen::Index c = 0; c < h; ++c) conv(t, c) += k[c * kernel + j] * u(src, c);
      }
    }
    Matrix ln1_xhat;
    Vector ln1_inv;
    Matrix v = LayerNormForward<Scalar>(Matrix(u + conv.cwiseMax(Scalar(0))), p + blk.ln1_g, p + blk.ln1_b,
                                        ln1_xhat, ln1_inv);

    const Eigen::Map<const Matrix> w1(p + blk.w1, 2 * h, h);
    const Eigen::Map<const RowVec> b1(p + blk.b1, 2 * h);
    const Eigen::Map<const Matrix> w2(p + blk.w2, h, 2 * h);
    const Eigen::Map<const RowVec> b2(p + blk.b2, h);
    Matrix m1 = (v * w1.transpose()).rowwise() + b1;
    Matrix q = m1.cwiseMax(Scalar(0));
    Matrix p2 = v + ((q * w2.transpose()).rowwise() + b2);
    Matrix ln2_xhat;
    Vector ln2_inv;
    Matrix out = LayerNormForward<Scalar>(p2, p + blk.ln2_g, p + blk.ln2_b, ln2_xhat, ln2_inv);

    if (cache) {
      auto& c = cache->blocks[bi];
      c.input = std::move(u);
      c.conv = std::move(conv);
      c.ln1_xhat = std::move(ln1_xhat);
      c.ln1_inv = std::move(ln1_inv);
      c.v = std::move(v);
      c.m1 = std::move(m1);
      c.q = std::move(q);
      c.ln2_xhat = std::move(ln2_xhat);
      c.ln2_inv = std::move(ln2_inv);
    }
    u = std::move(out);
  }

  const auto classes = static_cast<Eigen::Index>(arch_.classes);
  const Eigen::Map<const Matrix> w_out(p + layout_.out_w, classes, h);
  const Eigen::Map<const RowVec> b_out(p + layout_.out_b, classes);
  Matrix logits = (u * w_out.transpose()).rowwise() + b_out;
  for (Eigen::Index t = 0; t < frames; ++t) {
    const Scalar hi = logits.row(t).maxCoeff();
    const Scalar lse = hi + std::log((logits.row(t).array() - hi).exp().sum());
    logits.row(t).array() -= lse;
  }
  if (cache) {
    cache->last = std::move(u);
    cache->log_probs = logits;
  }
  return logits;
}

template <typename Scalar>
typename TdsModel<Scalar>::Matrix TdsModel<Scalar>::Forward(const Matrix& x) const {
  return ForwardImpl(x, nullptr);
}

template <typename Scalar>
Scalar TdsModel<Scalar>::Loss(const Matrix& x, const std::vector<std::int32_t>& target) const {
  const Matrix log_probs = Forward(x);
  const auto ctc = CtcLoss<Scalar>(log_probs, target);
  if (!ctc.feasible) return std::numeric_limits<Scalar>::infinity();
  return ctc.loss / static_cast<Scalar>(std::max<std::size_t>(1, target.size()));
}

template <typename Scalar>
Scalar TdsModel<Scalar>::LossAndGradient(const Matrix& x, const std::vector<std::int32_t>& target,
                                         std::vector<Scalar>& grad, Scalar scale) const {
  if (grad.size() != params_.size()) grad.assign(params_.size(), Scalar(0));
  Cache cache;
  ForwardImpl(x, &cache);
  const auto ctc = CtcLoss<Scalar>(cache.log_probs, target);
  if (!ctc.feasible) return std::numeric_limits<Scalar>::infinity();
  const Scalar norm = Scalar(1) / static_cast<Scalar>(std::max<std::size_t>(1, target.size()));
  const Scalar loss = ctc.loss * norm;

  const auto frames = x.rows();
  const auto h = static_cast<Eigen::Index>(arch_.hidden);
  const auto d_in = static_cast<Eigen::Index>(arch_.d_in);
  const auto kernel = static_cast<Eigen::Index>(arch_.kernel);
  const auto classes = static_cast<Eigen::Index>(arch_.classes);
  const Scalar* p = params_.data();
  Scalar* g = grad.data();
  using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  // Through log-softmax: d logits = d logp - softmax * rowsum(d logp).
  Matrix dlogits = ctc.grad * (norm * scale);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const Scalar total = dlogits.row(t).sum();
    dlogits.row(t).array() -= cache.log_probs.row(t).array().exp() * total;
  }
  const Eigen::Map<const Matrix> w_out(p + layout_.out_w, classes, h);
  Eigen::Map<Matrix>(g + layout_.out_w, classes, h).noalias() += dlogits.transpose() * cache.last;
  Eigen::Map<RowVec>(g + layout_.out_b, classes) += dlogits.colwise().sum();
  Matrix du = dlogits * w_out;

  for (std::size_t bi = layout_.blocks.size(); bi-- > 0;) {
    const auto& blk = layout_.blocks[bi];
    const auto& c = cache.blocks[bi];
    Matrix dp2 = LayerNormBackward<Scalar>(du, c.ln2_xhat, c.ln2_inv, p + blk.ln2_g, g + blk.ln2_g, g + blk.ln2_b);

    const Eigen::Map<const Matrix> w1(p + blk.w1, 2 * h, h);
    const Eigen::Map<const Matrix> w2(p + blk.w2, h, 2 * h);
    Eigen::Map<Matrix>(g + blk.w2, h, 2 * h).noalias() += dp2.transpose() * c.q;
    Eigen::Map<RowVec>(g + blk.b2, h) += dp2.colwise().sum();
    Matrix dm1 = dp2 * w2;
    dm1.array() *= (c.m1.array() > Scalar(0)).template cast<Scalar>();
    Eigen::Map<Matrix>(g + blk.w1, 2 * h, h).noalias() += dm1.transpose() * c.v;
    Eigen::Map<RowVec>(g + blk.b1, 2 * h) += dm1.colwise().sum();
    Matrix dv = dp2 + dm1 * w1;

    Matrix dp = LayerNormBackward<Scalar>(dv, c.ln1_xhat, c.ln1_inv, p + blk.ln1_g, g + blk.ln1_g, g + blk.ln1_b);
    Matrix dconv = dp;
    dconv.array() *= (c.conv.array() > Scalar(0)).template cast<Scalar>();
    Matrix dinput = dp;
    const Scalar* k = p + blk.conv_k;
    Scalar* dk = g + blk.conv_k;
    Scalar* db = g + blk.conv_b;
    for (Eigen::Index t = 0; t < frames; ++t) {
      for (Eigen::Index ch = 0; ch < h; ++ch) db[ch] += dconv(t, ch);
      for (Eigen::Index j = 0; j < kernel; ++j) {
        const Eigen::Index src = t - (kernel - 1) + j;
        if (src < 0) continue;
        for (Eigen::Index ch = 0; ch < h; ++ch) {
          dk[ch * kernel + j] += dconv(t, ch) * c.input(src, ch);
          dinput(src, ch) += k[ch * kernel + j] * dconv(t, ch);
        }
      }
    }
    du = std::move(dinput);
  }

  du /= Scalar(3);
  Eigen::Map<Matrix> dw_rot(g + layout_.rot_w, h, d_in);
  Eigen::Map<RowVec> db_rot(g + layout_.rot_b, h);
  for (std::size_t s = 0; s < kShifts.size(); ++s) {
    Matrix dz = du;
    dz.array() *= (cache.pre[s].array() > Scalar(0)).template cast<Scalar>();
    dw_rot.noalias() += dz.transpose() * cache.shifted[s];
    db_rot += dz.colwise().sum();
  }
  return loss;
}

template class TdsModel<float>;
template class TdsModel<double>;

// ---------------------------------------------------------------------------
// Receptive field probe
// ---------------------------------------------------------------------------

ReceptiveFieldProbe ProbeReceptiveField(const TdsModel<double>& model, std::size_t frames, std::uint64_t seed) {
  using Matrix = TdsModel<double>::Matrix;
  Rng rng(seed);
  Matrix x(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(model.arch().d_in));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Normal();
  const Matrix base = model.Forward(x);
  ReceptiveFieldProbe probe;
  for (std::size_t t = 0; t < frames; ++t) {
    Matrix perturbed = x;
    for (Eigen::Index c = 0; c < x.cols(); ++c) perturbed(static_cast<Eigen::Index>(t), c) += 1.0 + rng.Normal();
    const Matrix out = model.Forward(perturbed);
    for (std::size_t r = 0; r < frames; ++r) {
      const bool changed = (out.row(static_cast<Eigen::Index>(r)).array() !=
                            base.row(static_cast<Eigen::Index>(r)).array()).any();
      if (!changed) continue;
      if (r < t) {
        probe.causal = false;
      } else {
        probe.receptive_field = std::max(probe.receptive_field, r - t + 1);
      }
    }
  }
  return probe;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

void SaveCheckpoint(const TdsModel<float>& model, std::uint64_t vocab_hash, std::uint64_t seed,
                    const std::filesystem::path& path) {
  const TdsArch& a = model.arch();
  detail::ByteWriter w;
  w.PutBytes("EMGS", 4);
  w.Put<std::uint16_t>(kContainerVersion);
  w.Put<std::uint16_t>(static_cast<std::uint16_t>(ContainerType::kCheckpoint));
  w.Put<std::uint16_t>(static_cast<std::uint16_t>(a.kind));
  w.Put<std::uint16_t>(static_cast<std::uint16_t>(PayloadType::kFloat32));
  for (std::size_t v : {a.d_in, a.hidden, a.blocks, a.kernel, a.classes}) w.Put<std::uint32_t>(static_cast<std::uint32_t>(v));
  w.Put<std::uint32_t>(a.electrodes);
  w.Put<std::uint32_t>(a.bands);
  w.Put<std::uint64_t>(vocab_hash);
  w.Put<std::uint64_t>(seed);
  w.Put<std::uint64_t>(model.params().size() * sizeof(float));
  detail::AppendPayload(w, model.params().data(), model.params().size());
  detail::WriteFileBytes(path, w.bytes());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  const auto bytes = detail::ReadFileBytes(path);
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), "EMGS", 4) != 0) {
    throw Error(ErrorCode::kMalformedHeader, path.string() + ": not a checkpoint");
  }
  detail::ByteReader r(bytes);
  r.Skip(4);
  if (r.Get<std::uint16_t>() != kContainerVersion ||
      r.Get<std::uint16_t>() != static_cast<std::uint16_t>(ContainerType::kCheckpoint)) {
    throw Error(ErrorCode::kMalformedHeader, path.string() + ": not a version-1 checkpoint");
  }
  TdsArch a;
  const auto kind = r.Get<std::uint16_t>();
  if (kind < 1 || kind > 5) throw Error(ErrorCode::kMalformedHeader, "checkpoint has unknown feature kind");
  a.kind = static_cast<FeatureKind>(kind);
  if (r.Get<std::uint16_t>() != static_cast<std::uint16_t>(PayloadType::kFloat32)) {
    throw Error(ErrorCode::kMalformedHeader, "checkpoint payload must be float32");
  }
  a.d_in = r.Get<std::uint32_t>();
  a.hidden = r.Get<std::uint32_t>();
  a.blocks = r.Get<std::uint32_t>();
  a.kernel = r.Get<std::uint32_t>();
  a.classes = r.Get<std::uint32_t>();
  a.electrodes = r.Get<std::uint32_t>();
  a.bands = r.Get<std::uint32_t>();
  const auto vocab_hash = r.Get<std::uint64_t>();
  const auto seed = r.Get<std::uint64_t>();
  const auto payload = r.Get<std::uint64_t>();
  TdsModel<float> model(a);
  if (payload != model.params().size() * sizeof(float) || bytes.size() - kHeaderBytes != payload) {
    throw Error(ErrorCode::kSizeMismatch, path.string() + ": parameter count does not match architecture");
  }
  detail::ExtractPayload(bytes, kHeaderBytes, model.params().data(), model.params().size());
  return Checkpoint{std::move(model), vocab_hash, seed};
}

}  // namespace emgspeech
