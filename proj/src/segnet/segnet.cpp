#include "lge/segnet.hpp"

#include <Eigen/Core>
#include <bit>
#include <cmath>

#include "lge/errors.hpp"

namespace lge::segnet {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

// Column matrix (in*k*k) x (H*W) for a stride-1 "same" convolution.
RowMat im2col(const Grid& in, int k) {
  const int pad = k / 2;
  const int h = in.height;
  const int w = in.width;
  RowMat col = RowMat::Zero(static_cast<Eigen::Index>(in.channels) * k * k,
                            static_cast<Eigen::Index>(h) * w);
  for (int c = 0; c < in.channels; ++c) {
    const double* src = in.values.data() + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        double* dst = col.row((c * k + ky) * k + kx).data();
        const int dy = ky - pad;
        const int dx = kx - pad;
        const int x0 = std::max(0, -dx);
        const int x1 = std::min(w, w - dx);
        for (int y = std::max(0, -dy); y < std::min(h, h - dy); ++y) {
          const double* s = src + (y + dy) * w + dx;
          double* d = dst + y * w;
          for (int x = x0; x < x1; ++x) d[x] = s[x];
        }
      }
    }
  }
  return col;
}

// Adjoint of im2col: scatter-add columns back onto an image gradient.
Grid col2im(const RowMat& col, int channels, int h, int w, int k) {
  const int pad = k / 2;
  Grid out(channels, h, w);
  for (int c = 0; c < channels; ++c) {
    double* dst = out.values.data() + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const double* src = col.row((c * k + ky) * k + kx).data();
        const int dy = ky - pad;
        const int dx = kx - pad;
        const int x0 = std::max(0, -dx);
        const int x1 = std::min(w, w - dx);
        for (int y = std::max(0, -dy); y < std::min(h, h - dy); ++y) {
          double* d = dst + (y + dy) * w + dx;
          const double* s = src + y * w;
          for (int x = x0; x < x1; ++x) d[x] += s[x];
        }
      }
    }
  }
  return out;
}

Grid conv_forward(const Grid& in, const Grid& kernel, const Grid& bias, int k) {
  const int cout = kernel.channels;
  const RowMat col = im2col(in, k);
  Grid out(cout, in.height, in.width);
  ConstMapMat wmat(kernel.values.data(), cout, col.rows());
  MapMat omat(out.values.data(), cout, col.cols());
  omat.noalias() = wmat * col;
  for (int c = 0; c < cout; ++c) omat.row(c).array() += bias[c];
  return out;
}

// Accumulates kernel/bias gradients; returns the input gradient when wanted.
Grid conv_backward(const Grid& in, const Grid& kernel, const Grid& grad_out, int k,
                   Grid& grad_kernel, Grid& grad_bias, bool want_input) {
  const int cout = kernel.channels;
  const RowMat col = im2col(in, k);
  ConstMapMat gout(grad_out.values.data(), cout, col.cols());
  MapMat gk(grad_kernel.values.data(), cout, col.rows());
  gk.noalias() += gout * col.transpose();
  for (int c = 0; c < cout; ++c) grad_bias[c] += gout.row(c).sum();
  if (!want_input) return {};
  ConstMapMat wmat(kernel.values.data(), cout, col.rows());
  const RowMat gcol = wmat.transpose() * gout;
  return col2im(gcol, in.channels, in.height, in.width, k);
}

void relu_inplace(Grid& g) {
  for (double& v : g.values) v = v > 0.0 ? v : 0.0;
}

// Zero the gradient where the ReLU output was clamped.
void relu_backward_inplace(Grid& grad, const Grid& act) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(act[i] > 0.0)) grad[i] = 0.0;
  }
}

// 2x2 max pool, stride 2; ties go to the first element in row-major order.
Grid maxpool(const Grid& in, std::vector<int>& argmax) {
  const int h = in.height / 2;
  const int w = in.width / 2;
  Grid out(in.channels, h, w);
  argmax.assign(out.size(), 0);
  for (int c = 0; c < in.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        int best = (c * in.height + 2 * y) * in.width + 2 * x;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const int idx = (c * in.height + 2 * y + dy) * in.width + 2 * x + dx;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (static_cast<std::size_t>(c) * h + y) * w + x;
        out[o] = in[best];
        argmax[o] = best;
      }
    }
  }
  return out;
}

Grid maxpool_backward(const Grid& grad_out, const std::vector<int>& argmax,
                      int channels, int h, int w) {
  Grid g(channels, h, w);
  for (std::size_t i = 0; i < grad_out.size(); ++i) g[argmax[i]] += grad_out[i];
  return g;
}

// Nearest x2 upsample of `low` written into channels [0, low.channels) of a
// concatenation whose remaining channels copy `skip`.
Grid upsample_concat(const Grid& low, const Grid& skip) {
  const int h = skip.height;
  const int w = skip.width;
  Grid out(low.channels + skip.channels, h, w);
  for (int c = 0; c < low.channels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out(c, y, x) = low(c, y / 2, x / 2);
    }
  }
  std::copy(skip.values.begin(), skip.values.end(),
            out.values.begin() + static_cast<std::ptrdiff_t>(low.channels * out.plane()));
  return out;
}

// Splits a concatenation gradient: the upsampled part sums over each 2x2
// footprint, the skip part passes through.
void upsample_concat_backward(const Grid& grad, int low_channels, Grid& grad_low,
                              Grid& grad_skip) {
  const int h = grad.height;
  const int w = grad.width;
  grad_low = Grid(low_channels, h / 2, w / 2);
  for (int c = 0; c < low_channels; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) grad_low(c, y / 2, x / 2) += grad(c, y, x);
    }
  }
  grad_skip = Grid(grad.channels - low_channels, h, w);
  std::copy(grad.values.begin() + static_cast<std::ptrdiff_t>(low_channels * grad.plane()),
            grad.values.end(), grad_skip.values.begin());
}

void add_inplace(Grid& a, const Grid& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

}  // namespace

ModelParams ModelParams::zeros() {
  ModelParams p;
  p.tensors.reserve(kTensorCount);
  for (const auto& l : kLayers) {
    p.tensors.emplace_back(l.out_channels, l.in_channels, l.kernel * l.kernel);
    p.tensors.emplace_back(l.out_channels, 1, 1);
  }
  return p;
}

std::size_t ModelParams::count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(count());
  for (const auto& t : tensors) flat.insert(flat.end(), t.values.begin(), t.values.end());
  return flat;
}

void ModelParams::assign(std::span<const double> flat) {
  if (flat.size() != count()) {
    throw InvalidArgument("ModelParams::assign: expected " + std::to_string(count()) +
                          " values, got " + std::to_string(flat.size()));
  }
  std::size_t k = 0;
  for (auto& t : tensors) {
    for (double& v : t.values) v = flat[k++];
  }
}

void ModelParams::quantize_to_float() {
  for (auto& t : tensors) {
    for (double& v : t.values) v = static_cast<float>(v);
  }
}

std::array<bool, kTensorCount> ModelParams::decay_mask() {
  std::array<bool, kTensorCount> mask{};
  for (int i = 0; i < kTensorCount; ++i) mask[i] = i % 2 == 0;
  return mask;
}

std::string ModelParams::tensor_name(int index) {
  return std::string(kLayers[index / 2].name) + (index % 2 == 0 ? ".kernel" : ".bias");
}

std::uint64_t ModelParams::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& t : tensors) {
    for (double v : t.values) {
      h ^= std::bit_cast<std::uint64_t>(v);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

ModelParams init_params(PrngStream& stream) {
  ModelParams p = ModelParams::zeros();
  for (std::size_t l = 0; l < kLayers.size(); ++l) {
    const auto& spec = kLayers[l];
    const double fan_in = spec.in_channels * spec.kernel * spec.kernel;
    const double bound = std::sqrt(6.0 / fan_in);
    for (double& v : p.kernel(static_cast<int>(l)).values) v = stream.uniform(-bound, bound);
  }
  return p;
}

ForwardResult forward(const ModelParams& params, const Grid& image, const Grid& myo,
                      int size) {
  if (size < 4 || size % 4 != 0) {
    throw InvalidArgument("segnet forward: size must be a positive multiple of 4");
  }
  for (const Grid* g : {&image, &myo}) {
    if (g->channels != 1 || g->height != size || g->width != size) {
      throw InvalidArgument("segnet forward: expected 1x" + std::to_string(size) + "x" +
                            std::to_string(size) + " input, got " + g->shape_string());
    }
  }
  if (params.tensors.size() != static_cast<std::size_t>(kTensorCount) ||
      params.count() != kParamCount) {
    throw InvalidArgument("segnet forward: parameter layout does not match the architecture");
  }

  ForwardResult r;
  ForwardTrace& t = r.trace;
  t.size = size;
  t.params_fingerprint = params.fingerprint();
  t.input = Grid(2, size, size);
  std::copy(image.values.begin(), image.values.end(), t.input.values.begin());
  std::copy(myo.values.begin(), myo.values.end(),
            t.input.values.begin() + static_cast<std::ptrdiff_t>(t.input.plane()));

  t.act1 = conv_forward(t.input, params.kernel(0), params.bias(0), 3);
  relu_inplace(t.act1);
  t.pool1 = maxpool(t.act1, t.pool1_argmax);
  t.act2 = conv_forward(t.pool1, params.kernel(1), params.bias(1), 3);
  relu_inplace(t.act2);
  t.pool2 = maxpool(t.act2, t.pool2_argmax);
  t.act3 = conv_forward(t.pool2, params.kernel(2), params.bias(2), 3);
  relu_inplace(t.act3);
  t.cat4 = upsample_concat(t.act3, t.act2);
  t.act4 = conv_forward(t.cat4, params.kernel(3), params.bias(3), 3);
  relu_inplace(t.act4);
  t.cat5 = upsample_concat(t.act4, t.act1);
  t.act5 = conv_forward(t.cat5, params.kernel(4), params.bias(4), 3);
  relu_inplace(t.act5);
  Grid logits = conv_forward(t.act5, params.kernel(5), params.bias(5), 1);
  t.prob = Grid(1, size, size);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    t.prob[i] = 1.0 / (1.0 + std::exp(-logits[i]));
  }
  r.prob = t.prob;
  return r;
}

Grid predict(const ModelParams& params, const Grid& image, const Grid& myo, int size) {
  return forward(params, image, myo, size).prob;
}

std::vector<Grid> backward(const ModelParams& params, const ForwardTrace& t,
                           const Grid& grad_prob) {
  if (t.size == 0 || t.params_fingerprint != params.fingerprint()) {
    throw InvalidState("segnet backward: trace does not belong to these parameters");
  }
  require_same_shape(grad_prob, t.prob, "segnet backward upstream gradient");

  std::vector<Grid> grads = ModelParams::zeros().tensors;
  auto gk = [&](int l) -> Grid& { return grads[2 * l]; };
  auto gb = [&](int l) -> Grid& { return grads[2 * l + 1]; };

  Grid g_logit(1, t.size, t.size);
  for (std::size_t i = 0; i < g_logit.size(); ++i) {
    const double y = t.prob[i];
    g_logit[i] = grad_prob[i] * y * (1.0 - y);
  }

  Grid g5 = conv_backward(t.act5, params.kernel(5), g_logit, 1, gk(5), gb(5), true);
  relu_backward_inplace(g5, t.act5);
  Grid g_cat5 = conv_backward(t.cat5, params.kernel(4), g5, 3, gk(4), gb(4), true);
  Grid g4;
  Grid g1_skip;
  upsample_concat_backward(g_cat5, kLayers[3].out_channels, g4, g1_skip);
  relu_backward_inplace(g4, t.act4);
  Grid g_cat4 = conv_backward(t.cat4, params.kernel(3), g4, 3, gk(3), gb(3), true);
  Grid g3;
  Grid g2_skip;
  upsample_concat_backward(g_cat4, kLayers[2].out_channels, g3, g2_skip);
  relu_backward_inplace(g3, t.act3);
  Grid g_pool2 = conv_backward(t.pool2, params.kernel(2), g3, 3, gk(2), gb(2), true);
  Grid g2 = maxpool_backward(g_pool2, t.pool2_argmax, t.act2.channels, t.act2.height,
                             t.act2.width);
  add_inplace(g2, g2_skip);
  relu_backward_inplace(g2, t.act2);
  Grid g_pool1 = conv_backward(t.pool1, params.kernel(1), g2, 3, gk(1), gb(1), true);
  Grid g1 = maxpool_backward(g_pool1, t.pool1_argmax, t.act1.channels, t.act1.height,
                             t.act1.width);
  add_inplace(g1, g1_skip);
  relu_backward_inplace(g1, t.act1);
  conv_backward(t.input, params.kernel(0), g1, 3, gk(0), gb(0), false);
  return grads;
}

}  // namespace lge::segnet
