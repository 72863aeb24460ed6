// SPDX-License-Identifier: Apache-2.0
#include "jppnet/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "jppnet/core/errors.hpp"

namespace jpp::nn {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

struct ConvGeometry {
  int c, h, w;     // input
  int o, kh, kw;   // filters
  int ho, wo;      // output
  ConvSpec spec;

  int k() const { return c * kh * kw; }
  int p() const { return ho * wo; }
  bool pointwise() const {
    return kh == 1 && kw == 1 && spec.stride == 1 && spec.pad == 0;
  }
  // Output columns ox whose input column ox * stride - pad + offset lies in [0, size).
  std::pair<int, int> valid_range(int offset, int size, int out) const {
    const int s = spec.stride;
    int lo = 0;
    const int need = spec.pad - offset;  // ox * s >= need
    if (need > 0) lo = (need + s - 1) / s;
    int hi = out;
    const int top = size - 1 + spec.pad - offset;  // ox * s <= top
    hi = top < 0 ? 0 : std::min(out, top / s + 1);
    return {lo, std::max(lo, hi)};
  }
};

template <typename T>
ConvGeometry conv_geometry(const Tensor<T>& x, const Tensor<T>& w, ConvSpec spec) {
  if (x.rank() != 3 || w.rank() != 4) {
    throw ShapeError("conv2d expects {C,H,W} input and {O,C,kh,kw} weights, got " +
                     x.shape_string() + " and " + w.shape_string());
  }
  if (x.dim(0) != w.dim(1)) {
    throw ShapeError("conv2d input has " + std::to_string(x.dim(0)) +
                     " channels but weights expect " + std::to_string(w.dim(1)));
  }
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), w.dim(0), w.dim(2), w.dim(3), 0, 0, spec};
  const int ekh = spec.dilation * (g.kh - 1) + 1;
  const int ekw = spec.dilation * (g.kw - 1) + 1;
  g.ho = (g.h + 2 * spec.pad - ekh) / spec.stride + 1;
  g.wo = (g.w + 2 * spec.pad - ekw) / spec.stride + 1;
  if (g.ho < 1 || g.wo < 1) {
    throw ShapeError("conv2d output would be empty for input " + x.shape_string());
  }
  return g;
}

template <typename T>
void im2col(const T* x, const ConvGeometry& g, T* col) {
  const int s = g.spec.stride, d = g.spec.dilation, pad = g.spec.pad;
  const std::size_t p = static_cast<std::size_t>(g.p());
  std::size_t row = 0;
  for (int c = 0; c < g.c; ++c) {
    const T* plane = x + static_cast<std::size_t>(c) * g.h * g.w;
    for (int ki = 0; ki < g.kh; ++ki) {
      const auto [ylo, yhi] = g.valid_range(ki * d, g.h, g.ho);
      for (int kj = 0; kj < g.kw; ++kj, ++row) {
        T* dst = col + row * p;
        const auto [xlo, xhi] = g.valid_range(kj * d, g.w, g.wo);
        std::fill(dst, dst + p, T(0));
        for (int oy = ylo; oy < yhi; ++oy) {
          const T* src = plane + static_cast<std::size_t>(oy * s - pad + ki * d) * g.w;
          T* out = dst + static_cast<std::size_t>(oy) * g.wo;
          const int off = -pad + kj * d;
          if (s == 1) {
            std::copy(src + xlo + off, src + xhi + off, out + xlo);
          } else {
            for (int ox = xlo; ox < xhi; ++ox) out[ox] = src[ox * s + off];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* col, const ConvGeometry& g, T* dx) {
  const int s = g.spec.stride, d = g.spec.dilation, pad = g.spec.pad;
  const std::size_t p = static_cast<std::size_t>(g.p());
  std::size_t row = 0;
  for (int c = 0; c < g.c; ++c) {
    T* plane = dx + static_cast<std::size_t>(c) * g.h * g.w;
    for (int ki = 0; ki < g.kh; ++ki) {
      const auto [ylo, yhi] = g.valid_range(ki * d, g.h, g.ho);
      for (int kj = 0; kj < g.kw; ++kj, ++row) {
        const T* src = col + row * p;
        const auto [xlo, xhi] = g.valid_range(kj * d, g.w, g.wo);
        const int off = -pad + kj * d;
        for (int oy = ylo; oy < yhi; ++oy) {
          T* out = plane + static_cast<std::size_t>(oy * s - pad + ki * d) * g.w;
          const T* in = src + static_cast<std::size_t>(oy) * g.wo;
          for (int ox = xlo; ox < xhi; ++ox) out[ox * s + off] += in[ox];
        }
      }
    }
  }
}

void require_same(const std::vector<int>& a, const std::vector<int>& b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + " shape mismatch: " + shape_string(a) + " vs " +
                     shape_string(b));
  }
}

}  // namespace

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, ConvSpec spec) {
  const ConvGeometry g = conv_geometry(x->value, w->value, spec);
  if (b && (b->value.rank() != 1 || b->value.dim(0) != g.o)) {
    throw ShapeError("conv2d bias shape " + b->value.shape_string() + " does not match " +
                     std::to_string(g.o) + " filters");
  }
  Tensor<T> y({g.o, g.ho, g.wo});
  MatMap<T> ym(y.data(), g.o, g.p());
  ConstMatMap<T> wm(w->value.data(), g.o, g.k());
  if (g.pointwise()) {
    ym.noalias() = wm * ConstMatMap<T>(x->value.data(), g.c, g.p());
  } else {
    AlignedVector<T> col(static_cast<std::size_t>(g.k()) * g.p());
    im2col(x->value.data(), g, col.data());
    ym.noalias() = wm * ConstMatMap<T>(col.data(), g.k(), g.p());
  }
  if (b) {
    for (int o = 0; o < g.o; ++o) ym.row(o).array() += b->value[static_cast<std::size_t>(o)];
  }
  return make_result<T>(std::move(y), {x, w, b}, [g](Node<T>& out) {
    const Var<T>& xv = out.parents[0];
    const Var<T>& wv = out.parents[1];
    const Var<T>& bv = out.parents[2];
    ConstMatMap<T> dy(out.grad.data(), g.o, g.p());
    if (bv && bv->requires_grad) {
      auto& db = bv->grad_buffer();
      for (int o = 0; o < g.o; ++o) db[static_cast<std::size_t>(o)] += dy.row(o).sum();
    }
    const bool need_w = wv->requires_grad, need_x = xv->requires_grad;
    if (!need_w && !need_x) return;
    ConstMatMap<T> wm(wv->value.data(), g.o, g.k());
    if (g.pointwise()) {
      ConstMatMap<T> xm(xv->value.data(), g.c, g.p());
      if (need_w) MatMap<T>(wv->grad_buffer().data(), g.o, g.k()).noalias() += dy * xm.transpose();
      if (need_x) MatMap<T>(xv->grad_buffer().data(), g.c, g.p()).noalias() += wm.transpose() * dy;
      return;
    }
    AlignedVector<T> col(static_cast<std::size_t>(g.k()) * g.p());
    if (need_w) {
      im2col(xv->value.data(), g, col.data());
      MatMap<T>(wv->grad_buffer().data(), g.o, g.k()).noalias() +=
          dy * ConstMatMap<T>(col.data(), g.k(), g.p()).transpose();
    }
    if (need_x) {
      MatMap<T>(col.data(), g.k(), g.p()).noalias() = wm.transpose() * dy;
      col2im(col.data(), g, xv->grad_buffer().data());
    }
  });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  Tensor<T> y = x->value;
  for (T& v : y.values()) v = v > T(0) ? v : T(0);
  return make_result<T>(std::move(y), {x}, [](Node<T>& out) {
    auto& dx = out.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < out.value.size(); ++i) {
      if (out.value[i] > T(0)) dx[i] += out.grad[i];
    }
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same(a->value.shape(), b->value.shape(), "add");
  Tensor<T> y = a->value;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b->value[i];
  return make_result<T>(std::move(y), {a, b}, [](Node<T>& out) {
    for (const auto& p : out.parents) {
      if (!p->requires_grad) continue;
      auto& d = p->grad_buffer();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += out.grad[i];
    }
  });
}

template <typename T>
Var<T> scale(const Var<T>& x, T factor) {
  Tensor<T> y = x->value;
  for (T& v : y.values()) v *= factor;
  return make_result<T>(std::move(y), {x}, [factor](Node<T>& out) {
    auto& d = out.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += factor * out.grad[i];
  });
}

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& xs) {
  if (xs.empty()) throw ShapeError("concat of nothing");
  const int h = xs[0]->value.dim(1), w = xs[0]->value.dim(2);
  int c = 0;
  for (const auto& x : xs) {
    if (x->value.rank() != 3 || x->value.dim(1) != h || x->value.dim(2) != w) {
      throw ShapeError("concat inputs differ in spatial size: " + x->value.shape_string());
    }
    c += x->value.dim(0);
  }
  Tensor<T> y({c, h, w});
  std::size_t off = 0;
  for (const auto& x : xs) {
    std::copy(x->value.data(), x->value.data() + x->value.size(), y.data() + off);
    off += x->value.size();
  }
  return make_result<T>(std::move(y), xs, [](Node<T>& out) {
    std::size_t off = 0;
    for (const auto& p : out.parents) {
      const std::size_t n = p->value.size();
      if (p->requires_grad) {
        auto& d = p->grad_buffer();
        for (std::size_t i = 0; i < n; ++i) d[i] += out.grad[off + i];
      }
      off += n;
    }
  });
}

template <typename T>
Var<T> max_pool2d(const Var<T>& x, int kernel, int stride, int pad) {
  const Tensor<T>& in = x->value;
  const int c = in.dim(0), h = in.dim(1), w = in.dim(2);
  const int ho = (h + 2 * pad - kernel) / stride + 1;
  const int wo = (w + 2 * pad - kernel) / stride + 1;
  if (ho < 1 || wo < 1) throw ShapeError("max_pool2d output would be empty");
  Tensor<T> y({c, ho, wo});
  auto arg = std::make_shared<std::vector<std::size_t>>(y.size());
  std::size_t o = 0;
  for (int ch = 0; ch < c; ++ch) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox, ++o) {
        T best = -std::numeric_limits<T>::infinity();
        std::size_t best_i = 0;
        for (int ki = 0; ki < kernel; ++ki) {
          const int iy = oy * stride - pad + ki;
          if (iy < 0 || iy >= h) continue;
          for (int kj = 0; kj < kernel; ++kj) {
            const int ix = ox * stride - pad + kj;
            if (ix < 0 || ix >= w) continue;
            const std::size_t i = (static_cast<std::size_t>(ch) * h + iy) * w + ix;
            if (in[i] > best) {
              best = in[i];
              best_i = i;
            }
          }
        }
        y[o] = best;
        (*arg)[o] = best_i;
      }
    }
  }
  return make_result<T>(std::move(y), {x}, [arg](Node<T>& out) {
    auto& d = out.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < out.grad.size(); ++i) d[(*arg)[i]] += out.grad[i];
  });
}

template <typename T>
Tensor<T> resize_bilinear_tensor(const Tensor<T>& x, int height, int width, Alignment alignment) {
  if (x.rank() != 3) throw ShapeError("resize expects {C,H,W}, got " + x.shape_string());
  if (height < 1 || width < 1) throw ShapeError("resize target must be at least 1x1");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor<T> y({c, height, width});
  std::vector<BilinearTap> xs(static_cast<std::size_t>(width));
  for (int ox = 0; ox < width; ++ox) xs[ox] = bilinear_tap(ox, w, width, alignment);
  for (int oy = 0; oy < height; ++oy) {
    const BilinearTap ty = bilinear_tap(oy, h, height, alignment);
    const T fy = static_cast<T>(ty.frac);
    for (int ch = 0; ch < c; ++ch) {
      const T* lo = x.data() + (static_cast<std::size_t>(ch) * h + ty.lo) * w;
      const T* hi = x.data() + (static_cast<std::size_t>(ch) * h + ty.hi) * w;
      T* out = y.data() + (static_cast<std::size_t>(ch) * height + oy) * width;
      for (int ox = 0; ox < width; ++ox) {
        const BilinearTap& tx = xs[ox];
        const T fx = static_cast<T>(tx.frac);
        const T top = lo[tx.lo] * (T(1) - fx) + lo[tx.hi] * fx;
        const T bot = hi[tx.lo] * (T(1) - fx) + hi[tx.hi] * fx;
        out[ox] = top * (T(1) - fy) + bot * fy;
      }
    }
  }
  return y;
}

template <typename T>
Var<T> resize_bilinear(const Var<T>& x, int height, int width, Alignment alignment) {
  if (x->value.rank() == 3 && x->value.dim(1) == height && x->value.dim(2) == width) return x;
  Tensor<T> y = resize_bilinear_tensor(x->value, height, width, alignment);
  return make_result<T>(std::move(y), {x}, [alignment](Node<T>& out) {
    const Tensor<T>& in = out.parents[0]->value;
    auto& d = out.parents[0]->grad_buffer();
    const int c = in.dim(0), h = in.dim(1), w = in.dim(2);
    const int height = out.value.dim(1), width = out.value.dim(2);
    for (int oy = 0; oy < height; ++oy) {
      const BilinearTap ty = bilinear_tap(oy, h, height, alignment);
      const T fy = static_cast<T>(ty.frac);
      for (int ox = 0; ox < width; ++ox) {
        const BilinearTap tx = bilinear_tap(ox, w, width, alignment);
        const T fx = static_cast<T>(tx.frac);
        for (int ch = 0; ch < c; ++ch) {
          const T g = out.grad[(static_cast<std::size_t>(ch) * height + oy) * width + ox];
          T* lo = d.data() + (static_cast<std::size_t>(ch) * h + ty.lo) * w;
          T* hi = d.data() + (static_cast<std::size_t>(ch) * h + ty.hi) * w;
          lo[tx.lo] += g * (T(1) - fy) * (T(1) - fx);
          lo[tx.hi] += g * (T(1) - fy) * fx;
          hi[tx.lo] += g * fy * (T(1) - fx);
          hi[tx.hi] += g * fy * fx;
        }
      }
    }
  });
}

template <typename T>
Var<T> max_elementwise(const std::vector<Var<T>>& xs) {
  if (xs.empty()) throw ShapeError("max of nothing");
  if (xs.size() == 1) return xs[0];
  for (const auto& x : xs) require_same(xs[0]->value.shape(), x->value.shape(), "max");
  Tensor<T> y = xs[0]->value;
  auto arg = std::make_shared<std::vector<std::uint8_t>>(y.size(), 0);
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const Tensor<T>& v = xs[k]->value;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (v[i] > y[i]) {
        y[i] = v[i];
        (*arg)[i] = static_cast<std::uint8_t>(k);
      }
    }
  }
  return make_result<T>(std::move(y), xs, [arg](Node<T>& out) {
    for (std::size_t k = 0; k < out.parents.size(); ++k) {
      if (!out.parents[k]->requires_grad) continue;
      auto& d = out.parents[k]->grad_buffer();
      for (std::size_t i = 0; i < d.size(); ++i) {
        if ((*arg)[i] == k) d[i] += out.grad[i];
      }
    }
  });
}

template <typename T>
Tensor<T> softmax_channels(const Tensor<T>& logits) {
  if (logits.rank() != 3) throw ShapeError("softmax expects {C,H,W}, got " + logits.shape_string());
  const int c = logits.dim(0);
  const std::size_t plane = static_cast<std::size_t>(logits.dim(1)) * logits.dim(2);
  Tensor<T> p(logits.shape());
  for (std::size_t i = 0; i < plane; ++i) {
    T m = logits[i];
    for (int k = 1; k < c; ++k) m = std::max(m, logits[k * plane + i]);
    T sum = 0;
    for (int k = 0; k < c; ++k) {
      const T e = std::exp(logits[k * plane + i] - m);
      p[k * plane + i] = e;
      sum += e;
    }
    for (int k = 0; k < c; ++k) p[k * plane + i] /= sum;
  }
  return p;
}

template <typename T>
Var<T> softmax_cross_entropy(const Var<T>& logits, std::span<const std::uint8_t> labels) {
  const Tensor<T>& z = logits->value;
  if (z.rank() != 3) throw ShapeError("cross-entropy expects {C,H,W} logits");
  const int c = z.dim(0);
  const std::size_t plane = static_cast<std::size_t>(z.dim(1)) * z.dim(2);
  if (labels.size() != plane) {
    throw ShapeError("cross-entropy labels have " + std::to_string(labels.size()) +
                     " pixels, logits " + std::to_string(plane));
  }
  auto probs = std::make_shared<Tensor<T>>(softmax_channels(z));
  T loss = 0;
  for (std::size_t i = 0; i < plane; ++i) {
    const int k = labels[i];
    if (k >= c) throw ShapeError("label " + std::to_string(k) + " exceeds class count");
    // log-softmax computed directly for accuracy.
    T m = z[i];
    for (int j = 1; j < c; ++j) m = std::max(m, z[j * plane + i]);
    T sum = 0;
    for (int j = 0; j < c; ++j) sum += std::exp(z[j * plane + i] - m);
    loss += std::log(sum) + m - z[k * plane + i];
  }
  Tensor<T> y({1}, loss / static_cast<T>(plane));
  std::vector<std::uint8_t> lab(labels.begin(), labels.end());
  return make_result<T>(std::move(y), {logits},
                        [probs, lab = std::move(lab), c, plane](Node<T>& out) {
                          auto& d = out.parents[0]->grad_buffer();
                          const T g = out.grad[0] / static_cast<T>(plane);
                          for (int j = 0; j < c; ++j) {
                            for (std::size_t i = 0; i < plane; ++i) {
                              const std::size_t idx = j * plane + i;
                              d[idx] += g * ((*probs)[idx] - (lab[i] == j ? T(1) : T(0)));
                            }
                          }
                        });
}

template <typename T>
Var<T> mse(const Var<T>& pred, const Tensor<T>& target) {
  require_same(pred->value.shape(), target.shape(), "mse");
  auto diff = std::make_shared<Tensor<T>>(pred->value);
  T sum = 0;
  for (std::size_t i = 0; i < diff->size(); ++i) {
    (*diff)[i] -= target[i];
    sum += (*diff)[i] * (*diff)[i];
  }
  const T n = static_cast<T>(diff->size());
  return make_result<T>(Tensor<T>({1}, sum / n), {pred}, [diff, n](Node<T>& out) {
    auto& d = out.parents[0]->grad_buffer();
    const T g = T(2) * out.grad[0] / n;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += g * (*diff)[i];
  });
}

#define JPP_INSTANTIATE(T)                                                                 \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, ConvSpec);           \
  template Var<T> relu(const Var<T>&);                                                     \
  template Var<T> add(const Var<T>&, const Var<T>&);                                       \
  template Var<T> scale(const Var<T>&, T);                                                 \
  template Var<T> concat_channels(const std::vector<Var<T>>&);                             \
  template Var<T> max_pool2d(const Var<T>&, int, int, int);                                \
  template Var<T> resize_bilinear(const Var<T>&, int, int, Alignment);                     \
  template Var<T> max_elementwise(const std::vector<Var<T>>&);                             \
  template Var<T> softmax_cross_entropy(const Var<T>&, std::span<const std::uint8_t>);     \
  template Var<T> mse(const Var<T>&, const Tensor<T>&);                                    \
  template Tensor<T> softmax_channels(const Tensor<T>&);                                   \
  template Tensor<T> resize_bilinear_tensor(const Tensor<T>&, int, int, Alignment);

JPP_INSTANTIATE(float)
JPP_INSTANTIATE(double)

}  // namespace jpp::nn
