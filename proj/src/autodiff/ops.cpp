#include "bioie/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Core>

#include "bioie/error.hpp"

namespace bioie::ops {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap as_matrix(std::span<const double> data, std::size_t rows, std::size_t cols) {
  return ConstMap(data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

MutMap as_matrix(std::span<double> data, std::size_t rows, std::size_t cols) {
  return MutMap(data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() > 2) {
    throw DimensionError(std::string(op) + " expects rank ≤ 2, got " + shape_string(t.shape()));
  }
}

// Views a tensor as [outer × extent × inner] around `axis`.
struct AxisView {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisView axis_view(const Shape& shape, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols();
  const std::size_t kb = b.rank() == 1 ? b.size() : b.rows();
  const std::size_t n = b.rank() == 1 ? 1 : b.cols();
  if (k != kb) {
    throw DimensionError("matmul: inner extents disagree for " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()));
  }
  Tensor out(Shape{m, n});
  as_matrix(out.mutable_values(), m, n).noalias() =
      as_matrix(a.values(), m, k) * as_matrix(b.values(), k, n);
  if (tape.wants({&a, &b})) {
    tape.record(out, {a, b}, [a, b, out, m, k, n]() mutable {
      auto dc = as_matrix(out.grad(), m, n);
      if (a.requires_grad()) {
        as_matrix(a.mutable_grad(), m, k).noalias() += dc * as_matrix(b.values(), k, n).transpose();
      }
      if (b.requires_grad()) {
        as_matrix(b.mutable_grad(), k, n).noalias() += as_matrix(a.values(), m, k).transpose() * dc;
      }
    });
  }
  return out;
}

Tensor transpose(Tape& tape, const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t r = a.rows(), c = a.cols();
  Tensor out(Shape{c, r});
  as_matrix(out.mutable_values(), c, r) = as_matrix(a.values(), r, c).transpose();
  if (tape.wants({&a})) {
    tape.record(out, {a}, [a, out, r, c]() mutable {
      as_matrix(a.mutable_grad(), r, c) += as_matrix(out.grad(), c, r).transpose();
    });
  }
  return out;
}

Tensor elementwise(Tape& tape, Elementwise kind, const Tensor& a, const Tensor& b) {
  const bool a_scalar = a.size() == 1 && b.size() != 1;
  const bool b_scalar = b.size() == 1 && a.size() != 1;
  if (!a_scalar && !b_scalar && a.shape() != b.shape()) {
    throw DimensionError("elementwise: incompatible shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()));
  }
  const Shape& shape = a_scalar ? b.shape() : a.shape();
  const std::size_t n = shape_size(shape);
  Tensor out(shape);
  auto av = a.values();
  auto bv = b.values();
  auto ov = out.mutable_values();
  auto at = [&](std::span<const double> v, bool broadcast, std::size_t i) {
    return broadcast ? v[0] : v[i];
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double x = at(av, a_scalar, i), y = at(bv, b_scalar, i);
    switch (kind) {
      case Elementwise::kAdd: ov[i] = x + y; break;
      case Elementwise::kSub: ov[i] = x - y; break;
      case Elementwise::kHadamard: ov[i] = x * y; break;
    }
  }
  if (tape.wants({&a, &b})) {
    tape.record(out, {a, b}, [a, b, out, kind, a_scalar, b_scalar, n]() mutable {
      auto g = out.grad();
      auto av = a.values();
      auto bv = b.values();
      if (a.requires_grad()) {
        auto ga = a.mutable_grad();
        for (std::size_t i = 0; i < n; ++i) {
          double d = g[i];
          if (kind == Elementwise::kHadamard) d *= b_scalar ? bv[0] : bv[i];
          ga[a_scalar ? 0 : i] += d;
        }
      }
      if (b.requires_grad()) {
        auto gb = b.mutable_grad();
        for (std::size_t i = 0; i < n; ++i) {
          double d = g[i];
          if (kind == Elementwise::kSub) d = -d;
          if (kind == Elementwise::kHadamard) d *= a_scalar ? av[0] : av[i];
          gb[b_scalar ? 0 : i] += d;
        }
      }
    });
  }
  return out;
}

Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& bias) {
  require_matrix(x, "add_bias");
  const std::size_t r = x.rows(), c = x.cols();
  if (bias.size() != c) {
    throw DimensionError("add_bias: bias " + shape_string(bias.shape()) + " does not match rows of " +
                         shape_string(x.shape()));
  }
  Tensor out = x.clone();
  auto ov = out.mutable_values();
  auto bv = bias.values();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) ov[i * c + j] += bv[j];
  }
  if (tape.wants({&x, &bias})) {
    tape.record(out, {x, bias}, [x, bias, out, r, c]() mutable {
      auto g = out.grad();
      if (x.requires_grad()) {
        auto gx = x.mutable_grad();
        for (std::size_t i = 0; i < r * c; ++i) gx[i] += g[i];
      }
      if (bias.requires_grad()) {
        auto gb = bias.mutable_grad();
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t j = 0; j < c; ++j) gb[j] += g[i * c + j];
        }
      }
    });
  }
  return out;
}

Tensor scale(Tape& tape, const Tensor& x, double factor) {
  Tensor out = x.clone();
  for (double& v : out.mutable_values()) v *= factor;
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x, out, factor]() mutable {
      auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
    });
  }
  return out;
}

Tensor activation(Tape& tape, Activation kind, const Tensor& x) {
  if (kind == Activation::kIdentity) return x;
  Tensor out(x.shape());
  auto xv = x.values();
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double v = xv[i];
    if (kind == Activation::kTanh) {
      ov[i] = std::tanh(v);
    } else if (v >= 0) {
      ov[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      ov[i] = e / (1.0 + e);
    }
  }
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x, out, kind]() mutable {
      auto g = out.grad();
      auto y = out.values();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = kind == Activation::kTanh ? 1.0 - y[i] * y[i] : y[i] * (1.0 - y[i]);
        gx[i] += g[i] * d;
      }
    });
  }
  return out;
}

Tensor reshape(Tape& tape, const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape: " + shape_string(x.shape()) + " cannot become " + shape_string(shape));
  }
  Tensor out(std::move(shape), std::vector<double>(x.values().begin(), x.values().end()));
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x, out]() mutable {
      auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  return out;
}

Tensor concat(Tape& tape, std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no tensors");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) {
    throw DimensionError("concat: axis " + std::to_string(axis) + " out of range for " +
                         shape_string(first));
  }
  Shape shape = first;
  shape[axis] = 0;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    bool conforming = s.size() == first.size();
    for (std::size_t i = 0; conforming && i < s.size(); ++i) {
      if (i != axis && s[i] != first[i]) conforming = false;
    }
    if (!conforming) {
      throw DimensionError("concat: " + shape_string(s) + " does not conform to " +
                           shape_string(first) + " off axis " + std::to_string(axis));
    }
    shape[axis] += s[axis];
  }
  const AxisView out_view = axis_view(shape, axis);
  Tensor out(shape);
  auto ov = out.mutable_values();
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    offsets.push_back(offset);
    const std::size_t chunk = p.shape()[axis] * out_view.inner;
    auto pv = p.values();
    for (std::size_t o = 0; o < out_view.outer; ++o) {
      std::copy_n(pv.begin() + o * chunk, chunk,
                  ov.begin() + o * out_view.extent * out_view.inner + offset * out_view.inner);
    }
    offset += p.shape()[axis];
  }
  if (tape.wants(parts)) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    tape.record(out, inputs, [inputs, out, offsets, out_view, axis]() mutable {
      auto g = out.grad();
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        Tensor& p = inputs[k];
        if (!p.requires_grad()) continue;
        auto gp = p.mutable_grad();
        const std::size_t chunk = p.shape()[axis] * out_view.inner;
        for (std::size_t o = 0; o < out_view.outer; ++o) {
          const std::size_t base = o * out_view.extent * out_view.inner + offsets[k] * out_view.inner;
          for (std::size_t i = 0; i < chunk; ++i) gp[o * chunk + i] += g[base + i];
        }
      }
    });
  }
  return out;
}

Tensor slice(Tape& tape, const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& in_shape = x.shape();
  if (axis >= in_shape.size()) {
    throw DimensionError("slice: axis " + std::to_string(axis) + " out of range for " +
                         shape_string(in_shape));
  }
  if (begin >= end || end > in_shape[axis]) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for " + shape_string(in_shape));
  }
  const AxisView v = axis_view(in_shape, axis);
  Shape shape = in_shape;
  shape[axis] = end - begin;
  Tensor out(shape);
  const std::size_t chunk = (end - begin) * v.inner;
  auto xv = x.values();
  auto ov = out.mutable_values();
  for (std::size_t o = 0; o < v.outer; ++o) {
    std::copy_n(xv.begin() + (o * v.extent + begin) * v.inner, chunk, ov.begin() + o * chunk);
  }
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x, out, v, begin, chunk]() mutable {
      auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t o = 0; o < v.outer; ++o) {
        const std::size_t base = (o * v.extent + begin) * v.inner;
        for (std::size_t i = 0; i < chunk; ++i) gx[base + i] += g[o * chunk + i];
      }
    });
  }
  return out;
}

std::vector<Tensor> split(Tape& tape, const Tensor& x, std::size_t axis,
                          std::span<const std::size_t> extents) {
  if (axis >= x.rank()) throw DimensionError("split: axis out of range for " + shape_string(x.shape()));
  const std::size_t total = std::accumulate(extents.begin(), extents.end(), std::size_t{0});
  if (total != x.shape()[axis]) {
    throw DimensionError("split: extents sum to " + std::to_string(total) + " but axis has " +
                         std::to_string(x.shape()[axis]));
  }
  std::vector<Tensor> parts;
  std::size_t begin = 0;
  for (std::size_t e : extents) {
    parts.push_back(slice(tape, x, axis, begin, begin + e));
    begin += e;
  }
  return parts;
}

Tensor gather_rows(Tape& tape, const Tensor& table, std::span<const std::size_t> ids) {
  require_matrix(table, "gather_rows");
  if (ids.empty()) throw DimensionError("gather_rows: no ids");
  const std::size_t vocab = table.rows(), d = table.cols();
  for (std::size_t id : ids) {
    if (id >= vocab) {
      throw DimensionError("gather_rows: id " + std::to_string(id) + " out of range for table " +
                           shape_string(table.shape()));
    }
  }
  Tensor out(Shape{ids.size(), d});
  auto tv = table.values();
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(tv.begin() + ids[i] * d, d, ov.begin() + i * d);
  }
  if (tape.wants({&table})) {
    std::vector<std::size_t> rows(ids.begin(), ids.end());
    tape.record(out, {table}, [table, out, rows = std::move(rows), d]() mutable {
      auto g = out.grad();
      auto gt = table.mutable_grad();
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) gt[rows[i] * d + j] += g[i * d + j];
      }
    });
  }
  return out;
}

Tensor softmax(Tape& tape, const Tensor& x, std::size_t axis, std::span<const std::uint8_t> valid) {
  require_matrix(x, "softmax");
  if (axis >= x.rank()) throw DimensionError("softmax: axis out of range for " + shape_string(x.shape()));
  const AxisView v = axis_view(x.shape(), axis);
  if (!valid.empty() && valid.size() != v.extent) {
    throw DimensionError("softmax: mask length " + std::to_string(valid.size()) +
                         " does not match axis extent " + std::to_string(v.extent));
  }
  auto ok = [&](std::size_t k) { return valid.empty() || valid[k] != 0; };
  Tensor out(x.shape());
  auto xv = x.values();
  auto ov = out.mutable_values();
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t in = 0; in < v.inner; ++in) {
      auto idx = [&](std::size_t k) { return (o * v.extent + k) * v.inner + in; };
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < v.extent; ++k) {
        if (ok(k)) top = std::max(top, xv[idx(k)]);
      }
      if (top == -std::numeric_limits<double>::infinity()) {
        throw DimensionError("softmax: every position of a slice is masked");
      }
      double total = 0.0;
      for (std::size_t k = 0; k < v.extent; ++k) {
        const double e = ok(k) ? std::exp(xv[idx(k)] - top) : 0.0;
        ov[idx(k)] = e;
        total += e;
      }
      for (std::size_t k = 0; k < v.extent; ++k) ov[idx(k)] /= total;
    }
  }
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x, out, v]() mutable {
      auto g = out.grad();
      auto y = out.values();
      auto gx = x.mutable_grad();
      for (std::size_t o = 0; o < v.outer; ++o) {
        for (std::size_t in = 0; in < v.inner; ++in) {
          auto idx = [&](std::size_t k) { return (o * v.extent + k) * v.inner + in; };
          double dot = 0.0;
          for (std::size_t k = 0; k < v.extent; ++k) dot += g[idx(k)] * y[idx(k)];
          for (std::size_t k = 0; k < v.extent; ++k) gx[idx(k)] += y[idx(k)] * (g[idx(k)] - dot);
        }
      }
    });
  }
  return out;
}

Tensor dropout(Tape& tape, const Tensor& x, double p, Mode mode, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw Error("dropout: rate " + std::to_string(p) + " outside [0, 1)");
  if (mode == Mode::kEval || p == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(x.size());
  for (double& m : mask) m = rng.bernoulli(p) ? 0.0 : keep_scale;
  Tensor out(x.shape());
  auto xv = x.values();
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < mask.size(); ++i) ov[i] = xv[i] * mask[i];
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x, out, mask = std::move(mask)]() mutable {
      auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
    });
  }
  return out;
}

Tensor max_pool_over_time(Tape& tape, const Tensor& x, std::span<const std::uint8_t> valid) {
  require_matrix(x, "max_pool_over_time");
  const std::size_t n = x.rows(), d = x.cols();
  if (!valid.empty() && valid.size() != n) {
    throw DimensionError("max_pool_over_time: mask length " + std::to_string(valid.size()) +
                         " does not match " + std::to_string(n) + " rows");
  }
  auto ok = [&](std::size_t i) { return valid.empty() || valid[i] != 0; };
  std::size_t first = 0;
  while (first < n && !ok(first)) ++first;
  if (first == n) throw DimensionError("max_pool_over_time: empty sequence");
  Tensor out(Shape{d});
  std::vector<std::size_t> argmax(d, first);
  auto xv = x.values();
  auto ov = out.mutable_values();
  for (std::size_t j = 0; j < d; ++j) ov[j] = xv[first * d + j];
  for (std::size_t i = first + 1; i < n; ++i) {
    if (!ok(i)) continue;
    for (std::size_t j = 0; j < d; ++j) {
      if (xv[i * d + j] > ov[j]) {
        ov[j] = xv[i * d + j];
        argmax[j] = i;
      }
    }
  }
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x, out, argmax = std::move(argmax), d]() mutable {
      auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t j = 0; j < d; ++j) gx[argmax[j] * d + j] += g[j];
    });
  }
  return out;
}

Tensor cross_entropy(Tape& tape, const Tensor& logits, std::span<const std::size_t> targets) {
  require_matrix(logits, "cross_entropy");
  const std::size_t b = logits.rows(), c = logits.cols();
  if (targets.size() != b) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(b) + " rows");
  }
  auto lv = logits.values();
  std::vector<double> probs(b * c);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    if (targets[i] >= c) {
      throw Error("cross_entropy: target " + std::to_string(targets[i]) + " outside [0, " +
                  std::to_string(c) + ")");
    }
    const double* row = lv.data() + i * c;
    const double top = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - top);
    const double lse = top + std::log(z);
    total += lse - row[targets[i]];
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] = std::exp(row[j] - lse);
  }
  Tensor out = Tensor::scalar(total / static_cast<double>(b));
  if (tape.wants({&logits})) {
    std::vector<std::size_t> t(targets.begin(), targets.end());
    tape.record(out, {logits}, [logits, out, probs = std::move(probs), t = std::move(t), b, c]() mutable {
      const double g = out.grad()[0] / static_cast<double>(b);
      auto gl = logits.mutable_grad();
      for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
          gl[i * c + j] += g * (probs[i * c + j] - (j == t[i] ? 1.0 : 0.0));
        }
      }
    });
  }
  return out;
}

Tensor sum(Tape& tape, const Tensor& x) {
  auto xv = x.values();
  Tensor out = Tensor::scalar(std::accumulate(xv.begin(), xv.end(), 0.0));
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x, out]() mutable {
      const double g = out.grad()[0];
      for (double& v : x.mutable_grad()) v += g;
    });
  }
  return out;
}

Tensor mean(Tape& tape, const Tensor& x) {
  return scale(tape, sum(tape, x), 1.0 / static_cast<double>(x.size()));
}

std::vector<double> softmax_values(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double top = *std::max_element(out.begin(), out.end());
  double total = 0.0;
  for (double& v : out) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace bioie::ops
