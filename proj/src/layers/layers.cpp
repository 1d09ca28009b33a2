#include "bioie/layers/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bioie/error.hpp"
#include "bioie/layers/registry.hpp"

namespace bioie {

std::size_t position_row(std::ptrdiff_t distance, std::size_t max_dist) {
  const auto limit = static_cast<std::ptrdiff_t>(max_dist);
  return static_cast<std::size_t>(std::clamp(distance, -limit, limit) + limit);
}

Tensor embed_sequence(Tape& tape, std::span<const std::size_t> word_ids, std::size_t head_start,
                      std::size_t tail_start, const Tensor& word_table, const std::optional<Tensor>& position_table,
                      std::size_t max_dist) {
  if (word_ids.empty()) throw DimensionError("embed_sequence: empty sequence");
  Tensor words = ops::gather_rows(tape, word_table, word_ids);
  if (!position_table) return words;
  const std::size_t n = word_ids.size();
  std::vector<std::size_t> to_head(n), to_tail(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pos = static_cast<std::ptrdiff_t>(i);
    to_head[i] = position_row(pos - static_cast<std::ptrdiff_t>(head_start), max_dist);
    to_tail[i] = position_row(pos - static_cast<std::ptrdiff_t>(tail_start), max_dist);
  }
  const Tensor parts[] = {words, ops::gather_rows(tape, *position_table, to_head),
                          ops::gather_rows(tape, *position_table, to_tail)};
  return ops::concat(tape, parts, 1);
}

LstmParams init_lstm(std::size_t input, std::size_t hidden, Rng& rng) {
  LstmParams p;
  p.w_x = xavier_uniform(input, 4 * hidden, rng);
  p.w_h = xavier_uniform(hidden, 4 * hidden, rng);
  p.b = Tensor(Shape{4 * hidden});
  auto b = p.b.mutable_values();
  std::fill(b.begin() + static_cast<std::ptrdiff_t>(hidden), b.begin() + static_cast<std::ptrdiff_t>(2 * hidden), 1.0);
  return p;
}

LstmState lstm_cell(Tape& tape, const Tensor& x_projection, const LstmState& prev, const Tensor& w_h) {
  const std::size_t h = w_h.rows();
  if (x_projection.size() != 4 * h || prev.h.size() != h || prev.c.size() != h) {
    throw DimensionError("lstm_cell: state or projection width does not match hidden = " + std::to_string(h));
  }
  Tensor z = ops::add(tape, ops::reshape(tape, x_projection, {1, 4 * h}), ops::matmul(tape, prev.h, w_h));
  Tensor i = ops::sigmoid(tape, ops::slice(tape, z, 1, 0, h));
  Tensor f = ops::sigmoid(tape, ops::slice(tape, z, 1, h, 2 * h));
  Tensor g = ops::tanh(tape, ops::slice(tape, z, 1, 2 * h, 3 * h));
  Tensor o = ops::sigmoid(tape, ops::slice(tape, z, 1, 3 * h, 4 * h));
  Tensor c = ops::add(tape, ops::hadamard(tape, f, prev.c), ops::hadamard(tape, i, g));
  Tensor out = ops::hadamard(tape, o, ops::tanh(tape, c));
  return {out, c};
}

LstmState lstm_step(Tape& tape, const Tensor& x_t, const LstmState& prev, const LstmParams& params) {
  if (x_t.cols() != params.w_x.rows()) {
    throw DimensionError("lstm_step: input " + shape_string(x_t.shape()) + " does not match W_x " +
                         shape_string(params.w_x.shape()));
  }
  Tensor x = ops::reshape(tape, x_t, {1, x_t.size()});
  return lstm_cell(tape, ops::add_bias(tape, ops::matmul(tape, x, params.w_x), params.b), prev, params.w_h);
}

Tensor bilstm(Tape& tape, const Tensor& x, const LstmParams& forward, const LstmParams& backward,
              std::optional<std::size_t> length) {
  if (x.rank() != 2) throw DimensionError("bilstm expects [n × input], got " + shape_string(x.shape()));
  const std::size_t n = x.rows();
  const std::size_t len = length.value_or(n);
  if (len == 0 || len > n) throw DimensionError("bilstm: empty sequence");
  const std::size_t h = forward.hidden();
  if (backward.hidden() != h) throw DimensionError("bilstm: direction widths differ");

  Tensor content = len == n ? x : ops::slice(tape, x, 0, 0, len);
  Tensor proj_f = ops::add_bias(tape, ops::matmul(tape, content, forward.w_x), forward.b);
  Tensor proj_b = ops::add_bias(tape, ops::matmul(tape, content, backward.w_x), backward.b);

  const LstmState zero{Tensor(Shape{1, h}), Tensor(Shape{1, h})};
  std::vector<Tensor> fwd(len), bwd(len);
  LstmState s = zero;
  for (std::size_t t = 0; t < len; ++t) {
    s = lstm_cell(tape, ops::row(tape, proj_f, t), s, forward.w_h);
    fwd[t] = s.h;
  }
  s = zero;
  for (std::size_t t = len; t-- > 0;) {
    s = lstm_cell(tape, ops::row(tape, proj_b, t), s, backward.w_h);
    bwd[t] = s.h;
  }
  const Tensor halves[] = {ops::concat(tape, fwd, 0), ops::concat(tape, bwd, 0)};
  Tensor out = ops::concat(tape, halves, 1);
  if (len == n) return out;
  const Tensor rows[] = {out, Tensor(Shape{n - len, 2 * h})};
  return ops::concat(tape, rows, 0);
}

Tensor scaled_dot_attention(Tape& tape, const Tensor& q, const Tensor& k, const Tensor& v,
                            std::span<const std::uint8_t> key_valid) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2) throw DimensionError("attention expects matrices");
  if (q.cols() != k.cols()) {
    throw DimensionError("attention: query width " + std::to_string(q.cols()) + " differs from key width " +
                         std::to_string(k.cols()));
  }
  if (k.rows() != v.rows()) throw DimensionError("attention: keys and values differ in length");
  Tensor scores = ops::scale(tape, ops::matmul(tape, q, ops::transpose(tape, k)),
                             1.0 / std::sqrt(static_cast<double>(q.cols())));
  return ops::matmul(tape, ops::softmax(tape, scores, 1, key_valid), v);
}

AttentionParams init_attention(std::size_t d_model, std::size_t heads, bool output_projection, Rng& rng) {
  if (heads == 0 || d_model % heads != 0) {
    throw ConfigError("attention: " + std::to_string(heads) + " heads do not divide width " + std::to_string(d_model));
  }
  AttentionParams p;
  const std::size_t width = d_model / heads;
  for (std::size_t i = 0; i < heads; ++i) {
    p.w_q.push_back(xavier_uniform(d_model, width, rng));
    p.w_k.push_back(xavier_uniform(d_model, width, rng));
    p.w_v.push_back(xavier_uniform(d_model, width, rng));
  }
  if (output_projection) p.w_out = xavier_uniform(d_model, d_model, rng);
  return p;
}

Tensor multi_head_attention(Tape& tape, const Tensor& x, const AttentionParams& params,
                            std::span<const std::uint8_t> valid) {
  const std::size_t h = params.heads();
  if (h == 0 || x.cols() % h != 0) {
    throw DimensionError("multi_head_attention: " + std::to_string(h) + " heads do not divide width " +
                         std::to_string(x.cols()));
  }
  std::vector<Tensor> heads;
  for (std::size_t i = 0; i < h; ++i) {
    heads.push_back(scaled_dot_attention(tape, ops::matmul(tape, x, params.w_q[i]),
                                         ops::matmul(tape, x, params.w_k[i]), ops::matmul(tape, x, params.w_v[i]),
                                         valid));
  }
  Tensor joined = h == 1 ? heads[0] : ops::concat(tape, heads, 1);
  return params.w_out ? ops::matmul(tape, joined, *params.w_out) : joined;
}

Tensor single_head_attention(Tape& tape, const Tensor& x, const Tensor& w_q, const Tensor& w_k, const Tensor& w_v,
                             const std::optional<Tensor>& w_out, std::span<const std::uint8_t> valid) {
  Tensor head = scaled_dot_attention(tape, ops::matmul(tape, x, w_q), ops::matmul(tape, x, w_k),
                                     ops::matmul(tape, x, w_v), valid);
  return w_out ? ops::matmul(tape, head, *w_out) : head;
}

Tensor gcn_propagate(Tape& tape, const Tensor& h, const Tensor& normalized_adjacency, const GcnParams& params,
                     ops::Activation f) {
  const std::size_t n = h.rows();
  if (normalized_adjacency.rank() != 2 || normalized_adjacency.rows() != n || normalized_adjacency.cols() != n) {
    throw DimensionError("gcn_propagate: adjacency " + shape_string(normalized_adjacency.shape()) +
                         " does not match " + std::to_string(n) + " nodes");
  }
  Tensor projected = ops::matmul(tape, h, params.w);
  return ops::activation(tape, f, ops::add_bias(tape, ops::matmul(tape, normalized_adjacency, projected), params.b));
}

Tensor normalize_adjacency(std::span<const double> a, std::size_t n) {
  if (a.size() != n * n) throw DimensionError("normalize_adjacency: expected " + std::to_string(n * n) + " entries");
  Tensor out(Shape{n, n});
  auto v = out.mutable_values();
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) degree += a[i * n + j];
    if (!(degree > 0.0)) throw NumericError("node " + std::to_string(i) + " has zero degree");
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] = a[i * n + j] / degree;
  }
  return out;
}

std::vector<Tensor> inter_graph_mix(Tape& tape, std::span<const Tensor> states) {
  if (states.empty()) throw DimensionError("inter_graph_mix: no states");
  for (const auto& s : states) {
    if (s.shape() != states[0].shape()) {
      throw DimensionError("inter_graph_mix: states " + shape_string(states[0].shape()) + " and " +
                           shape_string(s.shape()) + " disagree");
    }
  }
  if (states.size() == 1) return {states[0]};
  Tensor total = states[0];
  for (std::size_t g = 1; g < states.size(); ++g) total = ops::add(tape, total, states[g]);
  Tensor mean = ops::scale(tape, total, 1.0 / static_cast<double>(states.size()));
  return std::vector<Tensor>(states.size(), mean);
}

}  // namespace bioie
