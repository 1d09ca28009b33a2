#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bioie/autodiff/ops.hpp"
#include "bioie/autodiff/tensor.hpp"

namespace bioie {

// ---- embedding

// Row index of a relative distance in a position table of 2·max_dist+1 rows.
std::size_t position_row(std::ptrdiff_t distance, std::size_t max_dist);

// ω_i = [word(i) ; pos(i − head_start) ; pos(i − tail_start)], or just the
// word rows when position_table is empty.
Tensor embed_sequence(Tape& tape, std::span<const std::size_t> word_ids, std::size_t head_start,
                      std::size_t tail_start, const Tensor& word_table, const std::optional<Tensor>& position_table,
                      std::size_t max_dist);

// ---- Bi-LSTM

// Gate blocks are laid out i, f, g, o along the 4·hidden axis.
struct LstmParams {
  Tensor w_x;  // [input × 4·hidden]
  Tensor w_h;  // [hidden × 4·hidden]
  Tensor b;    // [4·hidden]

  std::size_t hidden() const { return w_h.rows(); }
};

LstmParams init_lstm(std::size_t input, std::size_t hidden, Rng& rng);

struct LstmState {
  Tensor h;  // [1 × hidden]
  Tensor c;
};

// One cell update from the input projection x_t·W_x + b ([1 × 4·hidden]).
LstmState lstm_cell(Tape& tape, const Tensor& x_projection, const LstmState& prev, const Tensor& w_h);

// Full cell update from x_t ([1 × input]).
LstmState lstm_step(Tape& tape, const Tensor& x_t, const LstmState& prev, const LstmParams& params);

// [n × 2·hidden]: forward states over rows 0..length−1, backward states over
// length−1..0, concatenated per position. Rows at and after `length` are zero.
Tensor bilstm(Tape& tape, const Tensor& x, const LstmParams& forward, const LstmParams& backward,
              std::optional<std::size_t> length = std::nullopt);

// ---- attention

// softmax(Q·Kᵀ/√d)·V, masking keys whose flag is 0.
Tensor scaled_dot_attention(Tape& tape, const Tensor& q, const Tensor& k, const Tensor& v,
                            std::span<const std::uint8_t> key_valid = {});

struct AttentionParams {
  std::vector<Tensor> w_q, w_k, w_v;  // per head [d_model × d_model/h]
  std::optional<Tensor> w_out;        // [d_model × d_model]; absent for plain single-head attention

  std::size_t heads() const { return w_q.size(); }
};

AttentionParams init_attention(std::size_t d_model, std::size_t heads, bool output_projection, Rng& rng);

// Self-attention: Concat(head_1 … head_h)·W with head_i = attention(X·W_q^i,
// X·W_k^i, X·W_v^i). Without w_out the concatenation is returned as is.
Tensor multi_head_attention(Tape& tape, const Tensor& x, const AttentionParams& params,
                            std::span<const std::uint8_t> valid = {});

// One head, shared projections, optional output matrix.
Tensor single_head_attention(Tape& tape, const Tensor& x, const Tensor& w_q, const Tensor& w_k, const Tensor& w_v,
                             const std::optional<Tensor>& w_out, std::span<const std::uint8_t> valid = {});

// ---- GCN

struct GcnParams {
  Tensor w;  // [d_in × d_out]
  Tensor b;  // [d_out]
};

// f(D⁻¹A·H·W + b); `normalized_adjacency` holds D⁻¹A ([n × n]).
Tensor gcn_propagate(Tape& tape, const Tensor& h, const Tensor& normalized_adjacency, const GcnParams& params,
                     ops::Activation f);

// D⁻¹A as a constant tensor from a raw adjacency; throws on a zero degree.
Tensor normalize_adjacency(std::span<const double> a, std::size_t n);

// Each node's graph-specific states replaced by their mean.
std::vector<Tensor> inter_graph_mix(Tape& tape, std::span<const Tensor> states);

}  // namespace bioie
