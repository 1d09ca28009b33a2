#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bioie/autodiff/rng.hpp"
#include "bioie/autodiff/tensor.hpp"

// Differentiable operations. Every op takes the tape first and records its
// backward rule there when any input requires grad and the tape is recording.
// Rank-1 tensors of extent d behave as 1×d rows where a matrix is expected.
namespace bioie::ops {

enum class Elementwise { kAdd, kSub, kHadamard };
enum class Activation { kTanh, kSigmoid, kIdentity };
enum class Mode { kTrain, kEval };

// a[m×k] · b[k×n]
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor transpose(Tape& tape, const Tensor& a);

// Same-shape pointwise op; either side may also be a single-element tensor.
Tensor elementwise(Tape& tape, Elementwise kind, const Tensor& a, const Tensor& b);
inline Tensor add(Tape& t, const Tensor& a, const Tensor& b) { return elementwise(t, Elementwise::kAdd, a, b); }
inline Tensor sub(Tape& t, const Tensor& a, const Tensor& b) { return elementwise(t, Elementwise::kSub, a, b); }
inline Tensor hadamard(Tape& t, const Tensor& a, const Tensor& b) { return elementwise(t, Elementwise::kHadamard, a, b); }

// x[n×d] + bias[d] added to every row.
Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& bias);
Tensor scale(Tape& tape, const Tensor& x, double factor);

Tensor activation(Tape& tape, Activation kind, const Tensor& x);
inline Tensor tanh(Tape& t, const Tensor& x) { return activation(t, Activation::kTanh, x); }
inline Tensor sigmoid(Tape& t, const Tensor& x) { return activation(t, Activation::kSigmoid, x); }

Tensor reshape(Tape& tape, const Tensor& x, Shape shape);
Tensor concat(Tape& tape, std::span<const Tensor> parts, std::size_t axis);
// [begin, end) along axis.
Tensor slice(Tape& tape, const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
std::vector<Tensor> split(Tape& tape, const Tensor& x, std::size_t axis,
                          std::span<const std::size_t> extents);
inline Tensor row(Tape& t, const Tensor& x, std::size_t i) { return slice(t, x, 0, i, i + 1); }

// Rows of table[V×d] selected by ids, as [n×d]. Gradient scatters back.
Tensor gather_rows(Tape& tape, const Tensor& table, std::span<const std::size_t> ids);

// Softmax along axis (rank ≤ 2), max-subtracted. When `valid` is non-empty it
// has one flag per position along `axis`; masked positions get probability 0.
Tensor softmax(Tape& tape, const Tensor& x, std::size_t axis,
               std::span<const std::uint8_t> valid = {});

// Inverted dropout. Eval mode, or p == 0, returns x itself.
Tensor dropout(Tape& tape, const Tensor& x, double p, Mode mode, Rng& rng);

// Column-wise max over rows of x[n×d] giving a rank-1 [d]. When `valid` is
// non-empty only flagged rows compete. Ties go to the first row.
Tensor max_pool_over_time(Tape& tape, const Tensor& x,
                          std::span<const std::uint8_t> valid = {});

// Mean over the batch of −log softmax(logits)[target].
Tensor cross_entropy(Tape& tape, const Tensor& logits, std::span<const std::size_t> targets);

Tensor sum(Tape& tape, const Tensor& x);
Tensor mean(Tape& tape, const Tensor& x);

// Forward-only helpers used outside the tape.
std::vector<double> softmax_values(std::span<const double> logits);

}  // namespace bioie::ops
