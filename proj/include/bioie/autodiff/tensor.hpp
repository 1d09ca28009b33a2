#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace bioie {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array of doubles with an optional gradient buffer.
//
// Tensor is a handle: copies alias the same storage, which is what lets the
// tape write gradients back into parameters held elsewhere. Use clone() for
// an independent copy.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  std::size_t rows() const;  // extent 0; a rank-1 tensor counts as one row
  std::size_t cols() const;  // product of trailing extents
  bool is_scalar() const { return size() == 1; }

  std::span<const double> values() const;
  std::span<double> mutable_values();
  double item() const;
  double operator[](std::size_t i) const { return values()[i]; }
  double at(std::size_t r, std::size_t c) const { return values()[r * cols() + c]; }

  bool requires_grad() const;
  // Leaves that require grad get a zeroed gradient buffer immediately.
  Tensor& set_requires_grad(bool on = true);
  bool has_grad() const;
  std::span<const double> grad() const;
  // Const because Tensor is a handle; gradient accumulation goes through
  // shared storage. Allocates zeros on first use.
  std::span<double> mutable_grad() const;
  void zero_grad();

  Tensor clone() const;   // deep copy of values, no grad, requires_grad off
  Tensor detach() const { return clone(); }

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  friend class Tape;

  struct Impl {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Impl> impl_;
};

// Define-by-run record of differentiable operations.
//
// Operations append entries in execution order, so the entry list is always
// topologically sorted. backward() zeroes the gradients of recorded outputs,
// seeds the loss with 1 and replays the entries in reverse. Leaf gradients
// accumulate across calls until zeroed.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Whether an op over these inputs must be recorded.
  bool wants(std::initializer_list<const Tensor*> inputs) const;
  bool wants(std::span<const Tensor> inputs) const;

  void record(Tensor output, std::vector<Tensor> inputs, BackwardFn backward);

  void backward(const Tensor& loss);
  void clear() { entries_.clear(); }
  std::size_t size() const { return entries_.size(); }

  bool recording() const { return recording_; }
  void set_recording(bool on) { recording_ = on; }

 private:
  struct Entry {
    Tensor output;
    std::vector<Tensor> inputs;
    BackwardFn backward;
  };
  std::vector<Entry> entries_;
  bool recording_ = true;
};

// Disables recording on a tape for the lifetime of the guard.
class NoGradGuard {
 public:
  explicit NoGradGuard(Tape& tape) : tape_(tape), previous_(tape.recording()) {
    tape_.set_recording(false);
  }
  ~NoGradGuard() { tape_.set_recording(previous_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  Tape& tape_;
  bool previous_;
};

}  // namespace bioie
