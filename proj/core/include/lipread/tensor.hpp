#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lipread::nn {

using Scalar = double;
using Shape = std::vector<int>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major tensor. The leading dimension is the batch.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Scalar fill = Scalar{0});
  Tensor(Shape shape, std::vector<Scalar> values);

  const Shape& shape() const noexcept { return shape_; }
  int rank() const noexcept { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  Scalar* data() noexcept { return data_.data(); }
  const Scalar* data() const noexcept { return data_.data(); }
  std::span<Scalar> values() noexcept { return data_; }
  std::span<const Scalar> values() const noexcept { return data_; }
  Scalar& operator[](std::size_t i) { return data_[i]; }
  Scalar operator[](std::size_t i) const { return data_[i]; }

  /// Same data, new shape with equal element count.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  void fill(Scalar v);
  /// Elements [begin, end) of the leading dimension.
  Tensor slice(int begin, int end) const;

 private:
  Shape shape_;
  std::vector<Scalar> data_;
};

/// Stacks equally shaped tensors along a new leading dimension.
Tensor stack(std::span<const Tensor> items);

}  // namespace lipread::nn
