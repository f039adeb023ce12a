#include "lipread/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "lipread/errors.hpp"

namespace lipread::nn {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t acc, int d) { return acc * static_cast<std::size_t>(d); });
}

std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + ")";
}

Tensor::Tensor(Shape shape, Scalar fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<Scalar> values) : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != shape_size(shape_))
    throw ShapeMismatch("tensor of shape " + shape_string(shape_) + " given " + std::to_string(data_.size()) +
                        " values");
}

Tensor Tensor::reshaped(Shape shape) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
  if (shape_size(shape) != data_.size())
    throw ShapeMismatch("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  shape_ = std::move(shape);
  return std::move(*this);
}

void Tensor::fill(Scalar v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::slice(int begin, int end) const {
  if (shape_.empty() || begin < 0 || end > shape_[0] || begin > end)
    throw ShapeMismatch("bad slice [" + std::to_string(begin) + "," + std::to_string(end) + ") of " +
                        shape_string(shape_));
  Shape s = shape_;
  s[0] = end - begin;
  const std::size_t row = data_.size() / static_cast<std::size_t>(std::max(1, shape_[0]));
  std::vector<Scalar> v(data_.begin() + static_cast<std::ptrdiff_t>(row * begin),
                        data_.begin() + static_cast<std::ptrdiff_t>(row * end));
  return Tensor(std::move(s), std::move(v));
}

Tensor stack(std::span<const Tensor> items) {
  if (items.empty()) throw ShapeMismatch("cannot stack zero tensors");
  Shape s = items.front().shape();
  s.insert(s.begin(), static_cast<int>(items.size()));
  std::vector<Scalar> v;
  v.reserve(shape_size(s));
  for (const auto& t : items) {
    if (t.shape() != items.front().shape())
      throw ShapeMismatch("stack of " + shape_string(t.shape()) + " and " + shape_string(items.front().shape()));
    v.insert(v.end(), t.values().begin(), t.values().end());
  }
  return Tensor(std::move(s), std::move(v));
}

}  // namespace lipread::nn
