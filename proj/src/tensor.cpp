// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "nca/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace nca {

std::size_t element_count(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(element_count(shape_), 0.0f) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != element_count(shape_)) {
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_string(shape_));
  }
}

std::size_t Tensor::rows() const { return shape_.empty() ? 0 : shape_[0]; }

std::size_t Tensor::cols() const {
  if (shape_.size() < 2) return 1;
  return data_.size() / shape_[0];
}

std::span<const float> Tensor::row(std::size_t r) const {
  const auto c = cols();
  return std::span<const float>(data_).subspan(r * c, c);
}

std::span<float> Tensor::row(std::size_t r) {
  const auto c = cols();
  return std::span<float>(data_).subspan(r * c, c);
}

void Tensor::fill(float value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float x) { return std::isfinite(x); });
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  if (a.size() == 0) return true;
  return std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0;
}

ParamSet ParamSet::zeros_like() const {
  std::vector<NamedTensor> out;
  out.reserve(tensors_.size());
  for (const auto& t : tensors_) out.push_back({t.name, Tensor::zeros_like(t.value)});
  return ParamSet(std::move(out));
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (tensors_[i].name != other.tensors_[i].name) return false;
    if (!tensors_[i].value.same_shape(other.tensors_[i].value)) return false;
  }
  return true;
}

std::size_t ParamSet::element_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.value.size();
  return n;
}

bool bitwise_equal(const ParamSet& a, const ParamSet& b) {
  if (!a.same_layout(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!bitwise_equal(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace nca
