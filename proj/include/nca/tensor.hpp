// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nca {

/// Dense row-major float32 tensor. Only rank 1 and rank 2 are used by the
/// model, but the shape is kept general so checkpoints can describe any
/// tensor.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<float> data);

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  std::span<const float> row(std::size_t r) const;
  std::span<float> row(std::size_t r);

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }
  float& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  float at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  void fill(float value);
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<float> data_;
};

std::size_t element_count(const std::vector<std::size_t>& shape);
std::string shape_string(const std::vector<std::size_t>& shape);

/// Bitwise comparison; distinguishes -0.0f from 0.0f and compares NaN
/// payloads, unlike operator==.
bool bitwise_equal(const Tensor& a, const Tensor& b);

struct NamedTensor {
  std::string name;
  Tensor value;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// Ordered collection of named tensors. Parameters, gradients and optimizer
/// moments all use this layout so they can be zipped index by index.
class ParamSet {
 public:
  ParamSet() = default;
  explicit ParamSet(std::vector<NamedTensor> tensors) : tensors_(std::move(tensors)) {}

  std::size_t size() const { return tensors_.size(); }
  Tensor& operator[](std::size_t i) { return tensors_[i].value; }
  const Tensor& operator[](std::size_t i) const { return tensors_[i].value; }
  const std::string& name(std::size_t i) const { return tensors_[i].name; }
  const std::vector<NamedTensor>& entries() const { return tensors_; }

  /// Same names, same shapes, all zeros.
  ParamSet zeros_like() const;
  bool same_layout(const ParamSet& other) const;
  std::size_t element_count() const;

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<NamedTensor> tensors_;
};

bool bitwise_equal(const ParamSet& a, const ParamSet& b);

}  // namespace nca
