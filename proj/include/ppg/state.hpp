#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ppg/error.hpp"

namespace ppg {

// Model states are opaque fixed-size vectors of doubles.
using State = std::span<const double>;
using MutableState = std::span<double>;

// Contiguous row-major storage for `size()` states of dimension `dim()`.
class StateArray {
 public:
  StateArray() = default;
  StateArray(std::size_t count, std::size_t dim) : dim_(dim), data_(count * dim, 0.0) {
    if (dim == 0) throw InputError("state dimension must be positive");
  }
  StateArray(std::size_t dim, std::vector<double> data) : dim_(dim), data_(std::move(data)) {
    if (dim == 0 || data_.size() % dim != 0) {
      throw InputError("state data size is not a multiple of the state dimension");
    }
  }

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return data_.empty(); }

  State operator[](std::size_t i) const noexcept { return {data_.data() + i * dim_, dim_}; }
  MutableState operator[](std::size_t i) noexcept { return {data_.data() + i * dim_, dim_}; }

  void push_back(State x) {
    if (dim_ == 0) dim_ = x.size();
    if (x.size() != dim_) throw InputError("state dimension mismatch");
    data_.insert(data_.end(), x.begin(), x.end());
  }

  std::span<const double> flat() const noexcept { return data_; }
  std::span<double> flat() noexcept { return data_; }

  friend bool operator==(const StateArray&, const StateArray&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// A path x_{0:n}; `length()` is n + 1.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(StateArray states) : states_(std::move(states)) {}

  // Scalar-state convenience.
  static Trajectory scalar(std::vector<double> xs) { return Trajectory(StateArray(1, std::move(xs))); }

  std::size_t length() const noexcept { return states_.size(); }
  std::size_t horizon() const noexcept { return states_.size() == 0 ? 0 : states_.size() - 1; }
  std::size_t dim() const noexcept { return states_.dim(); }
  State operator[](std::size_t m) const noexcept { return states_[m]; }
  const StateArray& states() const noexcept { return states_; }
  StateArray& states() noexcept { return states_; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  StateArray states_;
};

}  // namespace ppg
