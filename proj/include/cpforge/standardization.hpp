#pragma once

#include <span>
#include <vector>

namespace cpforge {

// Dense row-major point set.
class Points {
 public:
  Points() = default;
  Points(std::size_t count, std::size_t dim) : dim_(dim), data_(count * dim, 0.0) {}

  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const { return dim_; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

  void push_back(std::span<const double> values);

  friend bool operator==(const Points&, const Points&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);

// Per-feature z-scoring. Features whose standard deviation falls below the
// floor are treated as constant and map to 0.
struct Standardization {
  static constexpr double kStdFloor = 1e-9;

  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardization fit(const Points& x);
  static Standardization identity(std::size_t dim);

  void apply(std::span<const double> in, std::span<double> out) const;
  void invert(std::span<const double> in, std::span<double> out) const;
  Points apply(const Points& x) const;

  friend bool operator==(const Standardization&, const Standardization&) = default;
};

}  // namespace cpforge
