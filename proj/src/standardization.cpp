#include "cpforge/standardization.hpp"

#include <cmath>

#include "cpforge/error.hpp"

namespace cpforge {

void Points::push_back(std::span<const double> values) {
  if (dim_ == 0 && data_.empty()) dim_ = values.size();
  if (values.size() != dim_) throw Error(ErrorCode::InvalidArgument, "point dimension mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

Standardization Standardization::fit(const Points& x) {
  const std::size_t n = x.size();
  const std::size_t d = x.dim();
  Standardization s;
  s.mean.assign(d, 0.0);
  s.stddev.assign(d, 0.0);
  if (n == 0) return s;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += x.row(i)[j];
  for (auto& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = x.row(i)[j] - s.mean[j];
      s.stddev[j] += dev * dev;
    }
  for (auto& v : s.stddev) v = std::sqrt(v / static_cast<double>(n));
  return s;
}

Standardization Standardization::identity(std::size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

void Standardization::apply(std::span<const double> in, std::span<double> out) const {
  for (std::size_t j = 0; j < in.size(); ++j)
    out[j] = stddev[j] < kStdFloor ? 0.0 : (in[j] - mean[j]) / stddev[j];
}

void Standardization::invert(std::span<const double> in, std::span<double> out) const {
  for (std::size_t j = 0; j < in.size(); ++j)
    out[j] = stddev[j] < kStdFloor ? mean[j] : in[j] * stddev[j] + mean[j];
}

Points Standardization::apply(const Points& x) const {
  Points out(x.size(), x.dim());
  for (std::size_t i = 0; i < x.size(); ++i) apply(x.row(i), out.row(i));
  return out;
}

}  // namespace cpforge
