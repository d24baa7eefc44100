#include "shepherd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace shepherd {

PeriodicGrid::PeriodicGrid(int n_nodes) : n_nodes_(n_nodes), dx_(kTwoPi / n_nodes) {
  if (n_nodes < 3) throw std::invalid_argument("PeriodicGrid: need at least 3 nodes");
}

std::vector<double> PeriodicGrid::nodes() const {
  std::vector<double> xs(n_nodes_);
  for (int i = 0; i < n_nodes_; ++i) xs[i] = node(i);
  return xs;
}

DensityField::DensityField(PeriodicGrid grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

DensityField::DensityField(PeriodicGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != grid_.size())
    throw std::invalid_argument("DensityField: value count does not match grid");
}

DensityField DensityField::uniform(PeriodicGrid grid, double mass) {
  return DensityField(grid, mass / kTwoPi);
}

void DensityField::normalize(double mass) {
  const double current = integrate(*this);
  if (!(current > 0.0)) throw std::domain_error("DensityField::normalize: nonpositive mass");
  const double scale = mass / current;
  for (double& v : values_) v *= scale;
}

double DensityField::min_value() const {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

DensityField DensityField::rotated(int shift) const {
  const int n = size();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[((i + shift) % n + n) % n] = values_[i];
  return DensityField(grid_, std::move(out));
}

double wrap(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("wrap: non-finite position");
  if (x > -kPi && x <= kPi) return x;
  // pi - mod(pi - x, 2pi) lands in (-pi, pi] with the tie going to +pi.
  double r = std::fmod(kPi - x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return kPi - r;
}

double wrapped_signed_distance(double a, double b) { return wrap(a - b); }

double integrate(const DensityField& field) {
  const auto v = field.values();
  return field.grid().dx() * std::accumulate(v.begin(), v.end(), 0.0);
}

double l2_norm(const DensityField& a, const DensityField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("l2_norm: grid mismatch");
  double acc = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(a.grid().dx() * acc);
}

double l2_norm(const DensityField& a) {
  double acc = 0.0;
  for (double v : a.values()) acc += v * v;
  return std::sqrt(a.grid().dx() * acc);
}

}  // namespace shepherd
