#pragma once

#include <numbers>
#include <span>
#include <vector>

namespace shepherd {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform grid over the periodic domain [-pi, pi). Node i sits at -pi + i*dx;
/// the point +pi is identified with node 0.
class PeriodicGrid {
 public:
  explicit PeriodicGrid(int n_nodes = 250);

  int size() const { return n_nodes_; }
  double dx() const { return dx_; }
  double x_min() const { return -kPi; }
  double x_max() const { return kPi; }
  double node(int i) const { return -kPi + i * dx_; }
  std::vector<double> nodes() const;

  bool operator==(const PeriodicGrid& other) const { return n_nodes_ == other.n_nodes_; }

 private:
  int n_nodes_;
  double dx_;
};

/// Nonnegative density sampled at the grid nodes (mass per unit length).
class DensityField {
 public:
  DensityField() = default;
  explicit DensityField(PeriodicGrid grid, double fill = 0.0);
  DensityField(PeriodicGrid grid, std::vector<double> values);

  static DensityField uniform(PeriodicGrid grid, double mass);

  const PeriodicGrid& grid() const { return grid_; }
  int size() const { return grid_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](int i) const { return values_[i]; }
  double& operator[](int i) { return values_[i]; }

  /// Rescales so that integrate(*this) == mass. Throws if the current mass is
  /// not positive.
  void normalize(double mass);

  double min_value() const;

  /// Circular shift: result[i] = values[i - shift mod n].
  DensityField rotated(int shift) const;

 private:
  PeriodicGrid grid_{};
  std::vector<double> values_;
};

/// Maps x onto its representative in (-pi, pi]. Throws std::invalid_argument
/// on non-finite input.
double wrap(double x);

/// wrap(a - b): signed displacement from b to a on the circle.
double wrapped_signed_distance(double a, double b);

/// Rectangle rule, which is exact trapezoid on a uniform periodic grid.
double integrate(const DensityField& field);

/// L2 distance between two fields on the same grid.
double l2_norm(const DensityField& a, const DensityField& b);

/// L2 norm of a single field.
double l2_norm(const DensityField& a);

}  // namespace shepherd
