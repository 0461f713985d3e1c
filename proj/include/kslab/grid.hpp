#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "kslab/errors.hpp"

namespace kslab {

/// Uniformly sampled real-valued function: values[i] = f(x0 + i*dx).
struct GridFunction {
  double x0 = 0.0;
  double dx = 1.0;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(double x0_, double dx_, std::vector<double> values_)
      : x0(x0_), dx(dx_), values(std::move(values_)) {}

  std::size_t size() const { return values.size(); }
  double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  double x_left() const { return x0; }
  double x_right() const { return x(size() - 1); }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  /// Value at arbitrary x by linear interpolation, clamped to the range.
  double at(double xq) const;

  /// Index of the grid node closest to xq.
  std::size_t nearest(double xq) const;
};

/// Grid with n nodes spanning [xl, xr] inclusive, values zero.
GridFunction make_grid(double xl, double xr, std::size_t n);

template <class F>
GridFunction sample(double xl, double xr, std::size_t n, F&& f) {
  GridFunction g = make_grid(xl, xr, n);
  for (std::size_t i = 0; i < n; ++i) g.values[i] = f(g.x(i));
  return g;
}

/// Throws ConfigError unless the grid is usable: n >= 3, dx > 0, all finite.
void validate(const GridFunction& u, const std::string& what);

/// validate() plus values >= 0 (densities).
void validate_density(const GridFunction& u, const std::string& what);

bool same_grid(const GridFunction& a, const GridFunction& b);

double max_value(const GridFunction& u);
double min_value(const GridFunction& u);
double sup_norm(const GridFunction& u);

/// sup |a - b|; requires identical grids.
double sup_diff(const GridFunction& a, const GridFunction& b);

}  // namespace kslab
