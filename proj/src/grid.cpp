#include "kslab/grid.hpp"

#include <algorithm>
#include <cmath>

namespace kslab {

double GridFunction::at(double xq) const {
  if (values.empty()) throw ConfigError("GridFunction::at on empty grid");
  if (xq <= x0) return values.front();
  const double xr = x_right();
  if (xq >= xr) return values.back();
  const double s = (xq - x0) / dx;
  std::size_t i = static_cast<std::size_t>(s);
  if (i >= values.size() - 1) i = values.size() - 2;
  const double w = s - static_cast<double>(i);
  return (1.0 - w) * values[i] + w * values[i + 1];
}

std::size_t GridFunction::nearest(double xq) const {
  if (values.empty()) throw ConfigError("GridFunction::nearest on empty grid");
  const double s = (xq - x0) / dx;
  if (s <= 0.0) return 0;
  const auto i = static_cast<std::size_t>(std::llround(s));
  return std::min(i, values.size() - 1);
}

GridFunction make_grid(double xl, double xr, std::size_t n) {
  if (!(xl < xr)) throw ConfigError("grid requires xl < xr");
  if (n < 3) throw ConfigError("grid requires at least 3 nodes");
  GridFunction g;
  g.x0 = xl;
  g.dx = (xr - xl) / static_cast<double>(n - 1);
  g.values.assign(n, 0.0);
  return g;
}

void validate(const GridFunction& u, const std::string& what) {
  if (u.size() < 3) throw ConfigError(what + ": needs at least 3 nodes");
  if (!(u.dx > 0.0) || !std::isfinite(u.dx))
    throw ConfigError(what + ": grid spacing must be positive and finite");
  if (!std::isfinite(u.x0)) throw ConfigError(what + ": grid origin not finite");
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u.values[i]))
      throw ConfigError(what + ": non-finite value at node " + std::to_string(i));
  }
}

void validate_density(const GridFunction& u, const std::string& what) {
  validate(u, what);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u.values[i] < 0.0)
      throw ConfigError(what + ": negative value at node " + std::to_string(i));
  }
}

bool same_grid(const GridFunction& a, const GridFunction& b) {
  return a.size() == b.size() && a.x0 == b.x0 && a.dx == b.dx;
}

double max_value(const GridFunction& u) {
  return *std::max_element(u.values.begin(), u.values.end());
}

double min_value(const GridFunction& u) {
  return *std::min_element(u.values.begin(), u.values.end());
}

double sup_norm(const GridFunction& u) {
  double m = 0.0;
  for (double v : u.values) m = std::max(m, std::abs(v));
  return m;
}

double sup_diff(const GridFunction& a, const GridFunction& b) {
  if (!same_grid(a, b)) throw ConfigError("sup_diff: grids differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace kslab
