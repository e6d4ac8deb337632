#pragma once

#include <array>
#include <vector>

#include "pathclosure/types.hpp"

namespace pathclosure {

struct GridAxis {
  double lower = 0.0;
  double upper = 1.0;
  int points = 0;

  double spacing() const { return (upper - lower) / (points - 1); }
};

/// Rectangular node grid over manifold coordinates, row-major flattening
/// with the last axis fastest.
struct GridSpec {
  std::vector<GridAxis> axes;

  int dim() const { return static_cast<int>(axes.size()); }

  int node_count() const {
    int n = 1;
    for (const auto& ax : axes) n *= ax.points;
    return n;
  }

  void validate(int min_points = 16) const {
    if (axes.empty() || axes.size() > 2) {
      throw InvalidParameterError("GridSpec: dim must be 1 or 2");
    }
    for (const auto& ax : axes) {
      if (!std::isfinite(ax.lower) || !std::isfinite(ax.upper) ||
          !(ax.lower < ax.upper)) {
        throw InvalidParameterError("GridSpec: need finite lower < upper");
      }
      if (ax.points < min_points) {
        throw InvalidParameterError("GridSpec: need >= " +
                                    std::to_string(min_points) +
                                    " points per dimension");
      }
    }
  }

  Vector node(int flat) const {
    Vector x(dim());
    for (int d = dim() - 1; d >= 0; --d) {
      const int n = axes[d].points;
      const int i = flat % n;
      flat /= n;
      x[d] = axes[d].lower + i * axes[d].spacing();
    }
    return x;
  }

  int flat_index(const std::vector<int>& multi) const {
    int f = 0;
    for (int d = 0; d < dim(); ++d) f = f * axes[d].points + multi[d];
    return f;
  }

  std::vector<int> multi_index(int flat) const {
    std::vector<int> m(dim());
    for (int d = dim() - 1; d >= 0; --d) {
      m[d] = flat % axes[d].points;
      flat /= axes[d].points;
    }
    return m;
  }

  int nearest_node(const Vector& x) const {
    std::vector<int> m(dim());
    for (int d = 0; d < dim(); ++d) {
      int i = static_cast<int>(std::lround((x[d] - axes[d].lower) / axes[d].spacing()));
      i = std::max(0, std::min(axes[d].points - 1, i));
      m[d] = i;
    }
    return flat_index(m);
  }

  /// Trapezoid quadrature weight per node (product over axes).
  Vector quadrature_weights() const {
    const int n = node_count();
    Vector w = Vector::Ones(n);
    for (int f = 0; f < n; ++f) {
      const auto m = multi_index(f);
      for (int d = 0; d < dim(); ++d) {
        const double h = axes[d].spacing();
        w[f] *= (m[d] == 0 || m[d] == axes[d].points - 1) ? 0.5 * h : h;
      }
    }
    return w;
  }

  bool same_as(const GridSpec& other) const {
    if (dim() != other.dim()) return false;
    for (int d = 0; d < dim(); ++d) {
      if (axes[d].points != other.axes[d].points ||
          axes[d].lower != other.axes[d].lower ||
          axes[d].upper != other.axes[d].upper) {
        return false;
      }
    }
    return true;
  }
};

inline GridSpec make_grid_1d(double lo, double hi, int points) {
  return GridSpec{{GridAxis{lo, hi, points}}};
}

inline GridSpec make_grid_2d(double lo0, double hi0, int n0, double lo1, double hi1,
                             int n1) {
  return GridSpec{{GridAxis{lo0, hi0, n0}, GridAxis{lo1, hi1, n1}}};
}

}  // namespace pathclosure
