#pragma once

// Box grids standing in for R^n, node masks for bounded domains, zero
// extension/restriction and dilation about the origin.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fraclap/errors.hpp"

namespace fraclap::domain {

using Point = std::array<double, 2>;

/// Uniform grid of N^dim interior nodes on (−L, L)^dim with step h = 2L/(N+1).
struct BoxGrid {
  int dim = 1;
  double halfwidth = 1.0;
  int nodes_per_axis = 1;

  double step() const noexcept { return 2.0 * halfwidth / (nodes_per_axis + 1); }
  double cell_volume() const noexcept { return std::pow(step(), dim); }
  std::size_t size() const noexcept {
    return dim == 1 ? static_cast<std::size_t>(nodes_per_axis)
                    : static_cast<std::size_t>(nodes_per_axis) * static_cast<std::size_t>(nodes_per_axis);
  }
  double coord(int axis_index) const noexcept { return -halfwidth + (axis_index + 1) * step(); }
  std::array<int, 2> axis_indices(std::size_t node) const noexcept {
    if (dim == 1) return {static_cast<int>(node), 0};
    return {static_cast<int>(node % nodes_per_axis), static_cast<int>(node / nodes_per_axis)};
  }
  std::size_t index(int ix, int iy = 0) const noexcept {
    return static_cast<std::size_t>(ix) + static_cast<std::size_t>(nodes_per_axis) * static_cast<std::size_t>(iy);
  }
  Point point(std::size_t node) const noexcept {
    const auto ij = axis_indices(node);
    return {coord(ij[0]), dim == 2 ? coord(ij[1]) : 0.0};
  }

  friend bool operator==(const BoxGrid& a, const BoxGrid& b) {
    return a.dim == b.dim && a.nodes_per_axis == b.nodes_per_axis &&
           std::abs(a.halfwidth - b.halfwidth) <= 1e-12 * std::max(1.0, std::abs(a.halfwidth));
  }
};

inline BoxGrid make_box(int dim, double halfwidth, int nodes_per_axis) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("make_box: dim must be 1 or 2");
  if (!(halfwidth > 0.0) || !std::isfinite(halfwidth)) throw std::invalid_argument("make_box: halfwidth must be > 0");
  if (nodes_per_axis < 1) throw std::invalid_argument("make_box: nodes_per_axis must be >= 1");
  return BoxGrid{dim, halfwidth, nodes_per_axis};
}

/// True when both grids share node positions (same step, same parity), so
/// one can be re-expressed on the other.
inline bool aligned(const BoxGrid& a, const BoxGrid& b) {
  return a.dim == b.dim && std::abs(a.step() - b.step()) <= 1e-12 * a.step() &&
         (a.nodes_per_axis - b.nodes_per_axis) % 2 == 0;
}

enum class ShapeKind { interval, square, lshape, disk, custom };

struct Shape {
  ShapeKind kind = ShapeKind::custom;
  std::vector<double> params;

  int dim() const noexcept { return kind == ShapeKind::interval ? 1 : 2; }

  /// Strict membership in the open shape; `slack` shrinks the shape so that
  /// nodes sitting on the boundary up to roundoff are excluded.
  bool contains(const Point& p, double slack) const {
    switch (kind) {
      case ShapeKind::interval:
        return p[0] > params[0] + slack && p[0] < params[1] - slack;
      case ShapeKind::square: {
        const double a = 0.5 * params[0] - slack;
        return std::abs(p[0]) < a && std::abs(p[1]) < a;
      }
      case ShapeKind::lshape: {
        const double a = 0.5 * params[0] - slack;
        return std::abs(p[0]) < a && std::abs(p[1]) < a && (p[0] < -slack || p[1] < -slack);
      }
      case ShapeKind::disk:
        return std::hypot(p[0], p[1]) < params[0] - slack;
      case ShapeKind::custom:
        break;
    }
    throw std::logic_error("Shape::contains: custom shapes have no geometry");
  }

  /// Sup-norm radius of the closed shape about the origin.
  double reach() const {
    switch (kind) {
      case ShapeKind::interval:
        return std::max(std::abs(params[0]), std::abs(params[1]));
      case ShapeKind::square:
      case ShapeKind::lshape:
        return 0.5 * params[0];
      case ShapeKind::disk:
        return params[0];
      case ShapeKind::custom:
        break;
    }
    throw std::logic_error("Shape::reach: custom shapes have no geometry");
  }

  /// Euclidean diameter of the closed shape.
  double diameter() const {
    switch (kind) {
      case ShapeKind::interval:
        return params[1] - params[0];
      case ShapeKind::square:
      case ShapeKind::lshape:
        return std::sqrt(2.0) * params[0];
      case ShapeKind::disk:
        return 2.0 * params[0];
      case ShapeKind::custom:
        break;
    }
    throw std::logic_error("Shape::diameter: custom shapes have no geometry");
  }

  Shape scaled(double alpha) const {
    Shape out = *this;
    for (double& p : out.params) p *= alpha;
    return out;
  }

  std::string spec() const {
    auto num = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return std::string(buf);
    };
    switch (kind) {
      case ShapeKind::interval:
        return "interval:" + num(params[0]) + "," + num(params[1]);
      case ShapeKind::square:
        return "square:" + num(params[0]);
      case ShapeKind::lshape:
        return "lshape:" + num(params[0]);
      case ShapeKind::disk:
        return "disk:" + num(params[0]);
      case ShapeKind::custom:
        break;
    }
    return "custom";
  }
};

/// Parses "interval:a,b", "square:side", "lshape:side" or "disk:r".
inline Shape parse_shape(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("shape '" + std::string(text) + "': missing ':'");
  const std::string_view name = text.substr(0, colon);
  std::string_view rest = text.substr(colon + 1);
  std::vector<double> values;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string item(rest.substr(0, comma));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) {
      throw std::invalid_argument("shape '" + std::string(text) + "': bad number '" + item + "'");
    }
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }

  Shape s;
  std::size_t expected = 1;
  if (name == "interval") {
    s.kind = ShapeKind::interval;
    expected = 2;
  } else if (name == "square") {
    s.kind = ShapeKind::square;
  } else if (name == "lshape") {
    s.kind = ShapeKind::lshape;
  } else if (name == "disk") {
    s.kind = ShapeKind::disk;
  } else {
    throw std::invalid_argument("shape '" + std::string(text) + "': unknown kind '" + std::string(name) + "'");
  }
  if (values.size() != expected) {
    throw std::invalid_argument("shape '" + std::string(text) + "': expected " + std::to_string(expected) +
                                " parameter(s)");
  }
  if (s.kind == ShapeKind::interval ? !(values[0] < values[1]) : values[0] < 0.0) {
    throw std::invalid_argument("shape '" + std::string(text) + "': invalid extent");
  }
  s.params = std::move(values);
  return s;
}

/// Node mask of a bounded domain Ω inside a box grid.
class SubDomain {
 public:
  SubDomain(BoxGrid grid, Shape shape, std::vector<unsigned char> mask)
      : grid_(grid), shape_(std::move(shape)), mask_(std::move(mask)) {
    if (mask_.size() != grid_.size()) throw std::invalid_argument("SubDomain: mask size does not match grid");
    for (std::size_t i = 0; i < mask_.size(); ++i)
      if (mask_[i]) nodes_.push_back(i);
    if (nodes_.empty()) throw std::invalid_argument("SubDomain: empty mask");
  }

  const BoxGrid& grid() const noexcept { return grid_; }
  const Shape& shape() const noexcept { return shape_; }
  std::span<const unsigned char> mask() const noexcept { return mask_; }
  /// Box indices of the masked nodes, ascending.
  std::span<const std::size_t> nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool contains_node(std::size_t box_index) const { return box_index < mask_.size() && mask_[box_index]; }
  bool is_full_box() const noexcept { return nodes_.size() == mask_.size(); }

  /// Position of a box node within nodes(), or size() if not masked.
  std::size_t position(std::size_t box_index) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), box_index);
    return (it != nodes_.end() && *it == box_index) ? static_cast<std::size_t>(it - nodes_.begin()) : size();
  }

  /// Connectivity of the mask as a grid graph (nearest neighbours).
  bool is_connected() const {
    std::vector<unsigned char> seen(mask_.size(), 0);
    std::deque<std::size_t> queue{nodes_.front()};
    seen[nodes_.front()] = 1;
    std::size_t count = 0;
    while (!queue.empty()) {
      const std::size_t node = queue.front();
      queue.pop_front();
      ++count;
      for (std::size_t nb : neighbours(node)) {
        if (mask_[nb] && !seen[nb]) {
          seen[nb] = 1;
          queue.push_back(nb);
        }
      }
    }
    return count == nodes_.size();
  }

  /// In-box nearest neighbours of a node (not filtered by the mask).
  std::vector<std::size_t> neighbours(std::size_t node) const {
    std::vector<std::size_t> out;
    const auto ij = grid_.axis_indices(node);
    const int n = grid_.nodes_per_axis;
    if (ij[0] > 0) out.push_back(grid_.index(ij[0] - 1, ij[1]));
    if (ij[0] + 1 < n) out.push_back(grid_.index(ij[0] + 1, ij[1]));
    if (grid_.dim == 2) {
      if (ij[1] > 0) out.push_back(grid_.index(ij[0], ij[1] - 1));
      if (ij[1] + 1 < n) out.push_back(grid_.index(ij[0], ij[1] + 1));
    }
    return out;
  }

  /// Index ranges when the mask is an axis-aligned block, used for the
  /// closed-form sine eigenbasis: {x0, nx, y0, ny}.
  bool rectangular_block(std::array<int, 4>& block) const {
    const auto first = grid_.axis_indices(nodes_.front());
    const auto last = grid_.axis_indices(nodes_.back());
    int x0 = grid_.nodes_per_axis, x1 = -1;
    for (std::size_t node : nodes_) {
      const auto ij = grid_.axis_indices(node);
      x0 = std::min(x0, ij[0]);
      x1 = std::max(x1, ij[0]);
    }
    const int nx = x1 - x0 + 1;
    const int ny = grid_.dim == 2 ? last[1] - first[1] + 1 : 1;
    if (static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) != nodes_.size()) return false;
    for (std::size_t node : nodes_) {
      const auto ij = grid_.axis_indices(node);
      if (ij[0] < x0 || ij[0] > x1) return false;
    }
    block = {x0, nx, grid_.dim == 2 ? first[1] : 0, ny};
    return true;
  }

 private:
  BoxGrid grid_;
  Shape shape_;
  std::vector<unsigned char> mask_;
  std::vector<std::size_t> nodes_;
};

/// Real values on every node of a box grid.
struct GridFunction {
  BoxGrid grid;
  std::vector<double> values;
};

namespace detail {
inline double membership_slack(const BoxGrid& g) { return 1e-9 * g.step(); }
}  // namespace detail

inline SubDomain make_shape(const BoxGrid& grid, const Shape& shape) {
  if (shape.kind == ShapeKind::custom) throw std::invalid_argument("make_shape: use make_custom for custom masks");
  if (shape.dim() != grid.dim) {
    throw std::invalid_argument("make_shape: shape '" + shape.spec() + "' is " + std::to_string(shape.dim()) +
                                "D but the grid is " + std::to_string(grid.dim) + "D");
  }
  if (shape.reach() > grid.halfwidth * (1.0 + 1e-12)) {
    throw std::invalid_argument("make_shape: shape '" + shape.spec() + "' exceeds the box of halfwidth " +
                                std::to_string(grid.halfwidth));
  }
  std::vector<unsigned char> mask(grid.size(), 0);
  const double slack = detail::membership_slack(grid);
  bool any = false;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = shape.contains(grid.point(i), slack) ? 1 : 0;
    any = any || mask[i];
  }
  if (!any) throw std::invalid_argument("make_shape: shape '" + shape.spec() + "' contains no grid node (empty mask)");
  return SubDomain(grid, shape, std::move(mask));
}

inline SubDomain make_custom(const BoxGrid& grid, std::vector<unsigned char> mask) {
  return SubDomain(grid, Shape{ShapeKind::custom, {}}, std::move(mask));
}

inline SubDomain full_box(const BoxGrid& grid) { return make_custom(grid, std::vector<unsigned char>(grid.size(), 1)); }

inline GridFunction extend_by_zero(const SubDomain& omega, std::span<const double> u) {
  if (u.size() != omega.size()) throw std::invalid_argument("extend_by_zero: value count does not match the domain");
  GridFunction v{omega.grid(), std::vector<double>(omega.grid().size(), 0.0)};
  for (std::size_t k = 0; k < u.size(); ++k) v.values[omega.nodes()[k]] = u[k];
  return v;
}

inline std::vector<double> restrict_to(const GridFunction& v, const SubDomain& omega) {
  if (!(v.grid == omega.grid()) || v.values.size() != omega.grid().size()) {
    throw std::invalid_argument("restrict_to: grid mismatch");
  }
  std::vector<double> u(omega.size());
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = v.values[omega.nodes()[k]];
  return u;
}

inline bool supported_in(const GridFunction& v, const SubDomain& omega) {
  if (!(v.grid == omega.grid())) return false;
  for (std::size_t i = 0; i < v.values.size(); ++i)
    if (v.values[i] != 0.0 && !omega.contains_node(i)) return false;
  return true;
}

/// Box index in `to` of node `node` of `from`; the grids must be aligned.
/// Returns to.size() when the node falls outside `to`.
inline std::size_t map_node(const BoxGrid& from, std::size_t node, const BoxGrid& to) {
  const int offset = (to.nodes_per_axis - from.nodes_per_axis) / 2;
  const auto ij = from.axis_indices(node);
  const int ix = ij[0] + offset;
  const int iy = from.dim == 2 ? ij[1] + offset : 0;
  if (ix < 0 || ix >= to.nodes_per_axis || iy < 0 || (to.dim == 2 && iy >= to.nodes_per_axis)) return to.size();
  return to.index(ix, iy);
}

/// Re-expresses Ω on an aligned box that covers all of its nodes.
inline SubDomain embed(const SubDomain& omega, const BoxGrid& box) {
  if (!aligned(omega.grid(), box)) throw std::invalid_argument("embed: grids are not aligned");
  std::vector<unsigned char> mask(box.size(), 0);
  for (std::size_t node : omega.nodes()) {
    const std::size_t j = map_node(omega.grid(), node, box);
    if (j >= box.size()) throw std::invalid_argument("embed: domain does not fit in the target box");
    mask[j] = 1;
  }
  return SubDomain(box, omega.shape(), std::move(mask));
}

/// Positions of inner's nodes within outer.nodes(). Throws unless the masks
/// are nested on aligned grids.
inline std::vector<std::size_t> inclusion_positions(const SubDomain& inner, const SubDomain& outer) {
  if (!aligned(inner.grid(), outer.grid())) throw std::invalid_argument("inclusion: grids are not aligned");
  std::vector<std::size_t> pos(inner.size());
  for (std::size_t k = 0; k < inner.size(); ++k) {
    const std::size_t j = map_node(inner.grid(), inner.nodes()[k], outer.grid());
    const std::size_t p = j < outer.grid().size() ? outer.position(j) : outer.size();
    if (p >= outer.size()) throw std::invalid_argument("inclusion: masks are not nested");
    pos[k] = p;
  }
  return pos;
}

inline bool is_nested(const SubDomain& inner, const SubDomain& outer) {
  try {
    (void)inclusion_positions(inner, outer);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

/// Box aligned with `grid` (same step and node positions) grown by k nodes on each side.
inline BoxGrid grow_box(const BoxGrid& grid, int k) {
  return BoxGrid{grid.dim, grid.halfwidth + k * grid.step(), grid.nodes_per_axis + 2 * k};
}

/// Smallest aligned box (never smaller than `grid`) with halfwidth ≥ target.
inline BoxGrid box_covering(const BoxGrid& grid, double target_halfwidth, int max_nodes_per_axis) {
  const double h = grid.step();
  const int k = std::max(0, static_cast<int>(std::ceil((target_halfwidth - grid.halfwidth) / h - 1e-9)));
  const long long n = static_cast<long long>(grid.nodes_per_axis) + 2LL * k;
  if (n > max_nodes_per_axis) {
    throw ResourceError("box of halfwidth " + std::to_string(target_halfwidth) + " needs " + std::to_string(n) +
                        " nodes per axis, above the limit " + std::to_string(max_nodes_per_axis) +
                        "; reduce the dilation factor or coarsen the grid");
  }
  return grow_box(grid, k);
}

/// αΩ at the same grid step, on a box grown so that its halfwidth is at least
/// α·reach(Ω) + h.
inline SubDomain dilate(const SubDomain& omega, double alpha, int max_nodes_per_axis = 16383) {
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw std::invalid_argument("dilate: alpha must be >= 1");
  const BoxGrid& g = omega.grid();
  const double h = g.step();
  if (omega.shape().kind != ShapeKind::custom) {
    const Shape scaled = omega.shape().scaled(alpha);
    const BoxGrid box = box_covering(g, alpha * omega.shape().reach() + h, max_nodes_per_axis);
    return make_shape(box, scaled);
  }
  // Custom masks: a node x belongs to αΩ when the original node nearest to
  // x/α is masked.
  double reach = 0.0;
  for (std::size_t node : omega.nodes()) {
    const Point p = g.point(node);
    reach = std::max({reach, std::abs(p[0]), std::abs(p[1])});
  }
  const BoxGrid box = box_covering(g, alpha * (reach + h) + h, max_nodes_per_axis);
  std::vector<unsigned char> mask(box.size(), 0);
  auto nearest = [&](double x) { return static_cast<int>(std::lround((x + g.halfwidth) / h)) - 1; };
  for (std::size_t i = 0; i < box.size(); ++i) {
    const Point p = box.point(i);
    const int ix = nearest(p[0] / alpha);
    const int iy = g.dim == 2 ? nearest(p[1] / alpha) : 0;
    if (ix < 0 || ix >= g.nodes_per_axis || iy < 0 || (g.dim == 2 && iy >= g.nodes_per_axis)) continue;
    mask[i] = omega.contains_node(g.index(ix, iy)) ? 1 : 0;
  }
  return SubDomain(box, omega.shape(), std::move(mask));
}

}  // namespace fraclap::domain
