#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "aquafel/core.hpp"

namespace aquafel {

/// Binary occupancy grid of the water body. 1 = navigable water, 0 = land.
///
/// Positions are continuous cell coordinates (x = column, y = row). A position
/// belongs to the cell floor(y), floor(x); the max edges of the map are outside.
class GridMap {
 public:
  /// Sampling step used when truncating a move against the shoreline.
  static constexpr double kClipResolution = 0.1;

  GridMap(int rows, int cols, std::vector<std::uint8_t> cells, double cell_size_m = 100.0)
      : rows_(rows), cols_(cols), cell_size_m_(cell_size_m), cells_(std::move(cells)) {
    if (rows <= 0 || cols <= 0) throw DimensionError("map dimensions must be positive");
    if (cells_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
      throw DimensionError("cell count does not match rows*cols");
    if (!(cell_size_m > 0.0)) throw DimensionError("cell size must be positive");
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      if (cells_[i] > 1) throw DimensionError("cell values must be 0 or 1");
      if (cells_[i] == 1) water_.push_back(static_cast<int>(i));
    }
    if (water_.empty()) throw DimensionError("map has no water cells");
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  double cell_size_m() const noexcept { return cell_size_m_; }
  const std::vector<std::uint8_t>& cells() const noexcept { return cells_; }

  bool in_bounds(int r, int c) const noexcept { return r >= 0 && c >= 0 && r < rows_ && c < cols_; }
  bool is_water(int r, int c) const noexcept { return in_bounds(r, c) && cells_[index(r, c)] == 1; }
  bool is_water(std::size_t linear) const noexcept { return cells_[linear] == 1; }

  std::size_t index(int r, int c) const noexcept {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c);
  }

  /// Row-major linear indices of all water cells, ascending.
  const std::vector<int>& water_cells() const noexcept { return water_; }

  Vec2 cell_center(int linear) const noexcept {
    return {static_cast<double>(linear % cols_) + 0.5, static_cast<double>(linear / cols_) + 0.5};
  }

  /// Linear index of the cell containing p, or -1 when p is outside the map.
  int cell_of(Vec2 p) const noexcept {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return -1;
    const double fx = std::floor(p.x);
    const double fy = std::floor(p.y);
    if (fx < 0.0 || fy < 0.0 || fx >= cols_ || fy >= rows_) return -1;
    return static_cast<int>(index(static_cast<int>(fy), static_cast<int>(fx)));
  }

  bool is_navigable(Vec2 p) const noexcept {
    const int cell = cell_of(p);
    return cell >= 0 && cells_[static_cast<std::size_t>(cell)] == 1;
  }

  /// Farthest navigable point along from->to, walking the segment in
  /// kClipResolution steps and stopping at the first sample that leaves water.
  Vec2 clip_move(Vec2 from, Vec2 to) const {
    const double length = distance(from, to);
    if (length == 0.0) return from;
    const auto steps = static_cast<long>(std::ceil(length / kClipResolution));
    Vec2 last = from;
    for (long k = 1; k <= steps; ++k) {
      const Vec2 p = (k == steps) ? to : from + (static_cast<double>(k) * kClipResolution / length) * (to - from);
      if (!is_navigable(p)) return last;
      last = p;
    }
    return last;
  }

  /// Smallest bounding-box extent (in cells) of the water area.
  int shortest_extent_cells() const noexcept {
    int r0 = rows_, r1 = -1, c0 = cols_, c1 = -1;
    for (int w : water_) {
      const int r = w / cols_, c = w % cols_;
      r0 = std::min(r0, r);
      r1 = std::max(r1, r);
      c0 = std::min(c0, c);
      c1 = std::max(c1, c);
    }
    return std::min(r1 - r0 + 1, c1 - c0 + 1);
  }

  double shortest_length_m() const noexcept { return shortest_extent_cells() * cell_size_m_; }

  friend bool operator==(const GridMap& a, const GridMap& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.cell_size_m_ == b.cell_size_m_ && a.cells_ == b.cells_;
  }

 private:
  int rows_;
  int cols_;
  double cell_size_m_;
  std::vector<std::uint8_t> cells_;
  std::vector<int> water_;
};

namespace detail {

inline bool parse_count(std::string_view token, int& out) {
  if (token.empty()) return false;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, out);
  return ec == std::errc{} && ptr == end && out > 0;
}

}  // namespace detail

/// Parses the ASCII map format: "<rows> <cols>" then one line per row of
/// space-separated 0/1 symbols. Trailing empty lines are accepted.
inline GridMap parse_map(std::string_view text, double cell_size_m = 100.0) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(1, "empty map file");

  const std::string_view header = lines[0];
  const std::size_t sp = header.find(' ');
  int rows = 0, cols = 0;
  if (sp == std::string_view::npos || !detail::parse_count(header.substr(0, sp), rows) ||
      !detail::parse_count(header.substr(sp + 1), cols))
    throw ParseError(1, "malformed header, expected \"<rows> <cols>\"");

  if (lines.size() - 1 != static_cast<std::size_t>(rows))
    throw ParseError(std::min(lines.size(), static_cast<std::size_t>(rows) + 1) + 1,
                     "expected " + std::to_string(rows) + " rows, found " + std::to_string(lines.size() - 1));

  std::vector<std::uint8_t> cells;
  cells.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int r = 0; r < rows; ++r) {
    const std::size_t line_no = static_cast<std::size_t>(r) + 2;
    const std::string_view line = lines[static_cast<std::size_t>(r) + 1];
    int count = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (i % 2 == 1) {
        if (ch != ' ') throw ParseError(line_no, "symbols must be separated by single spaces");
        continue;
      }
      if (ch != '0' && ch != '1') throw ParseError(line_no, std::string("invalid symbol '") + ch + "'");
      cells.push_back(static_cast<std::uint8_t>(ch - '0'));
      ++count;
    }
    if (line.size() % 2 == 0 || count != cols)
      throw ParseError(line_no, "row has " + std::to_string(count) + " symbols, expected " + std::to_string(cols));
  }
  if (std::find(cells.begin(), cells.end(), std::uint8_t{1}) == cells.end())
    throw ParseError(static_cast<std::size_t>(rows) + 1, "map contains no water cells");
  return GridMap(rows, cols, std::move(cells), cell_size_m);
}

inline GridMap load_map(const std::filesystem::path& path, double cell_size_m = 100.0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open map file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_map(buf.str(), cell_size_m);
}

inline std::string format_map(const GridMap& map) {
  std::string out = std::to_string(map.rows()) + " " + std::to_string(map.cols()) + "\n";
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) {
      if (c > 0) out.push_back(' ');
      out.push_back(map.is_water(r, c) ? '1' : '0');
    }
    out.push_back('\n');
  }
  return out;
}

/// Shortest 8-connected water route from the cell of `from` to the cell of `to`,
/// as the cell centers to visit after leaving `from`'s cell, ending with `to`
/// itself. Diagonal steps need both orthogonal neighbours to be water so no
/// leg cuts a land corner. Empty when either end is on land or unreachable.
inline std::vector<Vec2> water_path(const GridMap& map, Vec2 from, Vec2 to) {
  const int src = map.cell_of(from);
  const int dst = map.cell_of(to);
  if (src < 0 || dst < 0 || !map.is_water(static_cast<std::size_t>(src)) || !map.is_water(static_cast<std::size_t>(dst)))
    return {};
  const std::size_t n = map.cells().size();
  std::vector<double> cost(n, std::numeric_limits<double>::infinity());
  std::vector<int> prev(n, -1);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  cost[static_cast<std::size_t>(src)] = 0.0;
  open.emplace(0.0, src);
  while (!open.empty()) {
    const auto [d, cell] = open.top();
    open.pop();
    if (d > cost[static_cast<std::size_t>(cell)]) continue;
    if (cell == dst) break;
    const int r = cell / map.cols(), c = cell % map.cols();
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        if (!map.is_water(r + dr, c + dc)) continue;
        if (dr != 0 && dc != 0 && (!map.is_water(r + dr, c) || !map.is_water(r, c + dc))) continue;
        const int next = static_cast<int>(map.index(r + dr, c + dc));
        const double nd = d + ((dr != 0 && dc != 0) ? std::numbers::sqrt2 : 1.0);
        if (nd < cost[static_cast<std::size_t>(next)]) {
          cost[static_cast<std::size_t>(next)] = nd;
          prev[static_cast<std::size_t>(next)] = cell;
          open.emplace(nd, next);
        }
      }
    }
  }
  if (!std::isfinite(cost[static_cast<std::size_t>(dst)])) return {};
  std::vector<Vec2> route{to};
  if (dst != src) route.push_back(map.cell_center(dst));
  for (int cell = prev[static_cast<std::size_t>(dst)]; cell >= 0 && cell != src; cell = prev[static_cast<std::size_t>(cell)])
    route.push_back(map.cell_center(cell));
  if (dst != src) route.push_back(map.cell_center(src));
  std::reverse(route.begin(), route.end());
  return route;
}

/// Boolean mask of water cells as a Field (1.0 water, 0.0 land).
inline Field water_mask(const GridMap& map) {
  Field mask(map.rows(), map.cols(), 0.0);
  for (int w : map.water_cells()) mask[static_cast<std::size_t>(w)] = 1.0;
  return mask;
}

}  // namespace aquafel
