// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dfl {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point p, Point q) noexcept;

struct Sensor {
  int id = 0;  // 1-based, contiguous
  Point position;
};

struct MonitoredArea {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  bool contains(Point p) const noexcept {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

/// Line through a link's endpoints in the form a*x + b*y = e, with
/// a = y_j - y_i, b = x_i - x_j, e = x_i*y_j - x_j*y_i.
struct LineCoefficients {
  double a = 0.0;
  double b = 0.0;
  double e = 0.0;

  static LineCoefficients through(Point p_i, Point p_j) noexcept;
  double norm_sq() const noexcept { return a * a + b * b; }
};

struct Link {
  int id = 0;        // 1..L
  int sensor_i = 0;  // sensor_i < sensor_j
  int sensor_j = 0;
  Point p_i;
  Point p_j;
  LineCoefficients line;
};

/// How a point-to-link distance is measured. The infinite line is the
/// default everywhere; clamping to the segment suppresses votes from the
/// line's extension outside the sensor hull.
enum class DistanceMode { infinite_line, segment };

double point_line_distance(const Link& link, Point p,
                           DistanceMode mode = DistanceMode::infinite_line) noexcept;

/// 1 iff the target is strictly closer than `radius` to the link.
std::uint8_t ground_truth_indicator(const Link& link, Point target, double radius,
                                    DistanceMode mode = DistanceMode::infinite_line);

/// Immutable deployment: sensors, monitored area and the fully connected link
/// set. Links are numbered 1..K(K-1)/2 in lexicographic (i, j) order.
class Scene {
 public:
  static Scene build(std::vector<Sensor> sensors, MonitoredArea area);

  const std::vector<Sensor>& sensors() const noexcept { return sensors_; }
  const std::vector<Link>& links() const noexcept { return links_; }
  const MonitoredArea& area() const noexcept { return area_; }
  std::size_t sensor_count() const noexcept { return sensors_.size(); }
  std::size_t link_count() const noexcept { return links_.size(); }

  /// Link by 1-based id.
  const Link& link(int id) const;
  /// Link id for an unordered sensor pair.
  int link_id(int sensor_a, int sensor_b) const;

  /// I_l for every link, in link order.
  std::vector<std::uint8_t> indicators(Point target, double radius,
                                       DistanceMode mode = DistanceMode::infinite_line) const;

 private:
  Scene() = default;

  std::vector<Sensor> sensors_;
  MonitoredArea area_;
  std::vector<Link> links_;
};

/// Number of links for K fully connected sensors.
constexpr std::size_t link_count_for(std::size_t sensors) noexcept {
  return sensors * (sensors - 1) / 2;
}

// Scene config: text, '#' comments. One header line
//   area <x_min> <x_max> <y_min> <y_max>
// followed by one sensor per line: <id> <x> <y>.
Scene parse_scene(std::istream& in, const std::string& source_name = "<scene>");
Scene load_scene(const std::filesystem::path& path);
void write_scene(std::ostream& out, const Scene& scene, std::string_view comment = {});

/// 16-sensor, 4.2 m x 3.6 m deployment reconstructed from the stated
/// spacings: nine sensors on the outer walls at 0.9 m, seven on the inner
/// walls at 0.8 m, numbered counterclockwise. Coordinates are approximate.
Scene paper_layout();

/// K sensors evenly spaced counterclockwise along the boundary of `area`,
/// starting at (x_min, y_min) shifted by `offset` (fraction of one spacing).
Scene perimeter_layout(std::size_t sensors, const MonitoredArea& area, double offset = 0.0);

/// Test positions on a regular grid with the given spacing, strictly inside
/// the area (first row/column one spacing in from the walls).
std::vector<Point> test_grid(const MonitoredArea& area, double spacing);

}  // namespace dfl
