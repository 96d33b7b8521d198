// SPDX-License-Identifier: Apache-2.0
#include "dfl/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dfl/error.hpp"

namespace dfl {

double distance(Point p, Point q) noexcept { return std::hypot(p.x - q.x, p.y - q.y); }

LineCoefficients LineCoefficients::through(Point p_i, Point p_j) noexcept {
  return {p_j.y - p_i.y, p_i.x - p_j.x, p_i.x * p_j.y - p_j.x * p_i.y};
}

double point_line_distance(const Link& link, Point p, DistanceMode mode) noexcept {
  const auto& l = link.line;
  if (mode == DistanceMode::segment) {
    const double dx = link.p_j.x - link.p_i.x;
    const double dy = link.p_j.y - link.p_i.y;
    const double t = ((p.x - link.p_i.x) * dx + (p.y - link.p_i.y) * dy) / (dx * dx + dy * dy);
    if (t <= 0.0) return distance(p, link.p_i);
    if (t >= 1.0) return distance(p, link.p_j);
  }
  return std::abs(l.e - l.a * p.x - l.b * p.y) / std::sqrt(l.norm_sq());
}

std::uint8_t ground_truth_indicator(const Link& link, Point target, double radius,
                                    DistanceMode mode) {
  if (!(radius > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "obstruction radius must be positive");
  }
  return point_line_distance(link, target, mode) < radius ? 1 : 0;
}

Scene Scene::build(std::vector<Sensor> sensors, MonitoredArea area) {
  if (sensors.size() < 3) {
    throw Error(ErrorCode::invalid_argument,
                fmt::format("need at least 3 sensors, got {}", sensors.size()));
  }
  if (!(area.x_min < area.x_max) || !(area.y_min < area.y_max)) {
    throw Error(ErrorCode::invalid_argument, "monitored area must have x_min < x_max and y_min < y_max");
  }
  std::sort(sensors.begin(), sensors.end(),
            [](const Sensor& a, const Sensor& b) { return a.id < b.id; });
  for (std::size_t k = 0; k < sensors.size(); ++k) {
    const auto& s = sensors[k];
    if (k > 0 && sensors[k - 1].id == s.id) {
      throw Error(ErrorCode::duplicate_sensor_id, fmt::format("duplicate sensor id {}", s.id));
    }
    if (s.id != static_cast<int>(k) + 1) {
      throw Error(ErrorCode::invalid_argument,
                  fmt::format("sensor ids must be contiguous from 1; missing id {}", k + 1));
    }
    if (!std::isfinite(s.position.x) || !std::isfinite(s.position.y)) {
      throw Error(ErrorCode::invalid_argument, fmt::format("sensor {} has a non-finite position", s.id));
    }
  }

  Scene scene;
  scene.area_ = area;
  scene.links_.reserve(link_count_for(sensors.size()));
  int next_id = 1;
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    for (std::size_t j = i + 1; j < sensors.size(); ++j) {
      const Point p_i = sensors[i].position;
      const Point p_j = sensors[j].position;
      if (p_i == p_j) {
        throw Error(ErrorCode::coincident_sensors,
                    fmt::format("sensors {} and {} share a position", sensors[i].id, sensors[j].id));
      }
      scene.links_.push_back(
          {next_id++, sensors[i].id, sensors[j].id, p_i, p_j, LineCoefficients::through(p_i, p_j)});
    }
  }
  scene.sensors_ = std::move(sensors);
  return scene;
}

const Link& Scene::link(int id) const {
  if (id < 1 || static_cast<std::size_t>(id) > links_.size()) {
    throw Error(ErrorCode::invalid_argument, fmt::format("no link with id {}", id));
  }
  return links_[static_cast<std::size_t>(id - 1)];
}

int Scene::link_id(int sensor_a, int sensor_b) const {
  const int k = static_cast<int>(sensors_.size());
  if (sensor_a == sensor_b || sensor_a < 1 || sensor_b < 1 || sensor_a > k || sensor_b > k) {
    throw Error(ErrorCode::invalid_argument,
                fmt::format("no link between sensors {} and {}", sensor_a, sensor_b));
  }
  const int i = std::min(sensor_a, sensor_b);
  const int j = std::max(sensor_a, sensor_b);
  // Links for sensor i start after all pairs of lower-numbered sensors.
  const int before = (i - 1) * k - (i - 1) * i / 2;
  return before + (j - i);
}

std::vector<std::uint8_t> Scene::indicators(Point target, double radius, DistanceMode mode) const {
  std::vector<std::uint8_t> out;
  out.reserve(links_.size());
  for (const auto& l : links_) out.push_back(ground_truth_indicator(l, target, radius, mode));
  return out;
}

Scene parse_scene(std::istream& in, const std::string& source_name) {
  std::string raw;
  int line_no = 0;
  bool have_area = false;
  MonitoredArea area;
  std::vector<Sensor> sensors;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream line(raw);
    std::string first;
    if (!(line >> first)) continue;
    if (first == "area") {
      if (have_area) throw ConfigError(source_name, line_no, "duplicate area line");
      if (!(line >> area.x_min >> area.x_max >> area.y_min >> area.y_max)) {
        throw ConfigError(source_name, line_no, "expected: area <x_min> <x_max> <y_min> <y_max>");
      }
      have_area = true;
    } else {
      if (!have_area) throw ConfigError(source_name, line_no, "sensor line before area header");
      Sensor s;
      std::istringstream id_field(first);
      if (!(id_field >> s.id) || !id_field.eof() || !(line >> s.position.x >> s.position.y)) {
        throw ConfigError(source_name, line_no, "expected: <id> <x> <y>");
      }
      sensors.push_back(s);
    }
    std::string extra;
    if (line >> extra) throw ConfigError(source_name, line_no, fmt::format("unexpected token '{}'", extra));
  }
  if (!have_area) throw ConfigError(source_name, 0, "missing area header");
  try {
    return Scene::build(std::move(sensors), area);
  } catch (const Error& e) {
    throw ConfigError(source_name, 0, e.what());
  }
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open scene file");
  return parse_scene(in, path.string());
}

void write_scene(std::ostream& out, const Scene& scene, std::string_view comment) {
  if (!comment.empty()) fmt::print(out, "# {}\n", comment);
  const auto& a = scene.area();
  fmt::print(out, "area {} {} {} {}\n", a.x_min, a.x_max, a.y_min, a.y_max);
  for (const auto& s : scene.sensors()) {
    fmt::print(out, "{} {} {}\n", s.id, s.position.x, s.position.y);
  }
}

Scene paper_layout() {
  // Outer walls (bottom, left): 0.9 m pitch. Inner walls (right, top): 0.8 m.
  std::vector<Sensor> sensors = {
      {1, {0.0, 0.0}},  {2, {0.9, 0.0}},  {3, {1.8, 0.0}},  {4, {2.7, 0.0}},
      {5, {3.6, 0.0}},  {6, {4.2, 0.4}},  {7, {4.2, 1.2}},  {8, {4.2, 2.0}},
      {9, {4.2, 2.8}},  {10, {3.4, 3.6}}, {11, {2.6, 3.6}}, {12, {1.8, 3.6}},
      {13, {0.0, 3.6}}, {14, {0.0, 2.7}}, {15, {0.0, 1.8}}, {16, {0.0, 0.9}},
  };
  return Scene::build(std::move(sensors), {0.0, 4.2, 0.0, 3.6});
}

Scene perimeter_layout(std::size_t sensors, const MonitoredArea& area, double offset) {
  if (sensors < 3) throw Error(ErrorCode::invalid_argument, "need at least 3 sensors");
  if (!(area.width() > 0.0) || !(area.height() > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "monitored area must have positive size");
  }
  if (!(offset >= 0.0 && offset < 1.0)) throw Error(ErrorCode::invalid_argument, "offset must be in [0, 1)");
  const double w = area.width();
  const double h = area.height();
  const double spacing = 2.0 * (w + h) / static_cast<double>(sensors);
  std::vector<Sensor> out;
  out.reserve(sensors);
  for (std::size_t k = 0; k < sensors; ++k) {
    double s = spacing * (static_cast<double>(k) + offset);
    Point p;
    if (s < w) {
      p = {s, 0.0};
    } else if ((s -= w) < h) {
      p = {w, s};
    } else if ((s -= h) < w) {
      p = {w - s, h};
    } else {
      p = {0.0, h - (s - w)};
    }
    out.push_back({static_cast<int>(k + 1), {area.x_min + p.x, area.y_min + p.y}});
  }
  return Scene::build(std::move(out), area);
}

std::vector<Point> test_grid(const MonitoredArea& area, double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorCode::invalid_argument, "grid spacing must be positive");
  const auto interior = [spacing](double extent) {
    const auto n = static_cast<int>(std::ceil(extent / spacing - 1e-9)) - 1;
    return std::max(n, 0);
  };
  const int nx = interior(area.width());
  const int ny = interior(area.height());
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(nx * ny));
  for (int iy = 1; iy <= ny; ++iy) {
    for (int ix = 1; ix <= nx; ++ix) {
      out.push_back({area.x_min + ix * spacing, area.y_min + iy * spacing});
    }
  }
  return out;
}

}  // namespace dfl
