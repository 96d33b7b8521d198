// SPDX-License-Identifier: Apache-2.0
#include "dfl/trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

namespace dfl {

namespace {

class HeaderReader {
 public:
  HeaderReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& message) const {
    throw Error(ErrorCode::trace_format, fmt::format("{}:{}: {}", source_, line_no_, message));
  }

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  // Reads "<key> <rest>" and returns the whitespace-split rest.
  std::vector<std::string> field(std::string_view key) {
    std::string line;
    if (!next(line)) fail(fmt::format("missing header field '{}'", key));
    std::istringstream ss(line);
    std::string got;
    ss >> got;
    if (got != key) fail(fmt::format("expected header field '{}', got '{}'", key, got));
    std::vector<std::string> rest;
    for (std::string tok; ss >> tok;) rest.push_back(tok);
    return rest;
  }

  std::vector<std::string> field(std::string_view key, std::size_t count) {
    auto rest = field(key);
    if (rest.size() != count) {
      fail(fmt::format("header field '{}' needs {} value(s), got {}", key, count, rest.size()));
    }
    return rest;
  }

  template <typename T>
  T number(const std::string& token) const {
    T value{};
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end) fail(fmt::format("invalid number '{}'", token));
    return value;
  }

  int line_no() const noexcept { return line_no_; }

 private:
  std::istream& in_;
  std::string source_;
  int line_no_ = 0;
};

}  // namespace

std::string_view to_string(TraceRole role) noexcept {
  return role == TraceRole::calibration ? "calibration" : "observation";
}

void write_trace(std::ostream& out, const TraceFile& trace) {
  const auto& h = trace.header;
  const auto& t = trace.tensor;
  if (h.sensors < 3 || link_count_for(h.sensors) != t.links()) {
    throw Error(ErrorCode::shape_mismatch,
                fmt::format("header declares {} sensors but the tensor has {} links", h.sensors, t.links()));
  }
  if (h.scene_ref.find_first_of(" \t\r\n") != std::string::npos) {
    throw Error(ErrorCode::invalid_argument, "scene reference must not contain whitespace");
  }
  std::string buf;
  buf += fmt::format("{} {}\n", kTraceMagic, kTraceVersion);
  buf += fmt::format("role {}\n", to_string(h.role));
  buf += fmt::format("position {}\n", h.position_id);
  if (h.target) {
    buf += fmt::format("target {} {}\n", h.target->x, h.target->y);
  } else {
    buf += "target none\n";
  }
  buf += fmt::format("scene {}\n", h.scene_ref.empty() ? "-" : h.scene_ref);
  buf += fmt::format("sensors {}\n", h.sensors);
  buf += fmt::format("links {}\n", t.links());
  buf += fmt::format("channels {}\n", fmt::join(t.channel_numbers(), " "));
  buf += fmt::format("quantization {} {}\n", t.quantization().offset_dbm, t.quantization().step_db);
  buf += fmt::format("samples {}\n", t.samples());
  buf += fmt::format("protocol_timeout_ms {}\n", h.protocol_timeout_ms);
  buf += fmt::format("rounds_averaged {}\n", h.rounds_averaged);
  buf += "end_header\n";
  out << buf;
  for (std::size_t l = 0; l < t.links(); ++l) {
    for (std::size_t c = 0; c < t.channels(); ++c) {
      buf.clear();
      fmt::format_to(std::back_inserter(buf), "{} {}", l + 1, t.channel_numbers()[c]);
      for (const auto code : t.cell(l, c)) fmt::format_to(std::back_inserter(buf), " {}", code);
      buf += '\n';
      out << buf;
    }
  }
  if (!out) throw Error(ErrorCode::io, "failed writing trace");
}

void write_trace(const std::filesystem::path& path, const TraceFile& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, fmt::format("cannot open {} for writing", path.string()));
  write_trace(out, trace);
}

TraceFile read_trace(std::istream& in, const std::string& source_name) {
  HeaderReader r(in, source_name);
  std::string line;
  if (!r.next(line)) r.fail("empty trace");
  {
    std::istringstream ss(line);
    std::string magic, version;
    ss >> magic >> version;
    if (magic != kTraceMagic) r.fail(fmt::format("not a trace file (magic '{}')", magic));
    const int v = r.number<int>(version);
    if (v != kTraceVersion) {
      throw Error(ErrorCode::version_mismatch,
                  fmt::format("{}: trace version {} is not supported (expected {})", source_name, v,
                              kTraceVersion));
    }
  }

  TraceFile trace;
  auto& h = trace.header;
  const auto role = r.field("role", 1)[0];
  if (role == "calibration") {
    h.role = TraceRole::calibration;
  } else if (role == "observation") {
    h.role = TraceRole::observation;
  } else {
    r.fail(fmt::format("unknown role '{}'", role));
  }
  h.position_id = r.number<int>(r.field("position", 1)[0]);
  const auto target = r.field("target");
  if (target.size() == 1 && target[0] == "none") {
    h.target.reset();
  } else if (target.size() == 2) {
    h.target = Point{r.number<double>(target[0]), r.number<double>(target[1])};
  } else {
    r.fail("target needs '<x> <y>' or 'none'");
  }
  h.scene_ref = r.field("scene", 1)[0];
  if (h.scene_ref == "-") h.scene_ref.clear();
  h.sensors = r.number<std::size_t>(r.field("sensors", 1)[0]);
  const auto links = r.number<std::size_t>(r.field("links", 1)[0]);
  if (h.sensors < 3 || links != link_count_for(h.sensors)) {
    r.fail(fmt::format("{} links is inconsistent with {} sensors", links, h.sensors));
  }
  std::vector<int> channels;
  for (const auto& tok : r.field("channels")) channels.push_back(r.number<int>(tok));
  if (channels.empty()) r.fail("no channels declared");
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (channels[c] < kMinChannel || channels[c] > kMaxChannel) {
      r.fail(fmt::format("channel {} outside 11..26", channels[c]));
    }
    if (c > 0 && channels[c] <= channels[c - 1]) r.fail("channel numbers must be strictly increasing");
  }
  const auto q = r.field("quantization", 2);
  Quantization quant{r.number<double>(q[0]), r.number<double>(q[1])};
  if (!(quant.step_db > 0.0)) r.fail("quantization step must be positive");
  const auto samples = r.number<std::size_t>(r.field("samples", 1)[0]);
  if (samples == 0) r.fail("sample count must be positive");
  h.protocol_timeout_ms = r.number<double>(r.field("protocol_timeout_ms", 1)[0]);
  h.rounds_averaged = r.number<std::size_t>(r.field("rounds_averaged", 1)[0]);
  if (!r.next(line) || line != "end_header") r.fail("expected 'end_header'");

  trace.tensor = RssTensor(links, channels, samples, quant);
  std::vector<std::uint8_t> seen(links * channels.size(), 0);
  std::size_t filled = 0;
  while (r.next(line)) {
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = p + line.size();
    auto read_uint = [&](unsigned long& value) {
      while (p < end && *p == ' ') ++p;
      if (p == end) return false;
      const auto [ptr, ec] = std::from_chars(p, end, value);
      if (ec != std::errc() || (ptr != end && *ptr != ' ')) {
        r.fail("malformed body line");
      }
      p = ptr;
      return true;
    };
    unsigned long link = 0, channel = 0;
    if (!read_uint(link) || !read_uint(channel)) r.fail("body line needs '<link> <channel> <codes>'");
    if (link < 1 || link > links) r.fail(fmt::format("link {} outside 1..{}", link, links));
    std::size_t c = channels.size();
    for (std::size_t k = 0; k < channels.size(); ++k) {
      if (static_cast<unsigned long>(channels[k]) == channel) c = k;
    }
    if (c == channels.size()) r.fail(fmt::format("channel {} not declared in the header", channel));
    auto& mark = seen[(link - 1) * channels.size() + c];
    if (mark) r.fail(fmt::format("duplicate cell (link {}, channel {})", link, channel));
    mark = 1;
    auto cell = trace.tensor.cell(link - 1, c);
    std::size_t n = 0;
    for (unsigned long code = 0; read_uint(code);) {
      if (code > 255) r.fail(fmt::format("RSS code {} outside 0..255", code));
      if (n == samples) r.fail(fmt::format("more than {} samples", samples));
      cell[n++] = static_cast<std::uint8_t>(code);
    }
    if (n != samples) r.fail(fmt::format("{} samples, header declares {}", n, samples));
    ++filled;
  }
  if (filled != seen.size()) {
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (!seen[i]) {
        throw Error(ErrorCode::trace_format,
                    fmt::format("{}: body is missing {} of {} cells, first (link {}, channel {})", source_name,
                                seen.size() - filled, seen.size(), i / channels.size() + 1,
                                channels[i % channels.size()]));
      }
    }
  }
  return trace;
}

TraceFile read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, fmt::format("cannot open trace {}", path.string()));
  return read_trace(in, path.string());
}

TraceHeader make_header(const Scene& scene, TraceRole role, int position_id, std::optional<Point> target,
                        std::string scene_ref) {
  TraceHeader h;
  h.role = role;
  h.position_id = position_id;
  h.target = target;
  h.scene_ref = std::move(scene_ref);
  h.sensors = scene.sensor_count();
  return h;
}

void check_trace_matches(const TraceFile& trace, const Scene& scene) {
  if (trace.header.sensors != scene.sensor_count() || trace.tensor.links() != scene.link_count()) {
    throw Error(ErrorCode::shape_mismatch,
                fmt::format("trace has {} sensors / {} links, scene has {} / {}", trace.header.sensors,
                            trace.tensor.links(), scene.sensor_count(), scene.link_count()));
  }
}

}  // namespace dfl
