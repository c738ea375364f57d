// Copyright 2026 The seedprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "seedprop/store/label_io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include <fmt/format.h>

#include "seedprop/core/error.h"

namespace seedprop {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

double to_double(std::string_view field) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() ||
      !std::isfinite(value)) {
    throw ParseError("", 0, "not a number: '" + std::string(field) + "'");
  }
  return value;
}

int to_class(std::string_view field, std::size_t num_classes) {
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || value < 0) {
    throw ParseError("", 0, "bad class id '" + std::string(field) + "'");
  }
  if (num_classes > 0 && static_cast<std::size_t>(value) >= num_classes) {
    throw ParseError("", 0,
                     "class id " + std::to_string(value) + " out of range (" +
                         std::to_string(num_classes) + " classes)");
  }
  return value;
}

std::string_view trim_line(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
    line.remove_suffix(1);
  }
  return line;
}

template <typename T, typename Parse>
std::vector<T> read_lines(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open label file " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string_view view = trim_line(line);
    if (view.empty()) continue;
    try {
      out.push_back(parse(view));
    } catch (const ParseError& e) {
      std::string message = e.what();
      if (message.rfind(": ", 0) == 0) message.erase(0, 2);
      throw ParseError(path.string(), number, message);
    }
  }
  return out;
}

NormBox box_from_fields(std::span<const std::string_view> fields,
                        std::size_t num_classes) {
  NormBox box{to_class(fields[0], num_classes), to_double(fields[1]),
              to_double(fields[2]), to_double(fields[3]), to_double(fields[4])};
  try {
    validate(box);
  } catch (const ValidationError& e) {
    throw ParseError("", 0, e.what());
  }
  return box;
}

}  // namespace

std::string format_fixed6(double value) {
  const double scaled = std::floor(value * 1e6 + 0.5);
  const bool negative = scaled < 0;
  const auto magnitude = static_cast<long long>(std::fabs(scaled));
  return fmt::format("{}{}.{:06d}", negative ? "-" : "", magnitude / 1000000,
                     magnitude % 1000000);
}

std::string frame_stem(int frame_index) { return fmt::format("{:06d}", frame_index); }

int parse_frame_stem(std::string_view stem) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), value);
  if (stem.empty() || ec != std::errc() || ptr != stem.data() + stem.size() ||
      value < 0) {
    throw ParseError(std::string(stem), 0, "not a frame index");
  }
  return value;
}

std::string format_box_line(const NormBox& box) {
  return fmt::format("{} {} {} {} {}", box.class_id, format_fixed6(box.cx),
                     format_fixed6(box.cy), format_fixed6(box.w),
                     format_fixed6(box.h));
}

std::string format_polygon_line(const PolygonLabel& polygon) {
  std::string line = std::to_string(polygon.class_id);
  for (const Point2& v : polygon.vertices) {
    line += ' ';
    line += format_fixed6(v.x);
    line += ' ';
    line += format_fixed6(v.y);
  }
  return line;
}

std::string format_detection_line(const NormBox& box, double confidence) {
  return format_box_line(box) + " " + format_fixed6(confidence);
}

NormBox parse_box_line(std::string_view line, std::size_t num_classes) {
  const auto fields = split_fields(line);
  if (fields.size() != 5) {
    throw ParseError("", 0,
                     "expected 5 fields (class cx cy w h), got " +
                         std::to_string(fields.size()));
  }
  return box_from_fields(fields, num_classes);
}

PolygonLabel parse_polygon_line(std::string_view line, std::size_t num_classes) {
  const auto fields = split_fields(line);
  if (fields.size() < 7 || fields.size() % 2 == 0) {
    throw ParseError("", 0,
                     "expected class followed by at least 3 x,y pairs, got " +
                         std::to_string(fields.size()) + " fields");
  }
  PolygonLabel polygon;
  polygon.class_id = to_class(fields[0], num_classes);
  for (std::size_t i = 1; i + 1 < fields.size(); i += 2) {
    polygon.vertices.push_back(Point2{to_double(fields[i]), to_double(fields[i + 1])});
  }
  try {
    polygon.validate();
  } catch (const ValidationError& e) {
    throw ParseError("", 0, e.what());
  }
  return polygon;
}

std::pair<NormBox, double> parse_detection_line(std::string_view line,
                                                std::size_t num_classes) {
  const auto fields = split_fields(line);
  if (fields.size() != 6) {
    throw ParseError("", 0,
                     "expected 6 fields (class cx cy w h conf), got " +
                         std::to_string(fields.size()));
  }
  const double confidence = to_double(fields[5]);
  if (confidence < 0.0 || confidence > 1.0) {
    throw ParseError("", 0, "confidence outside [0,1]");
  }
  return {box_from_fields(fields, num_classes), confidence};
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  const std::filesystem::path tmp =
      path.string() + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_box_file(const std::filesystem::path& path,
                    std::span<const NormBox> boxes) {
  std::string contents;
  for (const NormBox& box : boxes) {
    contents += format_box_line(box);
    contents += '\n';
  }
  write_text_file(path, contents);
}

void write_polygon_file(const std::filesystem::path& path,
                        std::span<const PolygonLabel> polygons) {
  std::string contents;
  for (const PolygonLabel& polygon : polygons) {
    contents += format_polygon_line(polygon);
    contents += '\n';
  }
  write_text_file(path, contents);
}

std::vector<NormBox> read_box_file(const std::filesystem::path& path,
                                   std::size_t num_classes) {
  return read_lines<NormBox>(
      path, [&](std::string_view line) { return parse_box_line(line, num_classes); });
}

std::vector<PolygonLabel> read_polygon_file(const std::filesystem::path& path,
                                            std::size_t num_classes) {
  return read_lines<PolygonLabel>(path, [&](std::string_view line) {
    return parse_polygon_line(line, num_classes);
  });
}

}  // namespace seedprop
