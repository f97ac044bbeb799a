#include "rsmix/formats.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>

#include "rsmix/error.hpp"
#include "text_util.hpp"

namespace rsmix {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
  }
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return v;
}

std::uint16_t get_u16(const char* p) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(p[0]) |
                                    (static_cast<unsigned char>(p[1]) << 8));
}

std::uint64_t get_u64(const char* p) {
  return static_cast<std::uint64_t>(get_u32(p)) | (static_cast<std::uint64_t>(get_u32(p + 4)) << 32);
}

float get_f32(const char* p) { return std::bit_cast<float>(get_u32(p)); }

void append_number(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

void append_number(std::string& out, float v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), res.ptr);
}

// --- PLY ---------------------------------------------------------------

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<PlyType> ply_type(std::string_view name) {
  if (name == "char" || name == "int8") return PlyType::Int8;
  if (name == "uchar" || name == "uint8") return PlyType::UInt8;
  if (name == "short" || name == "int16") return PlyType::Int16;
  if (name == "ushort" || name == "uint16") return PlyType::UInt16;
  if (name == "int" || name == "int32") return PlyType::Int32;
  if (name == "uint" || name == "uint32") return PlyType::UInt32;
  if (name == "float" || name == "float32") return PlyType::Float32;
  if (name == "double" || name == "float64") return PlyType::Float64;
  return std::nullopt;
}

std::size_t ply_size(PlyType t) {
  switch (t) {
  case PlyType::Int8:
  case PlyType::UInt8:
    return 1;
  case PlyType::Int16:
  case PlyType::UInt16:
    return 2;
  case PlyType::Int32:
  case PlyType::UInt32:
  case PlyType::Float32:
    return 4;
  case PlyType::Float64:
    return 8;
  }
  return 0;
}

double ply_read_binary(PlyType t, const char* p) {
  switch (t) {
  case PlyType::Int8:
    return static_cast<double>(static_cast<std::int8_t>(p[0]));
  case PlyType::UInt8:
    return static_cast<double>(static_cast<unsigned char>(p[0]));
  case PlyType::Int16:
    return static_cast<double>(static_cast<std::int16_t>(get_u16(p)));
  case PlyType::UInt16:
    return static_cast<double>(get_u16(p));
  case PlyType::Int32:
    return static_cast<double>(static_cast<std::int32_t>(get_u32(p)));
  case PlyType::UInt32:
    return static_cast<double>(get_u32(p));
  case PlyType::Float32:
    return static_cast<double>(get_f32(p));
  case PlyType::Float64:
    return std::bit_cast<double>(get_u64(p));
  }
  return 0.0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::Float32;
  bool is_list = false;
  PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
  std::string name;
  std::uint64_t count = 0;
  std::vector<PlyProperty> properties;
};

struct PlyHeader {
  PlyEncoding encoding = PlyEncoding::Ascii;
  std::vector<PlyElement> elements;
  std::size_t body_offset = 0;
};

[[noreturn]] void ply_error(const std::string& message) { throw Error(ErrorCode::Parse, "PLY: " + message); }

PlyHeader parse_ply_header(std::string_view bytes) {
  PlyHeader header;
  std::size_t pos = 0;
  std::size_t line_number = 0;
  bool saw_format = false;
  for (;;) {
    const std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) {
      ply_error("unterminated header");
    }
    ++line_number;
    const std::string_view line = bytes.substr(pos, end - pos);
    pos = end + 1;
    const auto tokens = detail::split_tokens(line);
    if (line_number == 1) {
      if (tokens.size() != 1 || tokens[0] != "ply") {
        ply_error("missing 'ply' magic");
      }
      continue;
    }
    if (tokens.empty() || tokens[0] == "comment" || tokens[0] == "obj_info") {
      continue;
    }
    if (tokens[0] == "end_header") {
      break;
    }
    if (tokens[0] == "format") {
      if (tokens.size() < 2) {
        detail::parse_error("PLY", line_number, "incomplete format line");
      }
      if (tokens[1] == "ascii") {
        header.encoding = PlyEncoding::Ascii;
      } else if (tokens[1] == "binary_little_endian") {
        header.encoding = PlyEncoding::BinaryLE;
      } else {
        detail::parse_error("PLY", line_number, "unsupported format '" + std::string(tokens[1]) + "'");
      }
      saw_format = true;
    } else if (tokens[0] == "element") {
      if (tokens.size() != 3) {
        detail::parse_error("PLY", line_number, "malformed element line");
      }
      const auto count = detail::to_uint(tokens[2]);
      if (!count) {
        detail::parse_error("PLY", line_number, "invalid element count");
      }
      header.elements.push_back({std::string(tokens[1]), *count, {}});
    } else if (tokens[0] == "property") {
      if (header.elements.empty()) {
        detail::parse_error("PLY", line_number, "property before any element");
      }
      PlyProperty prop;
      if (tokens.size() == 5 && tokens[1] == "list") {
        const auto count_type = ply_type(tokens[2]);
        const auto item_type = ply_type(tokens[3]);
        if (!count_type || !item_type) {
          detail::parse_error("PLY", line_number, "unknown list property type");
        }
        prop = {std::string(tokens[4]), *item_type, true, *count_type};
      } else if (tokens.size() == 3) {
        const auto type = ply_type(tokens[1]);
        if (!type) {
          detail::parse_error("PLY", line_number, "unknown property type '" + std::string(tokens[1]) + "'");
        }
        prop = {std::string(tokens[2]), *type, false, PlyType::UInt8};
      } else {
        detail::parse_error("PLY", line_number, "malformed property line");
      }
      header.elements.back().properties.push_back(std::move(prop));
    } else {
      detail::parse_error("PLY", line_number, "unexpected header keyword '" + std::string(tokens[0]) + "'");
    }
  }
  if (!saw_format) {
    ply_error("missing format line");
  }
  header.body_offset = pos;
  return header;
}

struct VertexLayout {
  std::size_t element = 0;
  std::array<std::size_t, 3> xyz{};
};

VertexLayout find_vertex_layout(const PlyHeader& header) {
  for (std::size_t e = 0; e < header.elements.size(); ++e) {
    const PlyElement& el = header.elements[e];
    if (el.name != "vertex") {
      continue;
    }
    VertexLayout layout{e, {}};
    const char* names[3] = {"x", "y", "z"};
    for (int a = 0; a < 3; ++a) {
      bool found = false;
      for (std::size_t p = 0; p < el.properties.size(); ++p) {
        if (el.properties[p].name == names[a] && !el.properties[p].is_list) {
          layout.xyz[a] = p;
          found = true;
          break;
        }
      }
      if (!found) {
        ply_error(std::string("vertex element lacks scalar property '") + names[a] + "'");
      }
    }
    return layout;
  }
  ply_error("no vertex element");
}

PointCloud decode_ply_binary(std::string_view bytes, const PlyHeader& header, const VertexLayout& layout) {
  std::size_t pos = header.body_offset;
  auto need = [&](std::size_t n) {
    if (bytes.size() - pos < n) {
      ply_error("truncated binary body");
    }
  };
  PointCloud cloud;
  for (std::size_t e = 0; e <= layout.element; ++e) {
    const PlyElement& el = header.elements[e];
    std::size_t min_record = 0;
    for (const PlyProperty& prop : el.properties) {
      min_record += prop.is_list ? ply_size(prop.count_type) : ply_size(prop.type);
    }
    if (min_record > 0 && el.count > (bytes.size() - pos) / min_record) {
      ply_error("element '" + el.name + "' count exceeds file size");
    }
    const bool is_vertex = e == layout.element;
    if (is_vertex) {
      cloud.points.reserve(el.count);
    }
    for (std::uint64_t r = 0; r < el.count; ++r) {
      std::array<double, 3> xyz{};
      for (std::size_t p = 0; p < el.properties.size(); ++p) {
        const PlyProperty& prop = el.properties[p];
        if (prop.is_list) {
          need(ply_size(prop.count_type));
          const double count = ply_read_binary(prop.count_type, bytes.data() + pos);
          pos += ply_size(prop.count_type);
          if (!(count >= 0.0)) {
            ply_error("negative list length");
          }
          const auto items = static_cast<std::uint64_t>(count);
          if (items > (bytes.size() - pos) / ply_size(prop.type)) {
            ply_error("truncated binary body");
          }
          pos += items * ply_size(prop.type);
          continue;
        }
        need(ply_size(prop.type));
        if (is_vertex) {
          for (int a = 0; a < 3; ++a) {
            if (layout.xyz[a] == p) {
              xyz[a] = ply_read_binary(prop.type, bytes.data() + pos);
            }
          }
        }
        pos += ply_size(prop.type);
      }
      if (is_vertex) {
        const Point3 point{xyz[0], xyz[1], xyz[2]};
        if (!point.finite()) {
          ply_error("non-finite vertex coordinate");
        }
        cloud.points.push_back(point);
      }
    }
  }
  return cloud;
}

PointCloud decode_ply_ascii(std::string_view bytes, const PlyHeader& header, const VertexLayout& layout) {
  const std::string_view body = bytes.substr(header.body_offset);
  std::vector<detail::Line> lines = detail::tokenize_lines(body, std::nullopt);
  // Line numbers relative to the whole file.
  const std::size_t header_lines =
      static_cast<std::size_t>(std::count(bytes.begin(), bytes.begin() + header.body_offset, '\n'));

  std::size_t cursor = 0;
  PointCloud cloud;
  for (std::size_t e = 0; e <= layout.element; ++e) {
    const PlyElement& el = header.elements[e];
    if (el.count > lines.size() - cursor) {
      ply_error("element '" + el.name + "' declares more records than the file holds");
    }
    const bool is_vertex = e == layout.element;
    if (is_vertex) {
      cloud.points.reserve(el.count);
    }
    for (std::uint64_t r = 0; r < el.count; ++r) {
      const detail::Line& line = lines[cursor++];
      const std::size_t number = header_lines + line.number;
      if (!is_vertex) {
        continue;
      }
      std::array<double, 3> xyz{};
      std::size_t t = 0;
      for (std::size_t p = 0; p < el.properties.size(); ++p) {
        const PlyProperty& prop = el.properties[p];
        if (t >= line.tokens.size()) {
          detail::parse_error("PLY", number, "too few values in vertex record");
        }
        if (prop.is_list) {
          const auto items = detail::to_uint(line.tokens[t]);
          if (!items || *items > line.tokens.size() - t - 1) {
            detail::parse_error("PLY", number, "invalid list length");
          }
          t += 1 + *items;
          continue;
        }
        const auto value = detail::to_double(line.tokens[t]);
        if (!value) {
          detail::parse_error("PLY", number, "invalid number '" + std::string(line.tokens[t]) + "'");
        }
        for (int a = 0; a < 3; ++a) {
          if (layout.xyz[a] == p) {
            xyz[a] = *value;
          }
        }
        ++t;
      }
      const Point3 point{xyz[0], xyz[1], xyz[2]};
      if (!point.finite()) {
        detail::parse_error("PLY", number, "non-finite vertex coordinate");
      }
      cloud.points.push_back(point);
    }
  }
  return cloud;
}

std::string ply_header(std::size_t vertices, PlyEncoding encoding, bool with_colors) {
  std::string h = "ply\nformat ";
  h += encoding == PlyEncoding::Ascii ? "ascii" : "binary_little_endian";
  h += " 1.0\nelement vertex " + std::to_string(vertices) + "\n";
  h += "property float x\nproperty float y\nproperty float z\n";
  if (with_colors) {
    h += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  h += "end_header\n";
  return h;
}

} // namespace

// --- formats -------------------------------------------------------------

CloudFormat parse_cloud_format(std::string_view name) {
  if (name == "xyz" || name == "xyz-text") return CloudFormat::XyzText;
  if (name == "ply-ascii") return CloudFormat::PlyAscii;
  if (name == "ply-binary-le") return CloudFormat::PlyBinaryLE;
  if (name == "batch") return CloudFormat::Batch;
  throw Error(ErrorCode::InvalidArgument, "unknown cloud format '" + std::string(name) + "'");
}

std::string_view to_string(CloudFormat format) {
  switch (format) {
  case CloudFormat::XyzText:
    return "xyz";
  case CloudFormat::PlyAscii:
    return "ply-ascii";
  case CloudFormat::PlyBinaryLE:
    return "ply-binary-le";
  case CloudFormat::Batch:
    return "batch";
  }
  return "unknown";
}

std::string encode_batch_header(std::uint32_t count, std::uint32_t points_per_cloud, std::uint32_t num_classes) {
  std::string out(kBatchMagic);
  put_u32(out, count);
  put_u32(out, points_per_cloud);
  put_u32(out, num_classes);
  return out;
}

void append_batch_record(std::string& out, const Batch& shape, const BatchRecord& record) {
  if (record.cloud.size() != shape.points_per_cloud) {
    throw Error(ErrorCode::InvalidArgument, "batch record has " + std::to_string(record.cloud.size()) +
                                                " points, batch expects " +
                                                std::to_string(shape.points_per_cloud));
  }
  if (record.label.num_classes() != shape.num_classes) {
    throw Error(ErrorCode::InvalidArgument, "batch record label has " +
                                                std::to_string(record.label.num_classes()) +
                                                " classes, batch expects " + std::to_string(shape.num_classes));
  }
  if (!(record.lambda >= 0.0 && record.lambda <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "batch record lambda outside [0, 1]");
  }
  for (const Point3& p : record.cloud.points) {
    put_f32(out, static_cast<float>(p.x));
    put_f32(out, static_cast<float>(p.y));
    put_f32(out, static_cast<float>(p.z));
  }
  for (double v : record.label.probabilities()) {
    put_f32(out, static_cast<float>(v));
  }
  put_f32(out, static_cast<float>(record.lambda));
}

std::string encode_batch(const Batch& batch) {
  if (batch.records.size() > UINT32_MAX) {
    throw Error(ErrorCode::InvalidArgument, "too many batch records");
  }
  std::string out = encode_batch_header(static_cast<std::uint32_t>(batch.records.size()), batch.points_per_cloud,
                                        batch.num_classes);
  out.reserve(kBatchHeaderBytes + batch.records.size() *
                                      (3ULL * batch.points_per_cloud + batch.num_classes + 1) * 4);
  for (const BatchRecord& record : batch.records) {
    append_batch_record(out, batch, record);
  }
  return out;
}

Batch decode_batch(std::string_view bytes) {
  if (bytes.size() < kBatchHeaderBytes) {
    throw Error(ErrorCode::Parse, "RSMX1: truncated header (" + std::to_string(bytes.size()) + " bytes)");
  }
  if (bytes.substr(0, kBatchMagic.size()) != kBatchMagic) {
    throw Error(ErrorCode::Parse, "RSMX1: bad magic");
  }
  const std::uint32_t count = get_u32(bytes.data() + 5);
  Batch batch;
  batch.points_per_cloud = get_u32(bytes.data() + 9);
  batch.num_classes = get_u32(bytes.data() + 13);

  const unsigned __int128 record_floats =
      static_cast<unsigned __int128>(batch.points_per_cloud) * 3 + batch.num_classes + 1;
  const unsigned __int128 expected = kBatchHeaderBytes + static_cast<unsigned __int128>(count) * record_floats * 4;
  if (expected != bytes.size()) {
    throw Error(ErrorCode::Parse, "RSMX1: inconsistent counts: header implies " +
                                      std::to_string(static_cast<unsigned long long>(
                                          expected > UINT64_MAX ? UINT64_MAX : static_cast<std::uint64_t>(expected))) +
                                      " bytes, file has " + std::to_string(bytes.size()));
  }
  if (count > 0 && (batch.points_per_cloud == 0 || batch.num_classes == 0)) {
    throw Error(ErrorCode::Parse, "RSMX1: records need at least one point and one class");
  }

  batch.records.reserve(count);
  const char* p = bytes.data() + kBatchHeaderBytes;
  for (std::uint32_t r = 0; r < count; ++r) {
    BatchRecord record;
    record.cloud.points.resize(batch.points_per_cloud);
    for (Point3& pt : record.cloud.points) {
      pt = {get_f32(p), get_f32(p + 4), get_f32(p + 8)};
      p += 12;
      if (!pt.finite()) {
        throw Error(ErrorCode::Parse, "RSMX1: record " + std::to_string(r) + ": non-finite coordinate");
      }
    }
    std::vector<double> label(batch.num_classes);
    for (double& v : label) {
      v = get_f32(p);
      p += 4;
    }
    try {
      record.label = LabelVec::from_stored(std::move(label));
    } catch (const Error& e) {
      throw Error(ErrorCode::Parse, "RSMX1: record " + std::to_string(r) + ": " + e.what());
    }
    record.lambda = get_f32(p);
    p += 4;
    if (!(record.lambda >= 0.0 && record.lambda <= 1.0)) {
      throw Error(ErrorCode::Parse, "RSMX1: record " + std::to_string(r) + ": lambda outside [0, 1]");
    }
    batch.records.push_back(std::move(record));
  }
  return batch;
}

std::string encode_xyz(const PointCloud& cloud) {
  std::string out;
  for (const Point3& p : cloud.points) {
    append_number(out, p.x);
    out.push_back(' ');
    append_number(out, p.y);
    out.push_back(' ');
    append_number(out, p.z);
    out.push_back('\n');
  }
  return out;
}

PointCloud decode_xyz(std::string_view text) {
  PointCloud cloud;
  for (const detail::Line& line : detail::tokenize_lines(text, '#')) {
    if (line.tokens.size() < 3) {
      detail::parse_error("xyz", line.number, "expected 3 coordinates");
    }
    std::array<double, 3> xyz{};
    for (int a = 0; a < 3; ++a) {
      const auto v = detail::to_double(line.tokens[a]);
      if (!v || !std::isfinite(*v)) {
        detail::parse_error("xyz", line.number, "invalid coordinate '" + std::string(line.tokens[a]) + "'");
      }
      xyz[a] = *v;
    }
    cloud.points.push_back({xyz[0], xyz[1], xyz[2]});
  }
  if (cloud.empty()) {
    throw Error(ErrorCode::EmptyInput, "empty input");
  }
  return cloud;
}

std::string encode_ply(const PointCloud& cloud, PlyEncoding encoding, const std::vector<Rgb>* colors) {
  if (colors != nullptr && colors->size() != cloud.size()) {
    throw Error(ErrorCode::InvalidArgument, "color count does not match vertex count");
  }
  std::string out = ply_header(cloud.size(), encoding, colors != nullptr);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud[i];
    const std::array<float, 3> xyz{static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z)};
    if (encoding == PlyEncoding::BinaryLE) {
      for (float v : xyz) {
        put_f32(out, v);
      }
      if (colors != nullptr) {
        const Rgb& c = (*colors)[i];
        out.push_back(static_cast<char>(c.r));
        out.push_back(static_cast<char>(c.g));
        out.push_back(static_cast<char>(c.b));
      }
    } else {
      append_number(out, xyz[0]);
      out.push_back(' ');
      append_number(out, xyz[1]);
      out.push_back(' ');
      append_number(out, xyz[2]);
      if (colors != nullptr) {
        const Rgb& c = (*colors)[i];
        out += ' ' + std::to_string(c.r) + ' ' + std::to_string(c.g) + ' ' + std::to_string(c.b);
      }
      out.push_back('\n');
    }
  }
  return out;
}

PointCloud decode_ply(std::string_view bytes, PlyEncoding* encoding_out) {
  const PlyHeader header = parse_ply_header(bytes);
  const VertexLayout layout = find_vertex_layout(header);
  if (encoding_out != nullptr) {
    *encoding_out = header.encoding;
  }
  PointCloud cloud = header.encoding == PlyEncoding::BinaryLE ? decode_ply_binary(bytes, header, layout)
                                                               : decode_ply_ascii(bytes, header, layout);
  if (cloud.empty()) {
    throw Error(ErrorCode::EmptyInput, "empty input");
  }
  return cloud;
}

std::string encode_colored_ply(const MixResult& result) {
  if (result.provenance.size() != result.mixed.size()) {
    throw Error(ErrorCode::InvalidArgument, "provenance does not cover the mixed cloud");
  }
  std::vector<Rgb> colors;
  colors.reserve(result.provenance.size());
  for (Provenance tag : result.provenance) {
    colors.push_back(tag == Provenance::FromAlpha ? kAlphaColor : kBetaColor);
  }
  return encode_ply(result.mixed, PlyEncoding::Ascii, &colors);
}

void export_colored_ply(const MixResult& result, const std::filesystem::path& path) {
  write_file(path, encode_colored_ply(result));
}

CloudSet read_cloud(const std::filesystem::path& path, CloudFormat format) {
  const std::string bytes = read_file(path);
  CloudSet set;
  switch (format) {
  case CloudFormat::XyzText:
    set.clouds.push_back(decode_xyz(bytes));
    break;
  case CloudFormat::PlyAscii:
  case CloudFormat::PlyBinaryLE: {
    PlyEncoding encoding{};
    set.clouds.push_back(decode_ply(bytes, &encoding));
    const PlyEncoding declared = format == CloudFormat::PlyAscii ? PlyEncoding::Ascii : PlyEncoding::BinaryLE;
    if (encoding != declared) {
      throw Error(ErrorCode::Parse, path.string() + ": PLY encoding does not match declared format " +
                                        std::string(to_string(format)));
    }
    break;
  }
  case CloudFormat::Batch: {
    Batch batch = decode_batch(bytes);
    for (BatchRecord& record : batch.records) {
      set.clouds.push_back(std::move(record.cloud));
      set.labels.push_back(std::move(record.label));
      set.lambdas.push_back(record.lambda);
    }
    break;
  }
  }
  return set;
}

void write_cloud(const std::filesystem::path& path, CloudFormat format, const CloudSet& set) {
  if (format != CloudFormat::Batch) {
    if (set.clouds.size() != 1) {
      throw Error(ErrorCode::InvalidArgument, std::string(to_string(format)) + " holds exactly one cloud");
    }
    const PointCloud& cloud = set.clouds.front();
    switch (format) {
    case CloudFormat::XyzText:
      write_file(path, encode_xyz(cloud));
      return;
    case CloudFormat::PlyAscii:
      write_file(path, encode_ply(cloud, PlyEncoding::Ascii));
      return;
    default:
      write_file(path, encode_ply(cloud, PlyEncoding::BinaryLE));
      return;
    }
  }
  if (set.labels.size() != set.clouds.size() || (!set.lambdas.empty() && set.lambdas.size() != set.clouds.size())) {
    throw Error(ErrorCode::InvalidArgument, "batch needs one label (and lambda) per cloud");
  }
  Batch batch;
  if (!set.clouds.empty()) {
    batch.points_per_cloud = static_cast<std::uint32_t>(set.clouds.front().size());
    batch.num_classes = static_cast<std::uint32_t>(set.labels.front().num_classes());
  }
  for (std::size_t i = 0; i < set.clouds.size(); ++i) {
    batch.records.push_back({set.clouds[i], set.labels[i], set.lambdas.empty() ? 0.0 : set.lambdas[i]});
  }
  write_batch(path, batch);
}

Batch read_batch(const std::filesystem::path& path) {
  try {
    return decode_batch(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) {
      throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }
    throw;
  }
}

void write_batch(const std::filesystem::path& path, const Batch& batch) { write_file(path, encode_batch(batch)); }

std::vector<LabelEntry> parse_label_csv(std::string_view text) {
  std::vector<LabelEntry> entries;
  std::size_t pos = 0;
  std::size_t number = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    ++number;
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    const auto tokens = detail::split_tokens(line);
    if (tokens.empty()) {
      continue;
    }
    const std::size_t comma = line.rfind(',');
    if (comma == std::string_view::npos) {
      detail::parse_error("labels csv", number, "expected 'filename,class_index'");
    }
    auto trim = [](std::string_view s) {
      while (!s.empty() && detail::is_space(s.front())) s.remove_prefix(1);
      while (!s.empty() && detail::is_space(s.back())) s.remove_suffix(1);
      return s;
    };
    const std::string_view name = trim(line.substr(0, comma));
    const std::string_view cls = trim(line.substr(comma + 1));
    const auto index = detail::to_uint(cls);
    if (!index || *index > UINT32_MAX) {
      if (entries.empty() && number == 1) {
        continue; // header row
      }
      detail::parse_error("labels csv", number, "invalid class index '" + std::string(cls) + "'");
    }
    if (name.empty()) {
      detail::parse_error("labels csv", number, "empty filename");
    }
    entries.push_back({std::string(name), static_cast<std::uint32_t>(*index)});
  }
  if (entries.empty()) {
    throw Error(ErrorCode::EmptyInput, "empty input");
  }
  return entries;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorCode::Io, "failed reading '" + path.string() + "'");
  }
  return bytes;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) {
    throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
  }
}

} // namespace rsmix
