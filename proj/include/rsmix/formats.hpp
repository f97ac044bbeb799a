#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rsmix/geometry.hpp"
#include "rsmix/label.hpp"
#include "rsmix/rsmix.hpp"

namespace rsmix {

enum class CloudFormat { XyzText, PlyAscii, PlyBinaryLE, Batch };

// "xyz", "ply-ascii", "ply-binary-le", "batch".
CloudFormat parse_cloud_format(std::string_view name);
std::string_view to_string(CloudFormat format);

// RSMX1 batch file. All values little-endian:
//   "RSMX1"                     5 bytes
//   count, points, classes      u32 each
//   count records of
//     points * (x, y, z)        f32
//     classes label entries     f32
//     lambda                    f32
struct BatchRecord {
  PointCloud cloud;
  LabelVec label;
  double lambda = 0.0;
};

struct Batch {
  std::uint32_t points_per_cloud = 0;
  std::uint32_t num_classes = 0;
  std::vector<BatchRecord> records;
};

inline constexpr std::string_view kBatchMagic = "RSMX1";
inline constexpr std::size_t kBatchHeaderBytes = 17;

// Encodes one record; `out` must already hold a header for matching
// dimensions. Throws on size mismatch or lambda outside [0, 1].
void append_batch_record(std::string& out, const Batch& shape, const BatchRecord& record);
std::string encode_batch_header(std::uint32_t count, std::uint32_t points_per_cloud, std::uint32_t num_classes);
std::string encode_batch(const Batch& batch);
Batch decode_batch(std::string_view bytes);

std::string encode_xyz(const PointCloud& cloud);
PointCloud decode_xyz(std::string_view text);

enum class PlyEncoding { Ascii, BinaryLE };

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

// float x, y, z per vertex, plus uchar red/green/blue when colors are given.
std::string encode_ply(const PointCloud& cloud, PlyEncoding encoding, const std::vector<Rgb>* colors = nullptr);

// Vertex positions of an ascii or binary little-endian PLY. Other vertex
// properties (colors, normals) and other elements are skipped.
PointCloud decode_ply(std::string_view bytes, PlyEncoding* encoding_out = nullptr);

inline constexpr Rgb kAlphaColor{148, 0, 211};   // purple
inline constexpr Rgb kBetaColor{255, 215, 0};    // yellow

// Ascii PLY of the mixed cloud colored by provenance.
std::string encode_colored_ply(const MixResult& result);
void export_colored_ply(const MixResult& result, const std::filesystem::path& path);

struct CloudSet {
  std::vector<PointCloud> clouds;
  std::vector<LabelVec> labels;   // batch only
  std::vector<double> lambdas;    // batch only
};

CloudSet read_cloud(const std::filesystem::path& path, CloudFormat format);

// xyz and ply formats take exactly one cloud; batch takes clouds with labels
// and lambdas (a missing lambda list means all zero).
void write_cloud(const std::filesystem::path& path, CloudFormat format, const CloudSet& set);

Batch read_batch(const std::filesystem::path& path);
void write_batch(const std::filesystem::path& path, const Batch& batch);

struct LabelEntry {
  std::string filename;
  std::uint32_t class_index = 0;
};

// `filename,class_index` rows; a first row whose class column is not a
// number is treated as a header.
std::vector<LabelEntry> parse_label_csv(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

} // namespace rsmix
