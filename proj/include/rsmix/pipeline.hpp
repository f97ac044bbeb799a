#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsmix/convda.hpp"
#include "rsmix/formats.hpp"
#include "rsmix/rsmix.hpp"

namespace rsmix {

enum class Stage { ConvDA, RSMix };
enum class ConvOp { Jitter, Scale, RotateY, Shift, Drop };
enum class Pairing { RandomShuffle, Sequential };

// batch: an RSMX1 file. csv: `filename,class_index` rows naming .xyz, .ply
// or .off files relative to the csv; meshes are surface-sampled and
// normalized.
enum class InputFormat { Batch, Csv };

struct PipelineConfig {
  std::filesystem::path input;
  InputFormat input_format = InputFormat::Batch;
  std::filesystem::path output_dir;

  MixParams mix{.size_policy = SizePolicy::FixedN}; // batches need a fixed point count
  ConvDAConfig convda;
  std::vector<ConvOp> convda_ops{ConvOp::Jitter, ConvOp::Scale, ConvOp::RotateY, ConvOp::Shift};
  std::vector<Stage> stages{Stage::ConvDA, Stage::RSMix};

  std::uint64_t seed = 0;
  std::uint32_t passes = 1;
  Pairing pairing = Pairing::RandomShuffle;
  std::size_t workers = 1;
  std::size_t export_ply = 0;

  std::size_t mesh_points = 1024; // csv input, .off entries
  std::uint32_t num_classes = 0;  // csv input; 0 = max class index + 1

  // Throws Error(Config) naming the offending key.
  void validate() const;
};

Stage parse_stage(std::string_view name);
ConvOp parse_conv_op(std::string_view name);
std::string_view to_string(Stage stage);
std::string_view to_string(ConvOp op);
std::string_view to_string(NeighborMode mode);
std::string_view to_string(SizePolicy policy);
std::string_view to_string(Pairing pairing);

struct Dataset {
  std::vector<PointCloud> clouds;
  std::vector<LabelVec> labels;
  std::uint32_t points_per_cloud = 0;
  std::uint32_t num_classes = 0;
};

Dataset load_dataset(const PipelineConfig& config);

// Per-sample streams. Stage slot s of sample i in pass p draws from
//   derive_seed(seed, {p, i, s});
// the random-shuffle pairing of pass p from derive_seed(seed, {p, kPairingStream});
// mesh sampling of csv row r from derive_seed(seed, {kMeshStream, r}).
inline constexpr std::uint64_t kPairingStream = 0xFFFF'FFFF'FFFF'FF01ULL;
inline constexpr std::uint64_t kMeshStream = 0xFFFF'FFFF'FFFF'FF02ULL;

RandomStream sample_stream(std::uint64_t seed, std::uint32_t pass, std::size_t index, std::size_t stage_slot);

// partners[i] is the RSMix partner of sample i. Random-shuffle: a
// Fisher-Yates permutation (partner may be the sample itself). Sequential:
// (i + 1) mod n.
std::vector<std::uint32_t> pair_partners(Pairing pairing, std::uint64_t seed, std::uint32_t pass, std::size_t n);

// Applies ops in order from one stream; drop remaps `provenance` alongside
// the points when given.
PointCloud apply_convda(const PointCloud& cloud, std::span<const ConvOp> ops, const ConvDAConfig& config,
                        RandomStream& rng, std::vector<Provenance>* provenance = nullptr);

struct AugmentedSample {
  BatchRecord record;
  std::vector<Provenance> provenance;
  bool rsmix_ran = false;
  MixStatus status = MixStatus::Skipped;
};

// Output record of one sample; a pure function of its arguments.
AugmentedSample augment_sample(const Dataset& data, const PipelineConfig& config, std::uint32_t pass,
                               std::size_t index, std::span<const std::uint32_t> partners);

inline constexpr std::size_t kLambdaBins = 10;

struct PipelineSummary {
  std::vector<std::filesystem::path> batch_files;
  std::vector<std::uint64_t> digests; // fnv1a64 per batch file
  std::filesystem::path manifest;
  std::array<std::uint64_t, kLambdaBins> lambda_histogram{};
  double lambda_mean = 0.0;
  std::uint64_t mixed = 0;
  std::uint64_t skipped = 0;
  std::uint64_t degenerate = 0;
};

// Runs every pass, writing pass_NNNN.rsmx, manifest.txt and optional
// colored PLY exports under config.output_dir.
PipelineSummary augment_batch(const PipelineConfig& config);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

std::size_t lambda_bin(double lambda);

struct BatchStats {
  std::size_t count = 0;
  std::uint32_t points_per_cloud = 0;
  std::uint32_t num_classes = 0;
  double lambda_mean = 0.0;
  double lambda_max = 0.0;
  std::array<std::uint64_t, kLambdaBins> lambda_histogram{};
  std::vector<double> class_mass; // mean label vector
};

BatchStats compute_stats(const Batch& batch);
std::string format_stats(const BatchStats& stats);

} // namespace rsmix
