#include "rsmix/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include "rsmix/error.hpp"
#include "rsmix/mesh.hpp"

namespace rsmix {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a64_update(std::uint64_t h, std::string_view bytes) noexcept {
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

[[noreturn]] void config_error(std::string_view key, const std::string& message) {
  throw Error(ErrorCode::Config, std::string(key) + ": " + message);
}

std::string lower_ext(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::optional<std::size_t> rsmix_slot(const std::vector<Stage>& stages) {
  for (std::size_t s = 0; s < stages.size(); ++s) {
    if (stages[s] == Stage::RSMix) {
      return s;
    }
  }
  return std::nullopt;
}

// Stages [begin, end) for sample `index`; never contains RSMix.
void run_convda_stages(const PipelineConfig& config, std::uint32_t pass, std::size_t index, std::size_t begin,
                       std::size_t end, PointCloud& cloud, std::vector<Provenance>* provenance) {
  for (std::size_t s = begin; s < end; ++s) {
    RandomStream rng = sample_stream(config.seed, pass, index, s);
    cloud = apply_convda(cloud, config.convda_ops, config.convda, rng, provenance);
  }
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& name) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) {
      out += ',';
    }
    out += name(items[i]);
  }
  return out;
}

} // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept { return fnv1a64_update(kFnvOffset, bytes); }

std::size_t lambda_bin(double lambda) {
  const auto bin = static_cast<std::size_t>(std::floor(lambda * static_cast<double>(kLambdaBins)));
  return std::min(bin, kLambdaBins - 1);
}

Stage parse_stage(std::string_view name) {
  if (name == "convda") return Stage::ConvDA;
  if (name == "rsmix") return Stage::RSMix;
  config_error("stages", "unknown stage '" + std::string(name) + "'");
}

ConvOp parse_conv_op(std::string_view name) {
  if (name == "jitter") return ConvOp::Jitter;
  if (name == "scale") return ConvOp::Scale;
  if (name == "rotate-y") return ConvOp::RotateY;
  if (name == "shift") return ConvOp::Shift;
  if (name == "drop") return ConvOp::Drop;
  config_error("convda", "unknown augmentation '" + std::string(name) + "'");
}

std::string_view to_string(Stage stage) { return stage == Stage::ConvDA ? "convda" : "rsmix"; }

std::string_view to_string(ConvOp op) {
  switch (op) {
  case ConvOp::Jitter:
    return "jitter";
  case ConvOp::Scale:
    return "scale";
  case ConvOp::RotateY:
    return "rotate-y";
  case ConvOp::Shift:
    return "shift";
  case ConvOp::Drop:
    return "drop";
  }
  return "unknown";
}

std::string_view to_string(NeighborMode mode) { return mode == NeighborMode::Ball ? "ball" : "knn"; }
std::string_view to_string(SizePolicy policy) { return policy == SizePolicy::Paper ? "paper" : "fixed-n"; }
std::string_view to_string(Pairing pairing) {
  return pairing == Pairing::RandomShuffle ? "random-shuffle" : "sequential";
}

void PipelineConfig::validate() const {
  if (input.empty()) {
    config_error("input", "missing input path");
  }
  if (output_dir.empty()) {
    config_error("out", "missing output directory");
  }
  if (passes == 0) {
    config_error("passes", "must be at least 1");
  }
  if (workers == 0) {
    config_error("workers", "must be at least 1");
  }
  if (mesh_points == 0) {
    config_error("mesh-points", "must be at least 1");
  }
  std::size_t convda_stages = 0;
  std::size_t rsmix_stages = 0;
  for (Stage s : stages) {
    (s == Stage::ConvDA ? convda_stages : rsmix_stages) += 1;
  }
  if (convda_stages > 1 || rsmix_stages > 1) {
    config_error("stages", "each stage may appear at most once");
  }
  for (std::size_t i = 0; i < convda_ops.size(); ++i) {
    for (std::size_t j = i + 1; j < convda_ops.size(); ++j) {
      if (convda_ops[i] == convda_ops[j]) {
        config_error("convda", "augmentation '" + std::string(to_string(convda_ops[i])) + "' listed twice");
      }
    }
  }
  try {
    mix.validate();
  } catch (const Error& e) {
    const std::string what = e.what();
    const std::string_view key = what.starts_with("theta")           ? "theta"
                                 : what.starts_with("nmax_fraction") ? "nmax-frac"
                                                                     : "apply-prob";
    config_error(key, what);
  }
  try {
    convda.validate();
  } catch (const Error& e) {
    config_error("convda", e.what());
  }
  if (rsmix_stages > 0 && mix.neighbor_mode == NeighborMode::Ball && mix.size_policy == SizePolicy::Paper) {
    config_error("size-policy", "'paper' with ball neighboring yields variable cloud sizes; RSMX1 batches "
                                "need a fixed point count (use fixed-n or knn)");
  }
}

RandomStream sample_stream(std::uint64_t seed, std::uint32_t pass, std::size_t index, std::size_t stage_slot) {
  return RandomStream(derive_seed(seed, {pass, static_cast<std::uint64_t>(index), stage_slot}));
}

std::vector<std::uint32_t> pair_partners(Pairing pairing, std::uint64_t seed, std::uint32_t pass, std::size_t n) {
  std::vector<std::uint32_t> partners(n);
  if (pairing == Pairing::Sequential) {
    for (std::size_t i = 0; i < n; ++i) {
      partners[i] = static_cast<std::uint32_t>((i + 1) % n);
    }
    return partners;
  }
  std::iota(partners.begin(), partners.end(), 0U);
  RandomStream rng(derive_seed(seed, {pass, kPairingStream}));
  for (std::size_t i = n; i > 1; --i) {
    std::swap(partners[i - 1], partners[rng.index_below(i)]);
  }
  return partners;
}

PointCloud apply_convda(const PointCloud& cloud, std::span<const ConvOp> ops, const ConvDAConfig& config,
                        RandomStream& rng, std::vector<Provenance>* provenance) {
  PointCloud out = cloud;
  for (ConvOp op : ops) {
    switch (op) {
    case ConvOp::Jitter:
      out = jitter(out, config.jitter_sigma, config.jitter_clip, rng);
      break;
    case ConvOp::Scale:
      out = random_scale(out, config.scale_lo, config.scale_hi, rng).cloud;
      break;
    case ConvOp::RotateY:
      if (config.rotate_y) {
        out = random_rotate_y(out, rng);
      }
      break;
    case ConvOp::Shift:
      out = random_shift(out, config.shift_range, rng);
      break;
    case ConvOp::Drop: {
      const double ratio = rng.uniform(0.0, config.drop_max_ratio);
      const std::vector<std::uint32_t> mapping = drop_mapping(out.size(), ratio, rng);
      PointCloud dropped;
      dropped.points.reserve(mapping.size());
      for (std::uint32_t i : mapping) {
        dropped.points.push_back(out[i]);
      }
      if (provenance != nullptr) {
        std::vector<Provenance> remapped;
        remapped.reserve(mapping.size());
        for (std::uint32_t i : mapping) {
          remapped.push_back((*provenance)[i]);
        }
        *provenance = std::move(remapped);
      }
      out = std::move(dropped);
      break;
    }
    }
  }
  return out;
}

Dataset load_dataset(const PipelineConfig& config) {
  Dataset data;
  if (config.input_format == InputFormat::Batch) {
    Batch batch = read_batch(config.input);
    if (batch.records.empty()) {
      throw Error(ErrorCode::EmptyInput, config.input.string() + ": empty input");
    }
    data.points_per_cloud = batch.points_per_cloud;
    data.num_classes = batch.num_classes;
    for (BatchRecord& r : batch.records) {
      data.clouds.push_back(std::move(r.cloud));
      data.labels.push_back(std::move(r.label));
    }
    return data;
  }

  const std::vector<LabelEntry> entries = parse_label_csv(read_file(config.input));
  std::uint32_t classes = config.num_classes;
  if (classes == 0) {
    for (const LabelEntry& e : entries) {
      classes = std::max(classes, e.class_index + 1);
    }
  }
  const std::filesystem::path base = config.input.parent_path();
  for (std::size_t row = 0; row < entries.size(); ++row) {
    const LabelEntry& e = entries[row];
    if (e.class_index >= classes) {
      throw Error(ErrorCode::Config, "classes: class index " + std::to_string(e.class_index) + " of '" +
                                         e.filename + "' exceeds class count " + std::to_string(classes));
    }
    const std::filesystem::path path = base / e.filename;
    const std::string ext = lower_ext(path);
    PointCloud cloud;
    if (ext == ".xyz" || ext == ".txt") {
      cloud = decode_xyz(read_file(path));
    } else if (ext == ".ply") {
      cloud = decode_ply(read_file(path));
    } else if (ext == ".off") {
      RandomStream rng(derive_seed(config.seed, {kMeshStream, row}));
      cloud = preprocess_mesh(parse_off(read_file(path)), config.mesh_points, rng);
    } else {
      throw Error(ErrorCode::Config, "input: unsupported file type '" + ext + "' for '" + e.filename + "'");
    }
    if (row == 0) {
      data.points_per_cloud = static_cast<std::uint32_t>(cloud.size());
    } else if (cloud.size() != data.points_per_cloud) {
      throw Error(ErrorCode::Config, "input: '" + e.filename + "' has " + std::to_string(cloud.size()) +
                                         " points, expected " + std::to_string(data.points_per_cloud));
    }
    data.clouds.push_back(std::move(cloud));
    data.labels.push_back(LabelVec::one_hot(classes, e.class_index));
  }
  data.num_classes = classes;
  return data;
}

AugmentedSample augment_sample(const Dataset& data, const PipelineConfig& config, std::uint32_t pass,
                               std::size_t index, std::span<const std::uint32_t> partners) {
  AugmentedSample out;
  PointCloud cloud = data.clouds[index];
  out.provenance.assign(cloud.size(), Provenance::FromAlpha);
  out.record.label = data.labels[index];
  out.record.lambda = 0.0;

  const std::size_t num_stages = config.stages.size();
  const std::optional<std::size_t> mix_slot = rsmix_slot(config.stages);

  if (!mix_slot) {
    if (num_stages > 0) {
      run_convda_stages(config, pass, index, 0, num_stages, cloud, &out.provenance);
    }
    out.record.cloud = std::move(cloud);
    return out;
  }

  run_convda_stages(config, pass, index, 0, *mix_slot, cloud, nullptr);
  const std::uint32_t partner = partners[index];
  PointCloud partner_cloud = data.clouds[partner];
  run_convda_stages(config, pass, partner, 0, *mix_slot, partner_cloud, nullptr);

  RandomStream rng = sample_stream(config.seed, pass, index, *mix_slot);
  MixResult mixed = mix_pair(cloud, data.labels[index], partner_cloud, data.labels[partner], config.mix, rng);
  out.rsmix_ran = true;
  out.status = mixed.status;
  out.record.lambda = mixed.lambda;
  out.record.label = std::move(mixed.label);
  out.provenance = std::move(mixed.provenance);
  cloud = std::move(mixed.mixed);

  run_convda_stages(config, pass, index, *mix_slot + 1, num_stages, cloud, &out.provenance);
  out.record.cloud = std::move(cloud);
  return out;
}

PipelineSummary augment_batch(const PipelineConfig& config) {
  config.validate();
  const Dataset data = load_dataset(config);
  const std::size_t n = data.clouds.size();
  if (n > UINT32_MAX) {
    throw Error(ErrorCode::Config, "input: too many samples");
  }

  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    throw Error(ErrorCode::Io, "cannot create output directory '" + config.output_dir.string() + "': " + ec.message());
  }
  if (config.export_ply > 0) {
    std::filesystem::create_directories(config.output_dir / "ply", ec);
    if (ec) {
      throw Error(ErrorCode::Io, "cannot create '" + (config.output_dir / "ply").string() + "'");
    }
  }

  Batch shape;
  shape.points_per_cloud = data.points_per_cloud;
  shape.num_classes = data.num_classes;

  PipelineSummary summary;
  double lambda_sum = 0.0;
  std::uint64_t lambda_count = 0;
  std::vector<std::uint64_t> convda_counts(5, 0);
  const bool has_convda = std::find(config.stages.begin(), config.stages.end(), Stage::ConvDA) != config.stages.end();

  const std::size_t chunk = std::max<std::size_t>(256, 32 * config.workers);
  for (std::uint32_t pass = 0; pass < config.passes; ++pass) {
    const std::vector<std::uint32_t> partners = pair_partners(config.pairing, config.seed, pass, n);

    char name[32];
    std::snprintf(name, sizeof name, "pass_%04u.rsmx", pass);
    const std::filesystem::path path = config.output_dir / name;
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
      throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    }
    std::string buffer = encode_batch_header(static_cast<std::uint32_t>(n), shape.points_per_cloud, shape.num_classes);
    std::uint64_t digest = kFnvOffset;

    std::vector<AugmentedSample> results;
    for (std::size_t begin = 0; begin < n; begin += chunk) {
      const std::size_t end = std::min(n, begin + chunk);
      results.assign(end - begin, {});

      std::atomic<std::size_t> next{begin};
      std::exception_ptr failure;
      std::mutex failure_mutex;
      auto work = [&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= end) {
            return;
          }
          try {
            results[i - begin] = augment_sample(data, config, pass, i, partners);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) {
              failure = std::current_exception();
            }
            next = end;
          }
        }
      };
      const std::size_t threads = std::min(config.workers, end - begin);
      if (threads <= 1) {
        work();
      } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
          pool.emplace_back(work);
        }
      }
      if (failure) {
        std::rethrow_exception(failure);
      }

      for (std::size_t k = 0; k < results.size(); ++k) {
        const AugmentedSample& sample = results[k];
        append_batch_record(buffer, shape, sample.record);
        lambda_sum += sample.record.lambda;
        ++lambda_count;
        ++summary.lambda_histogram[lambda_bin(sample.record.lambda)];
        if (sample.rsmix_ran) {
          switch (sample.status) {
          case MixStatus::Mixed:
            ++summary.mixed;
            break;
          case MixStatus::Skipped:
            ++summary.skipped;
            break;
          case MixStatus::DegenerateSkip:
            ++summary.degenerate;
            break;
          }
        }
        if (has_convda) {
          for (ConvOp op : config.convda_ops) {
            ++convda_counts[static_cast<std::size_t>(op)];
          }
        }
        const std::size_t index = begin + k;
        if (pass == 0 && index < config.export_ply) {
          MixResult view;
          view.mixed = sample.record.cloud;
          view.provenance = sample.provenance;
          char ply_name[48];
          std::snprintf(ply_name, sizeof ply_name, "pass%04u_sample%06zu.ply", pass, index);
          export_colored_ply(view, config.output_dir / "ply" / ply_name);
        }
      }
      digest = fnv1a64_update(digest, buffer);
      file.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
      buffer.clear();
    }
    file.flush();
    if (!file) {
      throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
    }
    summary.batch_files.push_back(path);
    summary.digests.push_back(digest);
  }
  summary.lambda_mean = lambda_count > 0 ? lambda_sum / static_cast<double>(lambda_count) : 0.0;

  std::ostringstream m;
  m << "format = rsmix-manifest-1\n";
  m << "seed = " << config.seed << "\n";
  m << "input = " << config.input.string() << "\n";
  m << "input_format = " << (config.input_format == InputFormat::Batch ? "batch" : "csv") << "\n";
  m << "samples = " << n << "\n";
  m << "points_per_cloud = " << data.points_per_cloud << "\n";
  m << "classes = " << data.num_classes << "\n";
  m << "passes = " << config.passes << "\n";
  m << "pairing = " << to_string(config.pairing) << "\n";
  m << "stages = " << join(config.stages, [](Stage s) { return std::string(to_string(s)); }) << "\n";
  m << "convda = " << join(config.convda_ops, [](ConvOp o) { return std::string(to_string(o)); }) << "\n";
  m << "neighbor = " << to_string(config.mix.neighbor_mode) << "\n";
  m << "theta = " << format_double(config.mix.theta) << "\n";
  m << "nmax_fraction = " << format_double(config.mix.nmax_fraction) << "\n";
  m << "apply_prob = " << format_double(config.mix.apply_prob) << "\n";
  m << "size_policy = " << to_string(config.mix.size_policy) << "\n";
  m << "jitter_sigma = " << format_double(config.convda.jitter_sigma) << "\n";
  m << "jitter_clip = " << format_double(config.convda.jitter_clip) << "\n";
  m << "scale_lo = " << format_double(config.convda.scale_lo) << "\n";
  m << "scale_hi = " << format_double(config.convda.scale_hi) << "\n";
  m << "shift_range = " << format_double(config.convda.shift_range) << "\n";
  m << "drop_max_ratio = " << format_double(config.convda.drop_max_ratio) << "\n";
  m << "rng = mt19937_64; stream seed = splitmix64 chain over (seed, pass, sample, stage)\n";
  for (std::size_t p = 0; p < summary.batch_files.size(); ++p) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(summary.digests[p]));
    m << "pass." << p << ".file = " << summary.batch_files[p].filename().string() << "\n";
    m << "pass." << p << ".fnv1a64 = " << hex << "\n";
  }
  m << "stage.rsmix.mixed = " << summary.mixed << "\n";
  m << "stage.rsmix.skipped = " << summary.skipped << "\n";
  m << "stage.rsmix.degenerate_skip = " << summary.degenerate << "\n";
  for (ConvOp op : config.convda_ops) {
    m << "stage.convda." << to_string(op) << " = " << convda_counts[static_cast<std::size_t>(op)] << "\n";
  }
  m << "lambda.mean = " << format_double(summary.lambda_mean) << "\n";
  for (std::size_t b = 0; b < kLambdaBins; ++b) {
    m << "lambda.hist." << b << " = " << summary.lambda_histogram[b] << "\n";
  }
  summary.manifest = config.output_dir / "manifest.txt";
  write_file(summary.manifest, m.str());
  return summary;
}

BatchStats compute_stats(const Batch& batch) {
  BatchStats stats;
  stats.count = batch.records.size();
  stats.points_per_cloud = batch.points_per_cloud;
  stats.num_classes = batch.num_classes;
  stats.class_mass.assign(batch.num_classes, 0.0);
  double sum = 0.0;
  for (const BatchRecord& r : batch.records) {
    sum += r.lambda;
    stats.lambda_max = std::max(stats.lambda_max, r.lambda);
    ++stats.lambda_histogram[lambda_bin(r.lambda)];
    for (std::size_t c = 0; c < r.label.num_classes(); ++c) {
      stats.class_mass[c] += r.label[c];
    }
  }
  if (stats.count > 0) {
    stats.lambda_mean = sum / static_cast<double>(stats.count);
    for (double& m : stats.class_mass) {
      m /= static_cast<double>(stats.count);
    }
  }
  return stats;
}

std::string format_stats(const BatchStats& stats) {
  std::ostringstream out;
  out << "count = " << stats.count << "\n";
  out << "points_per_cloud = " << stats.points_per_cloud << "\n";
  out << "classes = " << stats.num_classes << "\n";
  out << "lambda.mean = " << format_double(stats.lambda_mean) << "\n";
  out << "lambda.max = " << format_double(stats.lambda_max) << "\n";
  for (std::size_t b = 0; b < kLambdaBins; ++b) {
    char range[32];
    std::snprintf(range, sizeof range, "[%.1f,%.1f%c", b / 10.0, (b + 1) / 10.0, b + 1 == kLambdaBins ? ']' : ')');
    out << "lambda.hist." << b << " " << range << " = " << stats.lambda_histogram[b] << "\n";
  }
  for (std::size_t c = 0; c < stats.class_mass.size(); ++c) {
    out << "class_mass." << c << " = " << format_double(stats.class_mass[c]) << "\n";
  }
  return out.str();
}

} // namespace rsmix
