#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "rsmix/error.hpp"
#include "rsmix/formats.hpp"
#include "rsmix/mesh.hpp"
#include "rsmix/pipeline.hpp"

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  if (text.empty() || text == "none") {
    return items;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::size_t end = comma == std::string::npos ? text.size() : comma;
    if (end > pos) {
      items.push_back(text.substr(pos, end - pos));
    }
    if (comma == std::string::npos) {
      break;
    }
    pos = comma + 1;
  }
  return items;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-cloud augmentation with rigid-subset mixing (RSMix)"};
  app.require_subcommand(1);

  rsmix::PipelineConfig config;
  std::string input_format = "batch";
  std::string neighbor = "ball";
  std::string size_policy = "fixed-n";
  std::string convda_list = "jitter,scale,rotate-y,shift";
  std::string stages_list = "convda,rsmix";
  std::string pairing = "random-shuffle";

  auto* mix = app.add_subcommand("mix", "Augment a dataset and write RSMX1 batch files");
  mix->add_option("--input", config.input, "Input dataset (RSMX1 batch or labels csv)")->required();
  mix->add_option("--format", input_format, "Input format")->check(CLI::IsMember({"batch", "csv"}));
  mix->add_option("--out", config.output_dir, "Output directory")->required();
  mix->add_option("--seed", config.seed, "Global seed");
  mix->add_option("--passes", config.passes, "Augmentation passes over the dataset");
  mix->add_option("--neighbor", neighbor, "Rigid-subset neighboring")->check(CLI::IsMember({"ball", "knn"}));
  mix->add_option("--theta", config.mix.theta, "Beta(theta, theta) shape for the subset scale");
  mix->add_option("--nmax-frac", config.mix.nmax_fraction, "Beta subset cap as a fraction of n");
  mix->add_option("--apply-prob", config.mix.apply_prob, "Probability of mixing a sample");
  mix->add_option("--size-policy", size_policy, "Mixed cloud size policy")
      ->check(CLI::IsMember({"paper", "fixed-n"}));
  mix->add_option("--convda", convda_list, "Comma list of jitter,scale,rotate-y,shift,drop (or none)");
  mix->add_option("--stages", stages_list, "Stage order, comma list of convda,rsmix (or none)");
  mix->add_option("--pairing", pairing, "Partner selection")
      ->check(CLI::IsMember({"random-shuffle", "sequential"}));
  mix->add_option("--workers", config.workers, "Worker threads");
  mix->add_option("--export-ply", config.export_ply, "Export the first N samples of pass 0 as colored PLY");
  mix->add_option("--mesh-points", config.mesh_points, "Points sampled per mesh for csv input");
  mix->add_option("--classes", config.num_classes, "Class count for csv input (default max index + 1)");
  mix->add_option("--jitter-sigma", config.convda.jitter_sigma);
  mix->add_option("--jitter-clip", config.convda.jitter_clip);
  mix->add_option("--scale-lo", config.convda.scale_lo);
  mix->add_option("--scale-hi", config.convda.scale_hi);
  mix->add_option("--shift-range", config.convda.shift_range);
  mix->add_option("--drop-max", config.convda.drop_max_ratio);

  std::string stats_path;
  auto* stats = app.add_subcommand("stats", "Summarize an RSMX1 batch file");
  stats->add_option("batch", stats_path, "Batch file")->required();

  std::string off_path;
  std::string mesh_out;
  std::string mesh_format = "xyz";
  std::size_t mesh_n = 1024;
  std::uint64_t mesh_seed = 0;
  bool no_normalize = false;
  auto* sample = app.add_subcommand("sample-mesh", "Area-weighted surface sampling of an OFF mesh");
  sample->add_option("input", off_path, "OFF mesh")->required();
  sample->add_option("--n", mesh_n, "Number of points");
  sample->add_option("--seed", mesh_seed, "Seed");
  sample->add_option("--out", mesh_out, "Output file (stdout xyz when omitted)");
  sample->add_option("--format", mesh_format, "Output format")
      ->check(CLI::IsMember({"xyz", "ply-ascii", "ply-binary-le"}));
  sample->add_flag("--no-normalize", no_normalize, "Skip unit-sphere normalization");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mix) {
      config.input_format = input_format == "csv" ? rsmix::InputFormat::Csv : rsmix::InputFormat::Batch;
      config.mix.neighbor_mode = neighbor == "knn" ? rsmix::NeighborMode::Knn : rsmix::NeighborMode::Ball;
      config.mix.size_policy = size_policy == "paper" ? rsmix::SizePolicy::Paper : rsmix::SizePolicy::FixedN;
      config.pairing = pairing == "sequential" ? rsmix::Pairing::Sequential : rsmix::Pairing::RandomShuffle;
      config.convda_ops.clear();
      for (const std::string& op : split_list(convda_list)) {
        config.convda_ops.push_back(rsmix::parse_conv_op(op));
      }
      config.stages.clear();
      for (const std::string& s : split_list(stages_list)) {
        config.stages.push_back(rsmix::parse_stage(s));
      }
      const rsmix::PipelineSummary summary = rsmix::augment_batch(config);
      for (std::size_t p = 0; p < summary.batch_files.size(); ++p) {
        std::cout << summary.batch_files[p].string() << "\n";
      }
      std::cout << summary.manifest.string() << "\n";
      std::cout << "mixed=" << summary.mixed << " skipped=" << summary.skipped
                << " degenerate=" << summary.degenerate << " lambda_mean=" << summary.lambda_mean << "\n";
    } else if (*stats) {
      std::cout << rsmix::format_stats(rsmix::compute_stats(rsmix::read_batch(stats_path)));
    } else if (*sample) {
      rsmix::RandomStream rng(mesh_seed);
      const rsmix::TriangleMesh mesh = rsmix::parse_off(rsmix::read_file(off_path));
      rsmix::CloudSet set;
      set.clouds.push_back(no_normalize ? rsmix::sample_mesh_surface(mesh, mesh_n, rng)
                                        : rsmix::preprocess_mesh(mesh, mesh_n, rng));
      if (mesh_out.empty()) {
        std::cout << rsmix::encode_xyz(set.clouds.front());
      } else {
        rsmix::write_cloud(mesh_out, rsmix::parse_cloud_format(mesh_format), set);
      }
    }
  } catch (const rsmix::Error& e) {
    std::cerr << "error: " << rsmix::to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
