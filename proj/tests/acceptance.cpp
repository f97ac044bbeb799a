// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <tuple>

#include "oracle.hpp"
#include "rsmix/convda.hpp"
#include "rsmix/error.hpp"
#include "rsmix/formats.hpp"
#include "rsmix/mesh.hpp"
#include "rsmix/pipeline.hpp"
#include "rsmix/spatial_index.hpp"
#include "test_util.hpp"

using namespace rsmix;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::vector<double> label_values(const LabelVec& y) {
  return {y.probabilities().begin(), y.probabilities().end()};
}

PointCloud float_exact(PointCloud c) {
  std::vector<Point3> r;
  r.reserve(c.size());
  for (const Point3& p : c.points) {
    r.push_back({static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z)});
  }
  c.points = std::move(r);
  return c;
}

Outcome spatial_index_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  RandomStream rng(101);
  for (int c = 0; c < 1000 && o.ok; ++c) {
    const std::size_t n = 1 + rng.index_below(256);
    PointCloud cloud = c % 3 == 0 ? testutil::random_shape(n, rng) : testutil::random_cloud(n, rng);
    if (c % 10 == 0) {
      for (std::size_t i = 0; i + 1 < n; i += 4) cloud[i + 1] = cloud[i]; // duplicates
    }
    const KdTree tree(cloud);
    for (int q = 0; q < 10; ++q) {
      const Point3 query = q % 2 ? cloud[rng.index_below(n)] : Point3{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2),
                                                                        rng.uniform(-1.2, 1.2)};
      const std::size_t k = 1 + rng.index_below(n);
      const double r = q % 3 == 0 ? std::sqrt(oracle::dist2(query, cloud[rng.index_below(n)])) : rng.uniform(0.0, 1.5);
      if (tree.query_knn(query, k) != oracle::knn(cloud.points, query, k)) {
        o.fail("knn mismatch on cloud " + std::to_string(c));
      }
      if (tree.query_radius(query, r) != oracle::radius(cloud.points, query, r)) {
        o.fail("radius mismatch on cloud " + std::to_string(c));
      }
    }
  }
  const double t = seconds_since(t0);
  if (t >= 30.0) o.fail(fmt("runtime %.2f s >= 30 s", t));
  if (o.ok) o.detail = fmt("1000 clouds x 10 queries, %.2f s", t);
  return o;
}

// Shared by the rigidity, lambda and clamp criteria.
struct MixRunStats {
  Outcome rigidity, lambda, clamp;
  std::size_t mixed = 0, knn_runs = 0;
  double worst_rel = 0.0;
};

MixRunStats mix_runs() {
  MixRunStats s;
  RandomStream rng(202);
  const std::size_t n = 1024;
  const LabelVec ya = LabelVec::one_hot(4, 0), yb = LabelVec::one_hot(4, 3);
  for (int run = 0; run < 10000; ++run) {
    const PointCloud a = testutil::random_shape(n, rng);
    const PointCloud b = testutil::random_shape(n, rng);
    MixParams p;
    p.neighbor_mode = run % 2 ? NeighborMode::Knn : NeighborMode::Ball;
    p.theta = std::array{0.5, 1.0, 2.0}[run % 3];
    p.size_policy = run % 4 < 2 ? SizePolicy::Paper : SizePolicy::FixedN;
    p.apply_prob = 0.9;
    RandomStream mix_rng(derive_seed(202, {static_cast<std::uint64_t>(run)}));
    const MixResult r = mix_pair(a, ya, b, yb, p, mix_rng);
    const std::string tag = " (run " + std::to_string(run) + ")";

    // Rigidity: every beta pair keeps its source distance; alpha points are verbatim.
    std::vector<std::size_t> beta_pos;
    std::set<std::uint32_t> alpha_origins, beta_origins;
    for (std::size_t i = 0; i < r.mixed.size(); ++i) {
      if (r.provenance[i] == Provenance::FromAlpha) {
        alpha_origins.insert(r.origin[i]);
        if (!(r.mixed[i] == a[r.origin[i]])) s.rigidity.fail("alpha point not bitwise equal to source" + tag);
      } else {
        beta_pos.push_back(i);
        beta_origins.insert(r.origin[i]);
      }
    }
    for (std::size_t x = 0; x < beta_pos.size(); ++x) {
      for (std::size_t y = x + 1; y < beta_pos.size(); ++y) {
        const double dm = distance(r.mixed[beta_pos[x]], r.mixed[beta_pos[y]]);
        const double ds = distance(b[r.origin[beta_pos[x]]], b[r.origin[beta_pos[y]]]);
        const double err = std::abs(dm - ds);
        if (ds == 0.0 ? err != 0.0 : err > 1e-7 * ds) s.rigidity.fail("beta distance changed" + tag);
        if (ds > 0.0) s.worst_rel = std::max(s.worst_rel, err / ds);
      }
    }

    // Lambda from provenance counts (distinct sources, so fixed-n padding is not counted twice).
    const double expect = beta_origins.empty() ? 0.0
                                               : static_cast<double>(beta_origins.size()) /
                                                     static_cast<double>(alpha_origins.size() + beta_origins.size());
    if (r.lambda != expect) s.lambda.fail("lambda differs from provenance counts" + tag);
    if (r.status == MixStatus::Mixed) ++s.mixed;
    if (r.status == MixStatus::Mixed && beta_origins.size() != r.subset_beta.size()) {
      s.lambda.fail("beta provenance count differs from subset" + tag);
    }

    if (r.subset_beta.size() > n / 2 || beta_origins.size() > n / 2) s.clamp.fail("|S_beta| > n/2" + tag);
    if (p.neighbor_mode == NeighborMode::Knn) {
      ++s.knn_runs;
      if (r.mixed.size() != n) s.clamp.fail("knn output size " + std::to_string(r.mixed.size()) + tag);
    }
    if (p.size_policy == SizePolicy::FixedN && r.mixed.size() != n) s.clamp.fail("fixed-n size" + tag);
  }
  return s;
}

Outcome lambda_fixtures() {
  Outcome o;
  const LabelVec ya = LabelVec::one_hot(2, 0), yb = LabelVec::one_hot(2, 1);
  RandomStream rng(303);

  // Full extraction: every alpha point inside the ball.
  PointCloud same;
  same.points.assign(16, Point3{0.25, -0.5, 0.125});
  const PointCloud b = testutil::random_shape(16, rng);
  MixParams p;
  p.apply_prob = 1.0;
  RandomStream r1(1);
  const MixResult full = mix_pair(same, ya, b, yb, p, r1);
  if (full.status != MixStatus::DegenerateSkip || full.lambda != 0.0 || !(full.mixed.points == same.points) ||
      !(full.label == ya)) {
    o.fail("full-extraction case");
  }

  // Empty beta subset: the cap rounds down to zero.
  const PointCloud a = testutil::random_shape(64, rng);
  p.nmax_fraction = 0.01;
  RandomStream r2(2);
  const MixResult empty = mix_pair(a, ya, testutil::random_shape(64, rng), yb, p, r2);
  if (!empty.subset_beta.empty() || empty.lambda != 0.0 || !(empty.label == ya) ||
      std::count(empty.provenance.begin(), empty.provenance.end(), Provenance::FromBetaTranslated) != 0) {
    o.fail("empty-beta case");
  }

  // Generic: knn keeps |S_a| = |S_b| = k, so lambda = k / n.
  p = MixParams{};
  p.apply_prob = 1.0;
  p.neighbor_mode = NeighborMode::Knn;
  RandomStream r3(3);
  const MixResult gen = mix_pair(a, ya, testutil::random_shape(64, rng), yb, p, r3);
  const std::size_t k = gen.subset_beta.size();
  if (gen.status != MixStatus::Mixed || k == 0 || gen.lambda != static_cast<double>(k) / (64.0 - k + k) ||
      std::abs(gen.label[1] - gen.lambda) > 1e-15) {
    o.fail("generic case");
  }
  if (o.ok) o.detail = "full-extraction, empty-beta and generic fixtures hit";
  return o;
}

Outcome reference_equivalence() {
  Outcome o;
  RandomStream rng(404);
  const LabelVec ya = LabelVec::one_hot(3, 1), yb = LabelVec::one_hot(3, 2);
  for (int run = 0; run < 500; ++run) {
    const PointCloud a = testutil::random_shape(64, rng);
    const PointCloud b = testutil::random_shape(64, rng);
    MixParams p;
    p.neighbor_mode = run % 2 ? NeighborMode::Knn : NeighborMode::Ball;
    p.size_policy = run % 4 < 2 ? SizePolicy::Paper : SizePolicy::FixedN;
    p.theta = run % 3 ? 1.0 : 0.5;
    const std::uint64_t seed = derive_seed(404, {static_cast<std::uint64_t>(run)});
    RandomStream lib_rng(seed), ref_rng(seed);
    const MixResult r = mix_pair(a, ya, b, yb, p, lib_rng);
    const oracle::Mix m = oracle::reference_mix(a.points, label_values(ya), b.points, label_values(yb), p, ref_rng);
    bool same = r.lambda == m.lambda && r.mixed.points == m.points && r.provenance.size() == m.from_beta.size() &&
                label_values(r.label) == m.label;
    for (std::size_t i = 0; same && i < m.from_beta.size(); ++i) {
      same = (r.provenance[i] == Provenance::FromBetaTranslated) == m.from_beta[i];
    }
    if (!same) o.fail("mismatch on run " + std::to_string(run));
  }
  if (o.ok) o.detail = "500 runs identical (lambda, provenance, coordinates, label)";
  return o;
}

Outcome theta_sampler() {
  Outcome o;
  RandomStream rng(505);
  std::vector<double> u(100000), w(100000);
  for (double& x : u) x = sample_radius(1.0, rng);
  for (double& x : w) x = sample_radius(100.0, rng);
  const double ks = testutil::ks_uniform(u);
  const double v1 = testutil::sample_variance(u), v100 = testutil::sample_variance(w);
  if (ks >= 0.01) o.fail(fmt("KS statistic %.5f >= 0.01", ks));
  if (!(v100 < v1)) o.fail(fmt("variance at theta=100 (%.5f) not below theta=1 (%.5f)", v100, v1));
  if (o.ok) o.detail = fmt("KS %.5f; var(100)=%.6f", ks, v100) + fmt(" < var(1)=%.6f", v1);
  return o;
}

Outcome mesh_sampling() {
  Outcome o;
  // Areas 1 and 3 in the planes z = 0 and z = 5.
  const TriangleMesh mesh = parse_off("OFF\n6 2 0\n0 0 0\n2 0 0\n0 1 0\n0 0 5\n6 0 5\n0 1 5\n3 0 1 2\n3 3 4 5\n");
  RandomStream rng(606);
  const std::size_t n = 100000;
  const PointCloud pts = sample_mesh_surface(mesh, n, rng);
  std::size_t first = 0;
  double worst = 0.0;
  for (const Point3& p : pts.points) {
    const double d0 = std::abs(p.z), d1 = std::abs(p.z - 5.0);
    first += d0 < d1;
    worst = std::max(worst, std::min(d0, d1));
  }
  const double expect = n * 0.25, sigma = std::sqrt(n * 0.25 * 0.75);
  if (std::abs(first - expect) > 3 * sigma) o.fail(fmt("face count %.0f outside 3 sigma of %.0f", double(first), expect));
  if (worst > 1e-6) o.fail(fmt("point %.3g from its plane", worst));
  if (o.ok) o.detail = fmt("face counts %.0f / %.0f", double(first), double(n - first)) + fmt(" (expect 25000 +- %.0f)", 3 * sigma);
  return o;
}

Outcome pipeline_determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "rsmix_acceptance_pipeline";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    RandomStream rng(707);
    Batch data;
    data.points_per_cloud = 1024;
    data.num_classes = 10;
    for (std::size_t i = 0; i < 10000; ++i) {
      data.records.push_back({float_exact(testutil::random_shape(1024, rng)), LabelVec::one_hot(10, i % 10), 0.0});
    }
    write_batch(dir / "in.rsmx", data);
  }
  PipelineConfig cfg;
  cfg.input = dir / "in.rsmx";
  cfg.seed = 42;
  cfg.mix.apply_prob = 1.0;
  cfg.workers = 1;
  cfg.output_dir = dir / "w1";
  const auto t0 = Clock::now();
  const PipelineSummary one = augment_batch(cfg);
  const double t = seconds_since(t0);
  cfg.workers = 8;
  cfg.output_dir = dir / "w8";
  const PipelineSummary eight = augment_batch(cfg);
  if (one.digests != eight.digests) o.fail("digest differs between 1 and 8 workers");
  if (read_file(one.batch_files[0]) != read_file(eight.batch_files[0])) o.fail("batch bytes differ");
  if (t >= 60.0) o.fail(fmt("single-worker runtime %.2f s >= 60 s", t));
  if (o.ok) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(one.digests[0]));
    o.detail = "digest " + std::string(hex) + " at 1 and 8 workers; 10^4 pairs x 1024 pts in " + fmt("%.2f s", t);
  }
  fs::remove_all(dir);
  return o;
}

Outcome convda_suite() {
  Outcome o;
  RandomStream rng(808);
  auto rel = [](double got, double want) { return std::abs(got - want) / std::max(want, 1e-300); };
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 2 + rng.index_below(63);
    const PointCloud cloud = testutil::random_cloud(n, rng);
    const auto d = testutil::distance_matrix(cloud.points);

    const PointCloud rot = c % 2 ? random_rotate_y(cloud, rng)
                                 : rotate_axis(cloud, static_cast<Axis>(rng.index_below(3)), rng.uniform(-10, 10));
    const PointCloud sh = random_shift(cloud, rng.uniform(0.0, 2.0), rng);
    const ScaledCloud sc = random_scale(cloud, 0.5, 2.0, rng);
    const double sigma = rng.uniform(0.0, 0.1), clip = rng.uniform(0.0, 0.1);
    const PointCloud jit = jitter(cloud, sigma, clip, rng);
    const PointCloud dropped = c % 2 ? random_drop(cloud, 0.875, rng) : drop_points(cloud, rng.uniform(0.0, 0.99), rng);

    const auto dr = testutil::distance_matrix(rot.points);
    const auto ds = testutil::distance_matrix(sh.points);
    const auto dc = testutil::distance_matrix(sc.cloud.points);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rel(dr[i][j], d[i][j]) > 1e-9) o.fail("rotation changed a distance");
        if (rel(ds[i][j], d[i][j]) > 1e-9) o.fail("shift changed a distance");
        if (rel(dc[i][j], sc.factor * d[i][j]) > 1e-9) o.fail("scale changed a distance ratio");
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Point3 delta = jit[i] - cloud[i];
      if (std::abs(delta.x) > clip || std::abs(delta.y) > clip || std::abs(delta.z) > clip) o.fail("jitter beyond clip");
    }
    std::set<std::tuple<double, double, double>> source;
    for (const Point3& p : cloud.points) source.emplace(p.x, p.y, p.z);
    if (dropped.size() != n) o.fail("drop changed the count");
    for (const Point3& p : dropped.points) {
      if (!source.contains({p.x, p.y, p.z})) o.fail("drop invented a point");
    }
    if (rot.size() != n || sh.size() != n || sc.cloud.size() != n || jit.size() != n) o.fail("count changed");
  }
  if (o.ok) o.detail = "1000 cases each of rotation, shift, scale, jitter, drop";
  return o;
}

Outcome format_round_trips() {
  Outcome o;
  RandomStream rng(909);
  Batch batch;
  batch.points_per_cloud = 128;
  batch.num_classes = 5;
  for (std::size_t i = 0; i < 50; ++i) {
    BatchRecord rec{float_exact(testutil::random_cloud(128, rng)), LabelVec::one_hot(5, i % 5), 0.0};
    if (i % 2) {
      const double lam = static_cast<float>(rng.uniform01());
      rec.label = mix_labels(rec.label, LabelVec::one_hot(5, (i + 1) % 5), lam);
      rec.lambda = lam;
    }
    batch.records.push_back(std::move(rec));
  }
  const std::string bytes = encode_batch(batch);
  const Batch back = decode_batch(bytes);
  if (encode_batch(back) != bytes) o.fail("RSMX1 re-encode differs");
  for (std::size_t i = 0; i < batch.records.size(); ++i) {
    if (!(back.records[i].cloud.points == batch.records[i].cloud.points)) o.fail("RSMX1 coordinates differ");
  }
  const PointCloud cloud = float_exact(testutil::random_cloud(500, rng));
  const std::string ply = encode_ply(cloud, PlyEncoding::BinaryLE);
  const PointCloud ply_back = decode_ply(ply);
  if (!(ply_back.points == cloud.points) || encode_ply(ply_back, PlyEncoding::BinaryLE) != ply) {
    o.fail("PLY binary round trip differs");
  }

  std::vector<std::string> seeds{bytes.substr(0, kBatchHeaderBytes + 3 * (128 * 12 + 24)),
                                       ply,
                                       encode_ply(testutil::random_cloud(30, rng), PlyEncoding::Ascii),
                                       encode_xyz(testutil::random_cloud(30, rng)),
                                       "OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n4 0 1 2 3\n"};
  // Fix the truncated batch header's count so the seed itself parses.
  seeds[0][5] = 3;
  seeds[0][6] = seeds[0][7] = seeds[0][8] = 0;
  std::size_t structured = 0;
  for (int t = 0; t < 10000; ++t) {
    std::string f = seeds[t % seeds.size()];
    const std::size_t edits = 1 + rng.index_below(16);
    for (std::size_t e = 0; e < edits && !f.empty(); ++e) {
      const std::size_t at = rng.index_below(f.size());
      switch (rng.index_below(4)) {
      case 0: f[at] = static_cast<char>(rng.index_below(256)); break;
      case 1: f.erase(at, 1 + rng.index_below(8)); break;
      case 2: f.insert(at, 1, static_cast<char>(rng.index_below(256))); break;
      default: f[at] = "0123456789-.e \n"[rng.index_below(15)]; break;
      }
    }
    const std::function<void()> parsers[] = {[&] { decode_batch(f); }, [&] { decode_ply(f); },
                                             [&] { decode_xyz(f); }, [&] { parse_off(f); }};
    for (const auto& parse : parsers) {
      try {
        parse();
      } catch (const Error&) {
        ++structured;
      } catch (const std::exception& e) {
        o.fail(std::string("parser threw non-structured exception: ") + e.what());
      }
    }
  }
  if (o.ok) o.detail = "RSMX1 and PLY binary bitwise; 10^4 mutated files, " + std::to_string(structured) +
                       " structured errors, no crash";
  return o;
}

} // namespace

int main() {
  int failures = 0;
  auto report = [&](const char* name, const Outcome& o) {
    std::printf("%s  %-34s %s\n", o.ok ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.ok;
  };
  auto guarded = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      Outcome o;
      o.fail(std::string("exception: ") + e.what());
      return o;
    }
  };

  report("spatial-index oracle", guarded(spatial_index_oracle));
  MixRunStats runs;
  try {
    runs = mix_runs();
  } catch (const std::exception& e) {
    runs.rigidity.fail(e.what());
    runs.lambda.fail(e.what());
    runs.clamp.fail(e.what());
  }
  if (runs.rigidity.ok) runs.rigidity.detail = "10^4 runs, worst relative distance error " + fmt("%.3g", runs.worst_rel);
  report("rigidity", runs.rigidity);
  const Outcome fixtures = guarded(lambda_fixtures);
  Outcome lambda = runs.lambda;
  if (!fixtures.ok) lambda.fail(fixtures.detail);
  if (lambda.ok) lambda.detail = std::to_string(runs.mixed) + " mixed of 10^4 runs exact; " + fixtures.detail;
  report("lambda correctness", lambda);
  if (runs.clamp.ok) runs.clamp.detail = "|S_beta| <= n/2 everywhere; " + std::to_string(runs.knn_runs) + " knn runs at n";
  report("clamp and bound", runs.clamp);
  report("reference equivalence", guarded(reference_equivalence));
  report("theta sampler", guarded(theta_sampler));
  report("mesh sampling", guarded(mesh_sampling));
  report("pipeline determinism", guarded(pipeline_determinism));
  report("convda isometry/similarity", guarded(convda_suite));
  report("format round-trips and fuzz", guarded(format_round_trips));

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
