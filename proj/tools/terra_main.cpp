#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "terra/assembler.hpp"
#include "terra/errors.hpp"
#include "terra/eval.hpp"
#include "terra/observation.hpp"
#include "terra/query.hpp"
#include "terra/rng.hpp"
#include "terra/scene.hpp"
#include "terra/sha256.hpp"
#include "terra/tiles.hpp"
#include "terra/voxel.hpp"
#include "terra/wfc.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct HashedFile {
  std::string path;  // as shown in the manifest
  std::string sha256;
};

nlohmann::json hashed_json(const std::vector<HashedFile>& files) {
  nlohmann::json arr = nlohmann::json::array();
  for (const HashedFile& f : files) arr.push_back({{"path", f.path}, {"sha256", f.sha256}});
  return arr;
}

// Reproducibility record next to the outputs: what ran, on which inputs,
// producing which bytes. No timestamps, so reruns match byte for byte.
void write_manifest(const fs::path& out_dir, const std::string& command,
                    const std::uint64_t* seed, const std::vector<HashedFile>& inputs,
                    const std::vector<HashedFile>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["version"] = kVersion;
  if (seed != nullptr) j["seed"] = *seed;
  j["inputs"] = hashed_json(inputs);
  j["outputs"] = hashed_json(outputs);
  const fs::path path = out_dir / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw terra::IoError("cannot open manifest file: " + path.string());
  out << j.dump(2) << "\n";
  if (!out.good()) throw terra::IoError("failed writing manifest file: " + path.string());
}

HashedFile hash_output(const fs::path& out_dir, const std::string& name) {
  return {name, terra::sha256_file_hex(out_dir / name)};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw terra::IoError("cannot open output file: " + path.string());
  out << text;
  if (!out.good()) throw terra::IoError("failed writing output file: " + path.string());
}

bool parse_doubles_csv(const std::string& text, double* out, int n) {
  const char* p = text.c_str();
  for (int i = 0; i < n; ++i) {
    char* end = nullptr;
    out[i] = std::strtod(p, &end);
    if (end == p) return false;
    p = end;
    if (i + 1 < n) {
      while (*p == ' ') ++p;
      if (*p != ',') return false;
      ++p;
    }
  }
  while (*p == ' ') ++p;
  return *p == '\0';
}

std::string format_vec(const terra::Vec3& v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "[%.3f, %.3f, %.3f]", v.x, v.y, v.z);
  return buf;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  int rows = 4;
  int cols = 4;
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_dir = ".";
  int count = 1;
  int jobs = 0;
  int max_restarts = 100;
  bool no_pads = false;
  bool no_overhangs = false;
};

std::string scene_stem(int index, int count) {
  if (count == 1) return "scene";
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%03d", index);
  return buf;
}

int find_ground_pad_tile(const terra::TileSet& tiles) {
  int best = -1;
  double best_height = 0.0;
  for (const terra::TileSpec& tile : tiles.tiles()) {
    if (tile.kind != terra::TileKind::flat) continue;
    const auto it = tile.params.find("height");
    const double h = it == tile.params.end() ? 0.0 : it->second;
    if (best < 0 || h < best_height) {
      best = tile.id;
      best_height = h;
    }
  }
  return best;
}

int run_generate(const GenerateArgs& args) {
  terra::TileLibraryConfig config = terra::TileLibraryConfig::defaults();
  std::vector<HashedFile> inputs;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path, std::ios::binary);
    if (!in) throw terra::IoError("cannot open tile config: " + args.config_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw terra::IoError("malformed tile config " + args.config_path + ": " + e.what());
    }
    config = terra::TileLibraryConfig::from_json(j);
    inputs.push_back({args.config_path, terra::sha256_file_hex(args.config_path)});
  }

  const terra::TileSet tiles = terra::generate_tile_library(config);
  std::printf("tile library: %d tiles, hash %016llx\n", tiles.size(),
              static_cast<unsigned long long>(tiles.content_hash()));

  std::vector<terra::BoundaryConstraint> pins;
  if (!args.no_pads) {
    const int pad = find_ground_pad_tile(tiles);
    if (pad < 0) {
      throw terra::ConfigError(
          "tile library has no flat tile for spawn/goal pads (use --no-pads)");
    }
    pins.push_back({0, 0, pad});
    pins.push_back({args.rows - 1, args.cols - 1, pad});
  }

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);

  std::vector<std::string> lines(static_cast<std::size_t>(args.count));
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= args.count) return;
      try {
        const std::uint64_t scene_seed =
            args.count == 1 ? args.seed : terra::derive_seed(args.seed, static_cast<std::uint64_t>(i));
        int restarts = 0;
        const terra::CollapsedGrid grid = terra::collapse(
            tiles, args.rows, args.cols, scene_seed, pins, args.max_restarts, &restarts);
        terra::Scene scene = terra::assemble_scene(tiles, grid, scene_seed);
        if (!args.no_overhangs) {
          scene = terra::place_overhangs(std::move(scene), terra::OverhangParams{},
                                         terra::derive_seed(scene_seed, 1));
        }
        const std::string stem = scene_stem(i, args.count);
        terra::save_scene(scene, (out_dir / (stem + ".json")).string());
        terra::export_obj(scene, (out_dir / (stem + ".obj")).string());

        const terra::Aabb bounds = scene.bounds();
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s: %dx%d grid, restarts %d, overhangs %d, bounds %s .. %s",
                      stem.c_str(), args.rows, args.cols, restarts,
                      static_cast<int>(scene.overhangs.size()), format_vec(bounds.lo).c_str(),
                      format_vec(bounds.hi).c_str());
        lines[static_cast<std::size_t>(i)] = buf;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(args.count);
        return;
      }
    }
  };

  int jobs = args.jobs;
  if (jobs == 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, args.count));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  for (const std::string& line : lines) std::printf("%s\n", line.c_str());

  std::vector<HashedFile> outputs;
  for (int i = 0; i < args.count; ++i) {
    const std::string stem = scene_stem(i, args.count);
    outputs.push_back(hash_output(out_dir, stem + ".json"));
    outputs.push_back(hash_output(out_dir, stem + ".obj"));
  }
  write_manifest(out_dir, "generate", &args.seed, inputs, outputs);
  std::printf("wrote %d scene(s) and manifest.json to %s\n", args.count, args.out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------- voxelize

struct VoxelizeArgs {
  std::string scene_path;
  std::string pose_text;
  std::string out_dir = ".";
  double bottom_offset = 1.0;
  bool noise = false;
  std::uint64_t noise_seed = 1;
  terra::NoiseParams noise_params;
};

terra::BodyPose pose_at_spawn(const terra::Scene& scene) {
  terra::QueryStructure query(scene);
  const double base_z = scene.bounds().hi.z + 1.0;
  const double ground =
      query.ground_height_avg(scene.spawn.x, scene.spawn.y, base_z, scene.spawn.yaw);
  terra::BodyPose body;
  body.position = terra::Vec3{scene.spawn.x, scene.spawn.y, ground + 0.55};
  body.yaw = scene.spawn.yaw;
  return body;
}

int run_voxelize(const VoxelizeArgs& args) {
  const terra::Scene scene = terra::load_scene(args.scene_path);

  terra::BodyPose body;
  if (args.pose_text.empty()) {
    body = pose_at_spawn(scene);
  } else {
    double v[4];
    if (!parse_doubles_csv(args.pose_text, v, 4)) {
      std::fprintf(stderr, "invalid --pose '%s', expected x,y,z,yaw\n", args.pose_text.c_str());
      return kExitUsage;
    }
    body.position = terra::Vec3{v[0], v[1], v[2]};
    body.yaw = v[3];
  }

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);

  const terra::VoxelGrid grid = terra::voxelize(scene, body, args.bottom_offset);
  terra::save_voxels(grid, (out_dir / "voxels.bin").string());

  nlohmann::json meta = terra::voxel_meta_json(grid, body, args.bottom_offset);
  std::vector<HashedFile> outputs;
  outputs.push_back(hash_output(out_dir, "voxels.bin"));

  if (args.noise) {
    terra::Rng rng(args.noise_seed);
    const terra::VoxelGrid noisy = terra::corrupt_voxels(grid, args.noise_params, rng);
    terra::save_voxels(noisy, (out_dir / "voxels_noisy.bin").string());
    meta["noise"] = {{"seed", args.noise_seed},
                     {"voxel_drop", args.noise_params.voxel_drop},
                     {"voxel_spurious", args.noise_params.voxel_spurious},
                     {"jitter_xyz", args.noise_params.jitter_xyz},
                     {"jitter_yaw", args.noise_params.jitter_yaw},
                     {"occupied", noisy.occupied_count()}};
    outputs.push_back(hash_output(out_dir, "voxels_noisy.bin"));
  }

  write_text(out_dir / "voxels.json", meta.dump(2) + "\n");
  outputs.push_back(hash_output(out_dir, "voxels.json"));

  std::vector<HashedFile> inputs = {{args.scene_path, terra::sha256_file_hex(args.scene_path)}};
  write_manifest(out_dir, "voxelize", args.noise ? &args.noise_seed : nullptr, inputs, outputs);

  std::printf("voxelized %s at [%.3f, %.3f, %.3f] yaw %.3f: %d of %d cells occupied\n",
              args.scene_path.c_str(), body.position.x, body.position.y, body.position.z,
              body.yaw, grid.occupied_count(), terra::VoxelGrid::kCellCount);
  std::printf("wrote voxels.bin%s voxels.json manifest.json to %s\n",
              args.noise ? " voxels_noisy.bin" : "", args.out_dir.c_str());
  return 0;
}

// -------------------------------------------------------------------- scan

struct ScanArgs {
  std::string scene_path;
  std::string origin_text;
  std::string out_dir = ".";
  int count = 64;
  double max_range = 2.0;
};

int run_scan(const ScanArgs& args) {
  const terra::Scene scene = terra::load_scene(args.scene_path);
  terra::QueryStructure query(scene);

  terra::Vec3 origin;
  if (args.origin_text.empty()) {
    const double base_z = scene.bounds().hi.z + 1.0;
    const double ground =
        query.ground_height_avg(scene.spawn.x, scene.spawn.y, base_z, scene.spawn.yaw);
    origin = terra::Vec3{scene.spawn.x, scene.spawn.y, ground + 0.55};
  } else {
    double v[3];
    if (!parse_doubles_csv(args.origin_text, v, 3)) {
      std::fprintf(stderr, "invalid --origin '%s', expected x,y,z\n", args.origin_text.c_str());
      return kExitUsage;
    }
    origin = terra::Vec3{v[0], v[1], v[2]};
  }

  const terra::SphericalScanPattern pattern = terra::fibonacci_pattern(args.count, args.max_range);
  const std::vector<double> distances = query.spherical_scan(origin, pattern);

  nlohmann::json j;
  j["origin"] = {origin.x, origin.y, origin.z};
  j["count"] = args.count;
  j["max_range"] = args.max_range;
  nlohmann::json dirs = nlohmann::json::array();
  for (const terra::Vec3& d : pattern.directions) dirs.push_back({d.x, d.y, d.z});
  j["directions"] = dirs;
  j["distances"] = distances;

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  write_text(out_dir / "scan.json", j.dump(2) + "\n");

  std::vector<HashedFile> inputs = {{args.scene_path, terra::sha256_file_hex(args.scene_path)}};
  write_manifest(out_dir, "scan", nullptr, inputs, {hash_output(out_dir, "scan.json")});

  int hits = 0;
  for (double d : distances) {
    if (d < args.max_range) ++hits;
  }
  std::printf("scanned %d directions from [%.3f, %.3f, %.3f]: %d hits within %.3f m\n",
              args.count, origin.x, origin.y, origin.z, hits, args.max_range);
  std::printf("wrote scan.json manifest.json to %s\n", args.out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string kinds_text = "overhanging,obstacle,overhanging_plus_obstacle";
  int seeds_per_cell = 5;
  int jobs = 0;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

bool parse_kinds(const std::string& text, std::vector<terra::EvalKind>* kinds) {
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string name = text.substr(start, end - start);
    bool matched = false;
    for (terra::EvalKind kind : {terra::EvalKind::overhanging, terra::EvalKind::obstacle,
                                 terra::EvalKind::overhanging_plus_obstacle}) {
      if (name == terra::to_string(kind)) {
        kinds->push_back(kind);
        matched = true;
        break;
      }
    }
    if (!matched) return false;
    start = end + 1;
  }
  return !kinds->empty();
}

int run_evaluate(const EvaluateArgs& args) {
  std::vector<terra::EvalKind> kinds;
  if (!parse_kinds(args.kinds_text, &kinds)) {
    std::fprintf(stderr,
                 "invalid --kinds '%s', expected a comma-separated subset of "
                 "overhanging,obstacle,overhanging_plus_obstacle\n",
                 args.kinds_text.c_str());
    return kExitUsage;
  }

  terra::SweepConfig config;
  config.seeds_per_cell = args.seeds_per_cell;
  config.jobs = args.jobs;
  config.seed = args.seed;

  const std::vector<terra::SuccessCell> cells = terra::success_grid(kinds, config);

  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  terra::write_results_csv(cells, (out_dir / "results.csv").string());
  write_manifest(out_dir, "evaluate", &args.seed, {}, {hash_output(out_dir, "results.csv")});

  for (terra::Policy policy :
       {terra::Policy::high, terra::Policy::low, terra::Policy::adaptive_oracle}) {
    double sum = 0.0;
    int n = 0;
    for (const terra::SuccessCell& cell : cells) {
      if (cell.policy != policy) continue;
      sum += cell.success_rate;
      ++n;
    }
    if (n > 0) {
      std::printf("%-16s mean success %.3f over %d cells\n", terra::to_string(policy), sum / n, n);
    }
  }
  std::printf("wrote results.csv (%d rows) and manifest.json to %s\n",
              static_cast<int>(cells.size()), args.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Procedural confined-terrain generation and geometric perception toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand(
      "generate", "Generate tiled terrain scenes with overhanging boxes");
  generate->add_option("--rows", gen.rows, "Tile grid rows")->check(CLI::Range(1, 512));
  generate->add_option("--cols", gen.cols, "Tile grid columns")->check(CLI::Range(1, 512));
  generate->add_option("--seed", gen.seed, "Generation seed");
  generate->add_option("--config", gen.config_path, "Tile library config JSON");
  generate->add_option("--out", gen.out_dir, "Output directory");
  generate->add_option("--count", gen.count, "Number of scenes")->check(CLI::Range(1, 100000));
  generate->add_option("--jobs", gen.jobs, "Worker threads, 0 = all cores")
      ->check(CLI::Range(0, 1024));
  generate->add_option("--max-restarts", gen.max_restarts, "Solver restart budget")
      ->check(CLI::Range(0, 100000));
  generate->add_flag("--no-pads", gen.no_pads,
                     "Do not pin ground-level tiles at the spawn and goal cells");
  generate->add_flag("--no-overhangs", gen.no_overhangs, "Skip overhanging box placement");

  VoxelizeArgs vox;
  CLI::App* voxelize = app.add_subcommand(
      "voxelize", "Render a body-centered occupancy grid from a scene");
  voxelize->add_option("--scene", vox.scene_path, "Scene JSON path")->required();
  voxelize->add_option("--pose", vox.pose_text, "Body pose x,y,z,yaw (default: above the spawn)");
  voxelize->add_option("--bottom-offset", vox.bottom_offset,
                       "Grid bottom below the body origin, m");
  voxelize->add_option("--out", vox.out_dir, "Output directory");
  voxelize->add_flag("--noise", vox.noise, "Also write a corrupted grid");
  voxelize->add_option("--noise-seed", vox.noise_seed, "Corruption seed");
  voxelize->add_option("--drop", vox.noise_params.voxel_drop, "Occupied cell drop probability")
      ->check(CLI::Range(0.0, 1.0));
  voxelize
      ->add_option("--spurious", vox.noise_params.voxel_spurious, "Free cell set probability")
      ->check(CLI::Range(0.0, 1.0));
  voxelize->add_option("--jitter-xyz", vox.noise_params.jitter_xyz, "Pose jitter sigma, m")
      ->check(CLI::NonNegativeNumber);
  voxelize->add_option("--jitter-yaw", vox.noise_params.jitter_yaw, "Pose jitter sigma, rad")
      ->check(CLI::NonNegativeNumber);

  ScanArgs scan;
  CLI::App* scan_cmd = app.add_subcommand(
      "scan", "Cast a spherical ray pattern through a scene");
  scan_cmd->add_option("--scene", scan.scene_path, "Scene JSON path")->required();
  scan_cmd->add_option("--origin", scan.origin_text, "Ray origin x,y,z (default: above the spawn)");
  scan_cmd->add_option("--count", scan.count, "Number of directions")->check(CLI::Range(1, 65536));
  scan_cmd->add_option("--max-range", scan.max_range, "Maximum ray range, m")
      ->check(CLI::PositiveNumber);
  scan_cmd->add_option("--out", scan.out_dir, "Output directory");

  EvaluateArgs ev;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Sweep corridor courses and report per-policy success rates");
  evaluate->add_option("--kinds", ev.kinds_text, "Comma-separated course kinds");
  evaluate->add_option("--seeds-per-cell", ev.seeds_per_cell, "Episodes per cell")
      ->check(CLI::Range(1, 1000));
  evaluate->add_option("--jobs", ev.jobs, "Worker threads, 0 = all cores")
      ->check(CLI::Range(0, 1024));
  evaluate->add_option("--seed", ev.seed, "Base evaluation seed");
  evaluate->add_option("--out", ev.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*voxelize) return run_voxelize(vox);
    if (*scan_cmd) return run_scan(scan);
    if (*evaluate) return run_evaluate(ev);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}
