// Command-line front end: synth, detect, features, train, predict, eval.
// Exit codes: 0 success, 1 input error, 2 solver/numerical error.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>

#include "partpose/dataset_io.hpp"
#include "partpose/digest.hpp"
#include "partpose/errors.hpp"
#include "partpose/eval.hpp"
#include "partpose/models.hpp"
#include "partpose/parallel.hpp"
#include "partpose/rng.hpp"
#include "partpose/synth.hpp"
#include "partpose/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace partpose;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError("config file " + path + ": " + e.what());
  }
  return doc;
}

/// The config file is applied before parsing, so explicit flags win.
json scan_config(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return load_json_file(argv[i + 1]);
    if (arg.rfind("--config=", 0) == 0) return load_json_file(arg.substr(9));
  }
  return json::object();
}

void write_run_manifest(const fs::path& dir, const std::string& command,
                        std::uint64_t seed, const json& resolved) {
  json doc;
  doc["command"] = command;
  doc["git"] = kGitDescribe;
  doc["version"] = kVersion;
  doc["seed"] = seed;
  doc["config"] = resolved;
  fs::create_directories(dir);
  std::ofstream out(dir / "run_manifest.json", std::ios::binary);
  if (!out) throw InputError("cannot write run manifest in " + dir.string());
  out << doc.dump(2) << "\n";
}

std::string cache_directory(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  const char* env = std::getenv("PARTPOSE_CACHE_DIR");
  return env != nullptr ? env : "";
}

FeatureConfig make_feature_config(double bin_size, int grid_cells, bool weight_by_score,
                                  int image_width) {
  FeatureConfig cfg =
      FeatureConfig::derived(HopConfig::from_bin_size(bin_size, grid_cells), image_width);
  cfg.weight_by_score = weight_by_score;
  return cfg;
}

json feature_file_json(const RawFeatureMatrix& raw, const FeatureConfig& cfg,
                       std::uint64_t dataset_digest) {
  json doc;
  doc["version"] = 1;
  doc["dataset_digest"] = digest_hex(dataset_digest);
  doc["config"] = {{"grid_cells", cfg.hop.grid_cells},
                   {"orientation_bins", cfg.hop.orientation_bins},
                   {"hog_cell", cfg.hog.cell_px},
                   {"hog_bins", cfg.hog.bins},
                   {"weight_by_score", cfg.weight_by_score}};
  doc["image_width"] = raw.image_width;
  doc["image_height"] = raw.image_height;
  json groups = json::array();
  for (const ColumnRange& g : raw.groups) {
    groups.push_back({{"layer", g.layer},
                      {"begin", static_cast<std::int64_t>(g.begin)},
                      {"end", static_cast<std::int64_t>(g.end)}});
  }
  doc["groups"] = groups;
  json rows = json::array();
  for (Eigen::Index r = 0; r < raw.values.rows(); ++r) {
    const RowMeta& meta = raw.rows[static_cast<std::size_t>(r)];
    json vals = json::array();
    for (Eigen::Index c = 0; c < raw.values.cols(); ++c) {
      vals.push_back(raw.values(r, c));
    }
    rows.push_back({{"image_id", meta.image_id},
                    {"object_id", meta.object_id},
                    {"category", meta.category.value},
                    {"pose_deg", meta.pose.degrees},
                    {"values", vals}});
  }
  doc["rows"] = rows;
  return doc;
}

RawFeatureMatrix feature_file_parse(const json& doc) {
  RawFeatureMatrix raw;
  raw.image_width = doc.at("image_width").get<int>();
  raw.image_height = doc.at("image_height").get<int>();
  for (const json& g : doc.at("groups")) {
    raw.groups.push_back({g.at("layer").get<int>(), g.at("begin").get<std::int64_t>(),
                          g.at("end").get<std::int64_t>()});
  }
  const json& rows = doc.at("rows");
  Eigen::Index cols = raw.groups.empty() ? 0 : raw.groups.back().end;
  raw.values.resize(static_cast<Eigen::Index>(rows.size()), cols);
  Eigen::Index r = 0;
  for (const json& row : rows) {
    RowMeta meta;
    meta.image_id = row.at("image_id").get<std::string>();
    meta.object_id = row.at("object_id").get<std::string>();
    meta.category = {row.at("category").get<int>()};
    meta.pose = {row.at("pose_deg").get<double>()};
    raw.rows.push_back(meta);
    const json& vals = row.at("values");
    if (static_cast<Eigen::Index>(vals.size()) != cols) {
      throw InputError("feature file: row dimension mismatch");
    }
    Eigen::Index c = 0;
    for (const json& v : vals) raw.values(r, c++) = v.get<double>();
    ++r;
  }
  return raw;
}

/// Raw features for a manifest, consulting the on-disk cache when a cache
/// directory is configured. Keyed by (dataset digest, feature-config digest).
RawFeatureMatrix features_for(const DatasetManifest& manifest, const FeatureConfig& cfg,
                              const std::string& cache_dir, int threads) {
  std::uint64_t dd = manifest_digest(manifest);
  fs::path cache_file;
  if (!cache_dir.empty()) {
    cache_file = fs::path(cache_dir) /
                 ("features_" + digest_hex(dd) + "_" + digest_hex(cfg.digest()) + ".json");
    if (fs::exists(cache_file)) {
      try {
        return feature_file_parse(load_json_file(cache_file.string()));
      } catch (const std::exception& e) {
        std::cerr << "warning: ignoring stale cache entry " << cache_file << ": "
                  << e.what() << "\n";
      }
    }
  }
  RawFeatureMatrix raw =
      assemble_raw_features(manifest.records, manifest.num_layers, cfg, threads);
  if (!cache_file.empty()) {
    fs::create_directories(cache_file.parent_path());
    std::ofstream out(cache_file, std::ios::binary);
    if (out) out << feature_file_json(raw, cfg, dd).dump() << "\n";
  }
  return raw;
}

// ---------------------------------------------------------------- synth ---

struct SynthOpts {
  std::string out = "dataset";
  std::vector<std::string> templates = {"cup", "shoe"};
  int objects = 5;
  double pose_step = 5.0;
  int width = 64;
  int height = 64;
  double elevation = 20.0;
  double px_per_mm = 0.85;
  double noise = -1.0;  // < 0 keeps template defaults
  int train_per_category = -1;
  std::uint64_t seed = 0;
  std::string config;
};

void apply_json(SynthOpts& o, const json& j) {
  if (j.contains("out")) o.out = j["out"];
  if (j.contains("templates")) o.templates = j["templates"].get<std::vector<std::string>>();
  if (j.contains("objects")) o.objects = j["objects"];
  if (j.contains("pose_step")) o.pose_step = j["pose_step"];
  if (j.contains("width")) o.width = j["width"];
  if (j.contains("height")) o.height = j["height"];
  if (j.contains("elevation")) o.elevation = j["elevation"];
  if (j.contains("px_per_mm")) o.px_per_mm = j["px_per_mm"];
  if (j.contains("noise")) o.noise = j["noise"];
  if (j.contains("train_per_category")) o.train_per_category = j["train_per_category"];
  if (j.contains("seed")) o.seed = j["seed"];
}

int run_synth(const SynthOpts& o) {
  std::vector<SyntheticObjectSpec> specs;
  for (const std::string& name : o.templates) {
    SyntheticObjectSpec spec = fs::exists(name) ? load_object_template(name)
                                                : make_builtin_template(name);
    spec.seed = derive_seed(o.seed, "template", fnv1a64(spec.template_id));
    if (o.noise >= 0.0) spec.noise_px = o.noise;
    specs.push_back(spec);
  }
  TurntableSpec tt;
  tt.poses_deg = TurntableSpec::full_turn(o.pose_step);
  tt.image_width = o.width;
  tt.image_height = o.height;
  tt.elevation_deg = o.elevation;
  tt.px_per_mm = o.px_per_mm;

  DatasetManifest manifest = generate_dataset(specs, o.objects, tt);
  if (o.train_per_category > 0) {
    manifest.split = make_object_split(manifest, o.train_per_category, o.seed);
    validate_manifest(manifest);
  }
  save_dataset(manifest, o.out);

  json resolved = {{"templates", o.templates}, {"objects", o.objects},
                   {"pose_step", o.pose_step}, {"width", o.width},
                   {"height", o.height},       {"elevation", o.elevation},
                   {"px_per_mm", o.px_per_mm}, {"noise", o.noise},
                   {"train_per_category", o.train_per_category}};
  write_run_manifest(o.out, "synth", o.seed, resolved);
  std::cout << "wrote " << manifest.records.size() << " records to " << o.out
            << " (digest " << digest_hex(manifest_digest(manifest)) << ")\n";
  return 0;
}

// --------------------------------------------------------------- detect ---

struct DetectOpts {
  std::vector<std::string> images;
  std::string out = "parts.jsonl";
  int orientations = 6;
  double threshold = 0.05;
  double nms_radius = 3.0;
  int category = 1;
  std::string config;
};

void apply_json(DetectOpts& o, const json& j) {
  if (j.contains("images")) o.images = j["images"].get<std::vector<std::string>>();
  if (j.contains("out")) o.out = j["out"];
  if (j.contains("orientations")) o.orientations = j["orientations"];
  if (j.contains("threshold")) o.threshold = j["threshold"];
  if (j.contains("nms_radius")) o.nms_radius = j["nms_radius"];
  if (j.contains("category")) o.category = j["category"];
}

int run_detect(const DetectOpts& o) {
  if (o.images.empty()) throw InputError("detect: no input images");
  EdgeDetectorConfig cfg;
  cfg.n_orientations = o.orientations;
  cfg.threshold = o.threshold;
  cfg.nms_radius = o.nms_radius;

  std::vector<std::string> paths;
  for (const std::string& entry : o.images) {
    if (fs::is_directory(entry)) {
      std::vector<std::string> found;
      for (const auto& file : fs::directory_iterator(entry)) {
        if (file.path().extension() == ".pgm") found.push_back(file.path().string());
      }
      std::sort(found.begin(), found.end());
      paths.insert(paths.end(), found.begin(), found.end());
    } else {
      paths.push_back(entry);
    }
  }
  if (paths.empty()) throw InputError("detect: no .pgm files found");

  std::vector<ImageRecord> records;
  for (const std::string& path : paths) {
    GrayImage img = read_pgm(path);
    std::string id = fs::path(path).stem().string();
    ImageRecord rec;
    rec.image_id = id;
    rec.object_id = id;
    rec.category = {o.category};
    rec.pose = {0.0};
    rec.image_width = img.width;
    rec.image_height = img.height;
    rec.parts_by_layer.push_back(detect_layer1(img, cfg, id));
    records.push_back(std::move(rec));
  }
  write_parts(records, o.out);

  json resolved = {{"images", o.images},       {"orientations", o.orientations},
                   {"threshold", o.threshold}, {"nms_radius", o.nms_radius},
                   {"category", o.category},   {"out", o.out}};
  write_run_manifest(fs::path(o.out).parent_path().empty()
                         ? fs::path(".")
                         : fs::path(o.out).parent_path(),
                     "detect", 0, resolved);
  std::size_t total = 0;
  for (const ImageRecord& r : records) total += r.parts_at(1).size();
  std::cout << "wrote " << total << " layer-1 parts from " << records.size()
            << " images to " << o.out << "\n";
  return 0;
}

// ------------------------------------------------------------- features ---

struct FeatureOpts {
  std::string manifest;
  std::string out = "features.json";
  double bin_size = 45.0;
  int grid_cells = 4;
  bool weight_by_score = false;
  std::string cache_dir;
  int threads = 0;
  std::string config;
};

void apply_json(FeatureOpts& o, const json& j) {
  if (j.contains("manifest")) o.manifest = j["manifest"];
  if (j.contains("out")) o.out = j["out"];
  if (j.contains("bin_size")) o.bin_size = j["bin_size"];
  if (j.contains("grid_cells")) o.grid_cells = j["grid_cells"];
  if (j.contains("weight_by_score")) o.weight_by_score = j["weight_by_score"];
  if (j.contains("cache_dir")) o.cache_dir = j["cache_dir"];
  if (j.contains("threads")) o.threads = j["threads"];
}

int run_features(const FeatureOpts& o) {
  if (o.manifest.empty()) throw InputError("features: --manifest is required");
  DatasetManifest manifest = load_dataset(o.manifest);
  FeatureConfig cfg = make_feature_config(o.bin_size, o.grid_cells, o.weight_by_score,
                                          manifest.records.front().image_width);
  RawFeatureMatrix raw = features_for(manifest, cfg, cache_directory(o.cache_dir),
                                      resolve_threads(o.threads));

  std::ofstream out(o.out, std::ios::binary);
  if (!out) throw InputError("features: cannot write " + o.out);
  out << feature_file_json(raw, cfg, manifest_digest(manifest)).dump() << "\n";

  json resolved = {{"manifest", o.manifest},   {"bin_size", o.bin_size},
                   {"grid_cells", o.grid_cells}, {"weight_by_score", o.weight_by_score},
                   {"out", o.out}};
  write_run_manifest(fs::path(o.out).parent_path().empty()
                         ? fs::path(".")
                         : fs::path(o.out).parent_path(),
                     "features", 0, resolved);
  std::cout << "wrote " << raw.values.rows() << " x " << raw.values.cols()
            << " feature matrix to " << o.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- train ---

struct TrainOpts2 {
  std::string manifest;
  std::string task = "pose";
  std::string out = "model.json";
  double bin_size = 45.0;
  int grid_cells = 4;
  bool weight_by_score = false;
  double alpha = 1e-4;
  double lambda = -1.0;  // < 0: use alpha * lambda_max
  double rho = 1.0;
  int max_iters = 1000;
  double tol = 1e-4;
  int inner_iters = 200;
  bool circular = false;
  bool search = false;  // greedy grid search over the full parameter grids
  std::string cache_dir;
  int threads = 0;
  std::uint64_t seed = 0;
  std::string config;
};

void apply_json(TrainOpts2& o, const json& j) {
  if (j.contains("manifest")) o.manifest = j["manifest"];
  if (j.contains("task")) o.task = j["task"];
  if (j.contains("out")) o.out = j["out"];
  if (j.contains("bin_size")) o.bin_size = j["bin_size"];
  if (j.contains("grid_cells")) o.grid_cells = j["grid_cells"];
  if (j.contains("weight_by_score")) o.weight_by_score = j["weight_by_score"];
  if (j.contains("alpha")) o.alpha = j["alpha"];
  if (j.contains("lambda")) o.lambda = j["lambda"];
  if (j.contains("rho")) o.rho = j["rho"];
  if (j.contains("max_iters")) o.max_iters = j["max_iters"];
  if (j.contains("tol")) o.tol = j["tol"];
  if (j.contains("inner_iters")) o.inner_iters = j["inner_iters"];
  if (j.contains("circular")) o.circular = j["circular"];
  if (j.contains("search")) o.search = j["search"];
  if (j.contains("cache_dir")) o.cache_dir = j["cache_dir"];
  if (j.contains("threads")) o.threads = j["threads"];
  if (j.contains("seed")) o.seed = j["seed"];
}

int run_train(const TrainOpts2& o) {
  if (o.manifest.empty()) throw InputError("train: --manifest is required");
  if (o.task != "pose" && o.task != "category") {
    throw InputError("train: --task must be pose or category");
  }
  DatasetManifest manifest = load_dataset(o.manifest);

  AdmmConfig admm;
  admm.rho = o.rho;
  admm.max_iters = o.max_iters;
  admm.tol_primal = admm.tol_dual = o.tol;
  admm.inner_iters = o.inner_iters;
  admm.alpha = o.alpha;
  admm.threads = resolve_threads(o.threads);

  double bin_size = o.bin_size;
  int grid_cells = o.grid_cells;
  if (o.search) {
    DatasetManifest train_only;
    train_only.num_layers = manifest.num_layers;
    train_only.categories = manifest.categories;
    for (const ImageRecord& r : manifest.records) {
      if (manifest.split.train_objects.empty() || manifest.split.is_train(r.object_id)) {
        train_only.records.push_back(r);
      }
    }
    GridSearchSpec grids;  // the full parameter grids
    GridSearchResult best = greedy_grid_search(
        train_only, o.task == "pose" ? TaskKind::kPose : TaskKind::kCategory, grids,
        admm, o.seed, admm.threads);
    bin_size = best.bin_size;
    grid_cells = best.grid_cells;
    admm.alpha = best.alpha;
    std::cout << "grid search selected bin_size=" << bin_size
              << " grid_cells=" << grid_cells << " alpha=" << admm.alpha << "\n";
  }

  FeatureConfig fcfg = make_feature_config(bin_size, grid_cells, o.weight_by_score,
                                           manifest.records.front().image_width);
  RawFeatureMatrix raw = features_for(manifest, fcfg, cache_directory(o.cache_dir),
                                      admm.threads);

  std::vector<Eigen::Index> train_rows;
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    if (manifest.split.train_objects.empty() ||
        manifest.split.is_train(raw.rows[i].object_id)) {
      train_rows.push_back(static_cast<Eigen::Index>(i));
    }
  }
  if (train_rows.empty()) throw InputError("train: the training split is empty");
  GroupedDesignMatrix design = standardize_design(raw, train_rows);

  TrainOptions opts;
  opts.admm = admm;
  if (o.lambda >= 0.0) opts.lambda = o.lambda;
  opts.circular = o.circular;

  Model model;
  if (o.task == "pose") {
    PoseModel m = train_pose_model(design, train_rows, opts);
    m.features = fcfg;
    model = std::move(m);
  } else {
    CategoryModel m = train_category_model(
        design, train_rows, static_cast<int>(manifest.categories.size()), opts);
    m.features = fcfg;
    model = std::move(m);
  }
  save_model_json(model, o.out);

  json resolved = {{"manifest", o.manifest}, {"task", o.task},
                   {"bin_size", bin_size},   {"grid_cells", grid_cells},
                   {"alpha", admm.alpha},    {"lambda", o.lambda},
                   {"rho", o.rho},           {"max_iters", o.max_iters},
                   {"tol", o.tol},           {"inner_iters", o.inner_iters},
                   {"circular", o.circular}, {"search", o.search},
                   {"out", o.out}};
  write_run_manifest(fs::path(o.out).parent_path().empty()
                         ? fs::path(".")
                         : fs::path(o.out).parent_path(),
                     "train", o.seed, resolved);
  std::cout << "wrote model to " << o.out << " (trained on " << train_rows.size()
            << " rows)\n";
  return 0;
}

// -------------------------------------------------------------- predict ---

struct PredictOpts {
  std::string model;
  std::string manifest;
  std::string parts;  // alternative to a manifest: a single part file
  std::string out = "predictions.csv";
  int threads = 0;
  std::string config;
};

void apply_json(PredictOpts& o, const json& j) {
  if (j.contains("model")) o.model = j["model"];
  if (j.contains("manifest")) o.manifest = j["manifest"];
  if (j.contains("parts")) o.parts = j["parts"];
  if (j.contains("out")) o.out = j["out"];
  if (j.contains("threads")) o.threads = j["threads"];
}

int run_predict(const PredictOpts& o) {
  if (o.model.empty()) throw InputError("predict: --model is required");
  if (o.manifest.empty() == o.parts.empty()) {
    throw InputError("predict: pass exactly one of --manifest or --parts");
  }
  Model model = load_model_json(o.model);

  DatasetManifest manifest;
  if (!o.manifest.empty()) {
    manifest = load_dataset(o.manifest);
  } else {
    manifest.records = read_parts(o.parts);
    manifest.num_layers = 0;
    int max_cat = 1;
    for (const ImageRecord& r : manifest.records) {
      manifest.num_layers = std::max(manifest.num_layers, r.num_layers());
      max_cat = std::max(max_cat, r.category.value);
    }
    manifest.categories.resize(static_cast<std::size_t>(max_cat), "unknown");
    validate_manifest(manifest);
  }

  const FeatureConfig& fcfg = std::holds_alternative<PoseModel>(model)
                                  ? std::get<PoseModel>(model).features
                                  : std::get<CategoryModel>(model).features;
  int model_layers = static_cast<int>(std::holds_alternative<PoseModel>(model)
                                          ? std::get<PoseModel>(model).groups.size()
                                          : std::get<CategoryModel>(model).groups.size());
  RawFeatureMatrix raw = assemble_raw_features(manifest.records, model_layers, fcfg,
                                               resolve_threads(o.threads));

  std::ofstream out(o.out, std::ios::binary);
  if (!out) throw InputError("predict: cannot write " + o.out);
  out << "image_id,object_id,truth,prediction\n";
  char buf[64];
  for (Eigen::Index r = 0; r < raw.values.rows(); ++r) {
    const RowMeta& meta = raw.rows[static_cast<std::size_t>(r)];
    out << meta.image_id << "," << meta.object_id << ",";
    if (std::holds_alternative<PoseModel>(model)) {
      const PoseModel& m = std::get<PoseModel>(model);
      double pred = wrap_degrees(
          predict_pose(m, m.standardize(raw.values.row(r).transpose())));
      std::snprintf(buf, sizeof(buf), "%.10g,%.10g", meta.pose.degrees, pred);
      out << buf << "\n";
    } else {
      const CategoryModel& m = std::get<CategoryModel>(model);
      CategoryLabel pred =
          predict_category(m, m.standardize(raw.values.row(r).transpose()));
      out << meta.category.value << "," << pred.value << "\n";
    }
  }
  out.close();

  json resolved = {{"model", o.model},
                   {"manifest", o.manifest},
                   {"parts", o.parts},
                   {"out", o.out}};
  write_run_manifest(fs::path(o.out).parent_path().empty()
                         ? fs::path(".")
                         : fs::path(o.out).parent_path(),
                     "predict", 0, resolved);
  std::cout << "wrote predictions for " << raw.values.rows() << " images to " << o.out
            << "\n";
  return 0;
}

// ----------------------------------------------------------------- eval ---

struct EvalOpts {
  std::string manifest;  // empty: the shipped synthetic benchmark
  std::string out_dir = "eval_out";
  std::string task = "pose";
  std::string protocol = "category-wise-balanced";
  std::vector<int> c_schedule;
  std::vector<int> n_train_schedule;
  int repeats = -1;
  std::vector<double> bin_sizes;
  std::vector<int> grid_cells;
  std::vector<double> alphas;
  bool squared_error = false;
  int threads = 0;
  std::uint64_t seed = 0;
  std::string config;
};

void apply_json(EvalOpts& o, const json& j) {
  if (j.contains("manifest")) o.manifest = j["manifest"];
  if (j.contains("out_dir")) o.out_dir = j["out_dir"];
  if (j.contains("task")) o.task = j["task"];
  if (j.contains("protocol")) o.protocol = j["protocol"];
  if (j.contains("c_schedule")) o.c_schedule = j["c_schedule"].get<std::vector<int>>();
  if (j.contains("n_train_schedule")) {
    o.n_train_schedule = j["n_train_schedule"].get<std::vector<int>>();
  }
  if (j.contains("repeats")) o.repeats = j["repeats"];
  if (j.contains("bin_sizes")) o.bin_sizes = j["bin_sizes"].get<std::vector<double>>();
  if (j.contains("grid_cells")) o.grid_cells = j["grid_cells"].get<std::vector<int>>();
  if (j.contains("alphas")) o.alphas = j["alphas"].get<std::vector<double>>();
  if (j.contains("squared_error")) o.squared_error = j["squared_error"];
  if (j.contains("threads")) o.threads = j["threads"];
  if (j.contains("seed")) o.seed = j["seed"];
}

int run_eval(const EvalOpts& o) {
  DatasetManifest manifest =
      o.manifest.empty() ? benchmark_dataset(o.seed) : load_dataset(o.manifest);

  ExperimentConfig cfg = benchmark_config(o.seed);
  cfg.task = o.task == "category" ? TaskKind::kCategory : TaskKind::kPose;
  if (o.protocol == "object-wise") {
    cfg.protocol = Protocol::kObjectWise;
  } else if (o.protocol == "category-wise-unbalanced") {
    cfg.protocol = Protocol::kCategoryWiseUnbalanced;
  } else if (o.protocol == "category-wise-balanced") {
    cfg.protocol = Protocol::kCategoryWiseBalanced;
  } else {
    throw InputError("eval: unknown protocol " + o.protocol);
  }
  if (!o.c_schedule.empty()) cfg.c_schedule = o.c_schedule;
  if (!o.n_train_schedule.empty()) cfg.n_train_schedule = o.n_train_schedule;
  if (o.repeats > 0) cfg.repeats = o.repeats;
  if (!o.bin_sizes.empty()) cfg.grids.bin_sizes = o.bin_sizes;
  if (!o.grid_cells.empty()) cfg.grids.grid_cells = o.grid_cells;
  if (!o.alphas.empty()) cfg.grids.alphas = o.alphas;
  if (o.squared_error) cfg.pose_error_kind = PoseErrorKind::kCircularSquared;
  cfg.threads = resolve_threads(o.threads);

  std::vector<Method> methods = Method::standard_set(manifest.num_layers);
  ResultTable table = run_experiment(manifest, cfg, methods);

  fs::create_directories(o.out_dir);
  write_result_csv(table, (fs::path(o.out_dir) / "results.csv").string());
  write_result_json(table, cfg, (fs::path(o.out_dir) / "results.json").string());
  write_bar_chart_svg(table, (fs::path(o.out_dir) / "results_bars.svg").string());
  write_trend_svg(table, (fs::path(o.out_dir) / "results_trend.svg").string());

  json resolved = {{"manifest", o.manifest},
                   {"task", o.task},
                   {"protocol", o.protocol},
                   {"c_schedule", cfg.c_schedule},
                   {"n_train_schedule", cfg.n_train_schedule},
                   {"repeats", cfg.repeats},
                   {"bin_sizes", cfg.grids.bin_sizes},
                   {"grid_cells", cfg.grids.grid_cells},
                   {"alphas", cfg.grids.alphas},
                   {"squared_error", o.squared_error}};
  write_run_manifest(o.out_dir, "eval", o.seed, resolved);

  std::size_t failed = 0;
  for (const ResultCell& c : table.cells) failed += c.failed ? 1 : 0;
  std::cout << "wrote " << table.cells.size() << " result cells (" << failed
            << " failed) to " << o.out_dir << " (digest "
            << digest_hex(table.digest()) << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered part features with layer-consensus sparse models for "
               "turntable pose estimation and categorization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion) + " (" + kGitDescribe + ")");

  json cfg_json;
  try {
    cfg_json = scan_config(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  SynthOpts synth;
  apply_json(synth, cfg_json);
  CLI::App* s = app.add_subcommand("synth", "Generate a synthetic turntable dataset");
  s->add_option("--out", synth.out, "Output dataset directory");
  s->add_option("--templates", synth.templates,
                "Built-in template names or template JSON paths");
  s->add_option("--objects", synth.objects, "Objects per category");
  s->add_option("--pose-step", synth.pose_step, "Turntable step, degrees");
  s->add_option("--width", synth.width, "Image width, px");
  s->add_option("--height", synth.height, "Image height, px");
  s->add_option("--elevation", synth.elevation, "Camera elevation, degrees");
  s->add_option("--px-per-mm", synth.px_per_mm, "Projection scale");
  s->add_option("--noise", synth.noise, "Positional jitter std, px");
  s->add_option("--train-per-category", synth.train_per_category,
                "Training objects per category in the recorded split");
  s->add_option("--seed", synth.seed, "Master seed");
  s->add_option("--config", synth.config, "JSON config (flags win)");

  DetectOpts detect;
  apply_json(detect, cfg_json);
  CLI::App* d = app.add_subcommand("detect", "Detect layer-1 parts in PGM images");
  d->add_option("--images", detect.images, "PGM files or directories");
  d->add_option("--out", detect.out, "Output part file (JSON Lines)");
  d->add_option("--orientations", detect.orientations, "Filter orientations");
  d->add_option("--threshold", detect.threshold, "Response threshold");
  d->add_option("--nms-radius", detect.nms_radius, "Suppression radius, px");
  d->add_option("--category", detect.category, "Category label for all images");
  d->add_option("--config", detect.config, "JSON config (flags win)");

  FeatureOpts features;
  apply_json(features, cfg_json);
  CLI::App* f = app.add_subcommand("features", "Extract the layer-blocked features");
  f->add_option("--manifest", features.manifest, "Dataset manifest JSON");
  f->add_option("--out", features.out, "Output feature file");
  f->add_option("--bin-size", features.bin_size, "Orientation bin size, degrees");
  f->add_option("--grid-cells", features.grid_cells, "Grid cells per axis (M)");
  f->add_flag("--weight-by-score", features.weight_by_score,
              "Weight histogram votes by part score");
  f->add_option("--cache-dir", features.cache_dir,
                "Feature cache directory (or PARTPOSE_CACHE_DIR)");
  f->add_option("--threads", features.threads, "Worker threads (0 = cores)");
  f->add_option("--config", features.config, "JSON config (flags win)");

  TrainOpts2 train;
  apply_json(train, cfg_json);
  CLI::App* t = app.add_subcommand("train", "Fit a pose or category model");
  t->add_option("--manifest", train.manifest, "Dataset manifest JSON");
  t->add_option("--task", train.task, "pose | category");
  t->add_option("--out", train.out, "Output model JSON");
  t->add_option("--bin-size", train.bin_size, "Orientation bin size, degrees");
  t->add_option("--grid-cells", train.grid_cells, "Grid cells per axis (M)");
  t->add_flag("--weight-by-score", train.weight_by_score,
              "Weight histogram votes by part score");
  t->add_option("--alpha", train.alpha, "lambda = alpha * lambda_max");
  t->add_option("--lambda", train.lambda, "Explicit lambda (overrides alpha)");
  t->add_option("--rho", train.rho, "Consensus penalty parameter");
  t->add_option("--max-iters", train.max_iters, "Outer iteration cap");
  t->add_option("--tol", train.tol, "Primal/dual residual tolerance");
  t->add_option("--inner-iters", train.inner_iters, "Per-block iteration budget");
  t->add_flag("--circular", train.circular, "Fit sine/cosine pose targets");
  t->add_flag("--search", train.search, "Greedy grid search on the training split");
  t->add_option("--cache-dir", train.cache_dir, "Feature cache directory");
  t->add_option("--threads", train.threads, "Worker threads (0 = cores)");
  t->add_option("--seed", train.seed, "Seed for the grid-search folds");
  t->add_option("--config", train.config, "JSON config (flags win)");

  PredictOpts predict;
  apply_json(predict, cfg_json);
  CLI::App* p = app.add_subcommand("predict", "Apply a model to part realizations");
  p->add_option("--model", predict.model, "Model JSON");
  p->add_option("--manifest", predict.manifest, "Dataset manifest JSON");
  p->add_option("--parts", predict.parts, "Part file (JSON Lines)");
  p->add_option("--out", predict.out, "Output predictions CSV");
  p->add_option("--threads", predict.threads, "Worker threads (0 = cores)");
  p->add_option("--config", predict.config, "JSON config (flags win)");

  EvalOpts eval;
  apply_json(eval, cfg_json);
  CLI::App* e = app.add_subcommand("eval", "Run an experiment protocol");
  e->add_option("--manifest", eval.manifest,
                "Dataset manifest (default: built-in synthetic benchmark)");
  e->add_option("--out-dir", eval.out_dir, "Output directory");
  e->add_option("--task", eval.task, "pose | category");
  e->add_option("--protocol", eval.protocol,
                "object-wise | category-wise-balanced | category-wise-unbalanced");
  e->add_option("--c-schedule", eval.c_schedule, "Category counts");
  e->add_option("--n-train-schedule", eval.n_train_schedule,
                "Training objects per category");
  e->add_option("--repeats", eval.repeats, "Random selections per cell");
  e->add_option("--bin-sizes", eval.bin_sizes, "Bin-size grid, degrees");
  e->add_option("--grid-cells", eval.grid_cells, "Grid-cells grid");
  e->add_option("--alphas", eval.alphas, "Alpha grid");
  e->add_flag("--squared-error", eval.squared_error, "Report squared pose error");
  e->add_option("--threads", eval.threads, "Worker threads (0 = cores)");
  e->add_option("--seed", eval.seed, "Master seed");
  e->add_option("--config", eval.config, "JSON config (flags win)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);  // help to stdout, exit 0
  } catch (const CLI::CallForVersion& version) {
    return app.exit(version);
  } catch (const CLI::ParseError& pe) {
    std::cerr << pe.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }

  try {
    if (s->parsed()) return run_synth(synth);
    if (d->parsed()) return run_detect(detect);
    if (f->parsed()) return run_features(features);
    if (t->parsed()) return run_train(train);
    if (p->parsed()) return run_predict(predict);
    if (e->parsed()) return run_eval(eval);
  } catch (const InputError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return 1;
  } catch (const SolverError& err) {
    std::cerr << "solver error: " << err.what() << "\n";
    return 2;
  } catch (const NumericalError& err) {
    std::cerr << "numerical error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
