#include "partpose/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "partpose/digest.hpp"
#include "partpose/errors.hpp"
#include "partpose/rng.hpp"

namespace partpose {

namespace {

using nlohmann::json;

std::string fmt(const char* f, double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

}  // namespace

double pose_error(PoseLabel truth, double predicted_deg, PoseErrorKind kind) {
  double d = wrap_degrees(truth.degrees - predicted_deg);
  double err = std::min(d, 360.0 - d);
  return kind == PoseErrorKind::kCircularAbsolute ? err : err * err;
}

double accuracy(std::span<const CategoryLabel> predicted,
                std::span<const CategoryLabel> truth) {
  if (predicted.empty() || predicted.size() != truth.size()) {
    throw InputError("accuracy: empty or mismatched inputs");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i].value == truth[i].value) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(predicted.size());
}

std::string Method::name() const {
  switch (kind) {
    case kProposed:
      return "proposed";
    case kSingleLayer:
      return "layer" + std::to_string(layer) + "-only";
    case kHogOnly:
      return "hog-only";
  }
  return "unknown";
}

std::vector<Method> Method::standard_set(int num_layers) {
  std::vector<Method> methods{proposed()};
  for (int l = 1; l <= num_layers; ++l) methods.push_back(single_layer(l));
  methods.push_back(hog_only());
  return methods;
}

namespace {

FeatureConfig make_feature_config(double bin_size, int grid_cells, int image_width) {
  return FeatureConfig::derived(HopConfig::from_bin_size(bin_size, grid_cells),
                                image_width);
}

RawFeatureMatrix subset_rows_raw(const RawFeatureMatrix& raw,
                                 const std::vector<Eigen::Index>& rows) {
  RawFeatureMatrix out;
  out.groups = raw.groups;
  out.image_width = raw.image_width;
  out.image_height = raw.image_height;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), raw.values.cols());
  out.rows.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) = raw.values.row(rows[i]);
    out.rows.push_back(raw.rows[static_cast<std::size_t>(rows[i])]);
  }
  return out;
}

/// Column restriction for a method; proposed keeps the layer groups, the
/// other methods return their column span as one group.
RawFeatureMatrix restrict_columns(const RawFeatureMatrix& raw, const Method& method,
                                  const FeatureConfig& fcfg) {
  if (method.kind == Method::kProposed) return raw;

  Eigen::Index begin = 0, size = 0;
  if (method.kind == Method::kSingleLayer) {
    auto it = std::find_if(raw.groups.begin(), raw.groups.end(),
                           [&](const ColumnRange& g) { return g.layer == method.layer; });
    if (it == raw.groups.end()) {
      throw InputError("method " + method.name() + ": no such layer in the design");
    }
    begin = it->begin;
    size = it->size();
  } else {  // kHogOnly: the HOG span of layer 1
    Eigen::Index hop_dim = fcfg.hop.dim();
    Eigen::Index hog_dim = fcfg.hog.dim(raw.image_width, raw.image_height);
    begin = raw.groups.front().begin + hop_dim;
    size = hog_dim;
  }

  RawFeatureMatrix out;
  out.values = raw.values.middleCols(begin, size);
  out.groups.push_back({method.kind == Method::kSingleLayer ? method.layer : 1, 0, size});
  out.rows = raw.rows;
  out.image_width = raw.image_width;
  out.image_height = raw.image_height;
  return out;
}

std::vector<ColumnRange> singleton_groups(Eigen::Index cols) {
  std::vector<ColumnRange> groups;
  groups.reserve(static_cast<std::size_t>(cols));
  for (Eigen::Index c = 0; c < cols; ++c) groups.push_back({1, c, c + 1});
  return groups;
}

double evaluate_split(const RawFeatureMatrix& cell_raw, const SplitSpec& split,
                      TaskKind task, int num_classes, const Method& method,
                      const FeatureConfig& fcfg, const AdmmConfig& admm,
                      PoseErrorKind pek) {
  RawFeatureMatrix restricted = restrict_columns(cell_raw, method, fcfg);
  // Non-grouped regression baselines are plain lasso: one group per column.
  if (task == TaskKind::kPose && method.kind != Method::kProposed) {
    restricted.groups = singleton_groups(restricted.values.cols());
  }

  std::vector<Eigen::Index> train, test;
  for (std::size_t i = 0; i < restricted.rows.size(); ++i) {
    const std::string& obj = restricted.rows[i].object_id;
    if (split.is_train(obj)) train.push_back(static_cast<Eigen::Index>(i));
    if (split.is_test(obj)) test.push_back(static_cast<Eigen::Index>(i));
  }
  if (train.empty() || test.empty()) {
    throw InputError("evaluate_split: empty train or test set");
  }

  GroupedDesignMatrix design = standardize_design(restricted, train);
  TrainOptions opts;
  opts.admm = admm;

  if (task == TaskKind::kPose) {
    PoseModel model = train_pose_model(design, train, opts);
    double total = 0.0;
    for (Eigen::Index r : test) {
      double predicted = predict_pose(model, design.values.row(r).transpose());
      total += pose_error(design.rows[static_cast<std::size_t>(r)].pose, predicted, pek);
    }
    return total / static_cast<double>(test.size());
  }

  CategoryModel model = train_category_model(design, train, num_classes, opts);
  std::vector<CategoryLabel> predicted, truth;
  predicted.reserve(test.size());
  truth.reserve(test.size());
  for (Eigen::Index r : test) {
    predicted.push_back(predict_category(model, design.values.row(r).transpose()));
    truth.push_back(design.rows[static_cast<std::size_t>(r)].category);
  }
  return accuracy(predicted, truth);
}

/// Raw features for the whole manifest, one entry per feature config.
class FeatureCache {
public:
  FeatureCache(const DatasetManifest& manifest, int threads)
      : manifest_(manifest), threads_(threads) {}

  const RawFeatureMatrix& get(const FeatureConfig& cfg) {
    std::uint64_t key = cfg.digest();
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    RawFeatureMatrix raw = assemble_raw_features(manifest_.records,
                                                 manifest_.num_layers, cfg, threads_);
    return cache_.emplace(key, std::move(raw)).first->second;
  }

private:
  const DatasetManifest& manifest_;
  int threads_;
  std::map<std::uint64_t, RawFeatureMatrix> cache_;
};

std::vector<std::string> sorted_objects(const DatasetManifest& manifest) {
  std::set<std::string> ids;
  for (const ImageRecord& r : manifest.records) ids.insert(r.object_id);
  return {ids.begin(), ids.end()};
}

std::map<int, std::vector<std::string>> category_objects(const DatasetManifest& m) {
  std::map<int, std::vector<std::string>> out;
  for (const ImageRecord& r : m.records) {
    std::vector<std::string>& v = out[r.category.value];
    if (std::find(v.begin(), v.end(), r.object_id) == v.end()) v.push_back(r.object_id);
  }
  return out;
}

}  // namespace

GridSearchResult greedy_grid_search(const DatasetManifest& train_manifest,
                                    TaskKind task, const GridSearchSpec& grids,
                                    const AdmmConfig& admm, std::uint64_t seed,
                                    int threads) {
  if (grids.bin_sizes.empty() || grids.grid_cells.empty() || grids.alphas.empty()) {
    throw InputError("greedy_grid_search: empty grid");
  }

  std::vector<double> bin_sizes = grids.bin_sizes;
  std::vector<int> cells = grids.grid_cells;
  std::vector<double> alphas = grids.alphas;
  std::sort(bin_sizes.begin(), bin_sizes.end());
  std::sort(cells.begin(), cells.end());
  std::sort(alphas.begin(), alphas.end());

  auto median = [](const auto& v) { return v[(v.size() - 1) / 2]; };

  GridSearchResult result;
  result.bin_size = bin_sizes.front();
  result.grid_cells = median(cells);
  result.alpha = median(alphas);
  if (grids.single_point()) {
    result.bin_size = bin_sizes[0];
    result.grid_cells = cells[0];
    result.alpha = alphas[0];
    return result;  // nothing to search
  }

  // Object-wise folds: 3-fold when every fold holds >= 2 objects, otherwise
  // leave-one-object-out; a lone object validates on itself.
  std::vector<std::string> objects = sorted_objects(train_manifest);
  Rng rng(derive_seed(seed, "cv", 0));
  for (std::size_t i = objects.size(); i > 1; --i) {
    std::swap(objects[i - 1], objects[rng.below(i)]);
  }
  std::size_t num_folds = objects.size() / 3 >= 2 ? 3 : objects.size();
  if (num_folds == 0) num_folds = 1;
  std::vector<std::vector<std::string>> folds(num_folds);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    folds[i % num_folds].push_back(objects[i]);
  }

  FeatureCache cache(train_manifest, threads);
  std::vector<Eigen::Index> all_rows(train_manifest.records.size());
  for (std::size_t i = 0; i < all_rows.size(); ++i) {
    all_rows[i] = static_cast<Eigen::Index>(i);
  }
  int num_classes = static_cast<int>(train_manifest.categories.size());

  auto cv_error = [&](double bin_size, int grid_cells, double alpha) {
    FeatureConfig fcfg =
        make_feature_config(bin_size, grid_cells,
                            train_manifest.records.front().image_width);
    const RawFeatureMatrix& raw = cache.get(fcfg);
    AdmmConfig cfg = admm;
    cfg.alpha = alpha;
    cfg.threads = threads;

    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      SplitSpec split;
      split.test_objects = folds[f];
      if (objects.size() == 1) {
        split.train_objects = folds[f];  // apparent error, single object
      } else {
        for (std::size_t g = 0; g < folds.size(); ++g) {
          if (g == f) continue;
          split.train_objects.insert(split.train_objects.end(), folds[g].begin(),
                                     folds[g].end());
        }
      }
      double metric = evaluate_split(raw, split, task, num_classes,
                                     Method::proposed(), fcfg, cfg,
                                     PoseErrorKind::kCircularAbsolute);
      total += task == TaskKind::kPose ? metric : 100.0 - metric;
      ++counted;
    }
    return total / static_cast<double>(counted);
  };

  auto sweep = [&](auto& chosen, const auto& grid, auto probe) {
    if (grid.size() <= 1) {
      if (!grid.empty()) chosen = grid[0];
      return;
    }
    double best = std::numeric_limits<double>::infinity();
    auto best_value = grid[0];
    for (const auto& g : grid) {
      double err = probe(g);
      if (err < best) {  // strict: ties keep the smaller parameter
        best = err;
        best_value = g;
      }
    }
    chosen = best_value;
  };

  sweep(result.bin_size, bin_sizes, [&](double b) {
    double err = cv_error(b, result.grid_cells, result.alpha);
    result.trace.push_back({b, result.grid_cells, result.alpha, err});
    return err;
  });
  sweep(result.grid_cells, cells, [&](int m) {
    double err = cv_error(result.bin_size, m, result.alpha);
    result.trace.push_back({result.bin_size, m, result.alpha, err});
    return err;
  });
  sweep(result.alpha, alphas, [&](double a) {
    double err = cv_error(result.bin_size, result.grid_cells, a);
    result.trace.push_back({result.bin_size, result.grid_cells, a, err});
    return err;
  });
  return result;
}

std::uint64_t ResultTable::digest() const {
  std::string buf;
  for (const ResultCell& c : cells) {
    buf += c.protocol + "," + std::to_string(c.num_categories) + "," +
           std::to_string(c.n_train) + "," + c.method + "," +
           std::to_string(c.repeat) + "," + c.metric + "," +
           (c.failed ? "failed:" + c.reason : fmt("%.17g", c.value)) + "\n";
  }
  return fnv1a64(buf);
}

double ResultTable::mean(const std::string& method, int num_categories, int n_train,
                         const std::string& metric) const {
  double total = 0.0;
  std::size_t count = 0;
  for (const ResultCell& c : cells) {
    if (c.failed || c.method != method || c.num_categories != num_categories ||
        c.n_train != n_train || c.metric != metric) {
      continue;
    }
    total += c.value;
    ++count;
  }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : total / static_cast<double>(count);
}

ResultTable run_experiment(const DatasetManifest& manifest,
                           const ExperimentConfig& cfg,
                           std::span<const Method> methods) {
  if (methods.empty()) throw InputError("run_experiment: no methods");
  if (cfg.repeats < 1) throw InputError("run_experiment: repeats < 1");
  validate_manifest(manifest);

  const std::string protocol_name =
      cfg.protocol == Protocol::kObjectWise          ? "object-wise"
      : cfg.protocol == Protocol::kCategoryWiseBalanced ? "category-wise-balanced"
                                                        : "category-wise-unbalanced";
  const std::string metric_name =
      cfg.task == TaskKind::kPose ? "pose_error_deg" : "accuracy_pct";

  if (cfg.protocol == Protocol::kObjectWise && cfg.task == TaskKind::kCategory) {
    throw InputError("run_experiment: the object-wise protocol is pose-only");
  }

  // Object counts must cover the schedule before any training starts.
  auto by_category = category_objects(manifest);
  int needed = cfg.protocol == Protocol::kCategoryWiseUnbalanced
                   ? 2
                   : *std::max_element(cfg.n_train_schedule.begin(),
                                       cfg.n_train_schedule.end()) +
                         cfg.n_test_per_category;
  for (const auto& [cat, ids] : by_category) {
    if (static_cast<int>(ids.size()) < needed) {
      throw InputError("run_experiment: category " + std::to_string(cat) + " has " +
                       std::to_string(ids.size()) + " objects, needs " +
                       std::to_string(needed));
    }
  }
  for (int c : cfg.c_schedule) {
    if (c < 1 || c > static_cast<int>(manifest.categories.size())) {
      throw InputError("run_experiment: category count " + std::to_string(c) +
                       " out of range");
    }
  }

  FeatureCache cache(manifest, cfg.threads);
  ResultTable table;

  auto run_cell = [&](int c_value, int n_train_value, int repeat,
                      const std::vector<Eigen::Index>& rows, const SplitSpec& split,
                      int num_classes) {
    // Hyperparameters from the training side of this cell.
    GridSearchResult params;
    if (cfg.grids.single_point()) {
      params.bin_size = cfg.grids.bin_sizes[0];
      params.grid_cells = cfg.grids.grid_cells[0];
      params.alpha = cfg.grids.alphas[0];
    } else {
      DatasetManifest train_only;
      train_only.num_layers = manifest.num_layers;
      train_only.categories = manifest.categories;
      for (Eigen::Index r : rows) {
        const ImageRecord& rec = manifest.records[static_cast<std::size_t>(r)];
        if (split.is_train(rec.object_id)) train_only.records.push_back(rec);
      }
      params = greedy_grid_search(train_only, cfg.task, cfg.grids, cfg.admm,
                                  derive_seed(cfg.seed, "grid",
                                              static_cast<std::uint64_t>(repeat)),
                                  cfg.threads);
    }
    FeatureConfig fcfg = make_feature_config(params.bin_size, params.grid_cells,
                                             manifest.records.front().image_width);
    RawFeatureMatrix cell_raw = subset_rows_raw(cache.get(fcfg), rows);
    AdmmConfig admm = cfg.admm;
    admm.alpha = params.alpha;
    admm.threads = cfg.threads;

    for (const Method& method : methods) {
      ResultCell cell;
      cell.protocol = protocol_name;
      cell.num_categories = c_value;
      cell.n_train = n_train_value;
      cell.method = method.name();
      cell.repeat = repeat;
      cell.metric = metric_name;
      try {
        cell.value = evaluate_split(cell_raw, split, cfg.task, num_classes, method,
                                    fcfg, admm, cfg.pose_error_kind);
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.reason = e.what();
        cell.value = std::numeric_limits<double>::quiet_NaN();
      }
      table.cells.push_back(std::move(cell));
    }
  };

  if (cfg.protocol == Protocol::kObjectWise) {
    // One schedule entry per category; the C column carries the category
    // index for this protocol.
    for (const auto& [cat, ids] : by_category) {
      std::vector<Eigen::Index> rows;
      for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        if (manifest.records[i].category.value == cat) {
          rows.push_back(static_cast<Eigen::Index>(i));
        }
      }
      for (int n_train : cfg.n_train_schedule) {
        for (int rep = 0; rep < cfg.repeats; ++rep) {
          std::uint64_t cell_seed = derive_seed(
              cfg.seed, "cell",
              fnv1a64("ow," + std::to_string(cat) + "," + std::to_string(n_train) +
                      "," + std::to_string(rep)));
          SplitSpec split = make_object_split(manifest, n_train, cell_seed);
          run_cell(cat, n_train, rep, rows, split, 2);
        }
      }
    }
    return table;
  }

  for (int c : cfg.c_schedule) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
      if (manifest.records[i].category.value <= c) {
        rows.push_back(static_cast<Eigen::Index>(i));
      }
    }
    if (cfg.protocol == Protocol::kCategoryWiseUnbalanced) {
      for (int rep = 0; rep < cfg.repeats; ++rep) {
        std::uint64_t cell_seed = derive_seed(
            cfg.seed, "cell",
            fnv1a64("ub," + std::to_string(c) + "," + std::to_string(rep)));
        SplitSpec split = make_unbalanced_split(manifest, cell_seed);
        run_cell(c, -1, rep, rows, split, c);
      }
      continue;
    }
    for (int n_train : cfg.n_train_schedule) {
      for (int rep = 0; rep < cfg.repeats; ++rep) {
        std::uint64_t cell_seed = derive_seed(
            cfg.seed, "cell",
            fnv1a64("cb," + std::to_string(c) + "," + std::to_string(n_train) + "," +
                    std::to_string(rep)));
        SplitSpec split = make_object_split(manifest, n_train, cell_seed);
        run_cell(c, n_train, rep, rows, split, c);
      }
    }
  }
  return table;
}

void write_result_csv(const ResultTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("write_result_csv: cannot write " + path);
  out << "protocol,C,n_train,method,repeat,metric,value\n";
  for (const ResultCell& c : table.cells) {
    out << c.protocol << "," << c.num_categories << "," << c.n_train << ","
        << c.method << "," << c.repeat << "," << c.metric << ","
        << (c.failed ? "" : fmt("%.10g", c.value)) << "\n";
  }
  // Mean rows per (protocol, C, n_train, method, metric), first-seen order.
  std::vector<std::string> seen;
  for (const ResultCell& c : table.cells) {
    std::string key = c.protocol + "," + std::to_string(c.num_categories) + "," +
                      std::to_string(c.n_train) + "," + c.method + "," + c.metric;
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    double total = 0.0;
    std::size_t n = 0;
    for (const ResultCell& d : table.cells) {
      if (d.failed || d.protocol != c.protocol ||
          d.num_categories != c.num_categories || d.n_train != c.n_train ||
          d.method != c.method || d.metric != c.metric) {
        continue;
      }
      total += d.value;
      ++n;
    }
    out << c.protocol << "," << c.num_categories << "," << c.n_train << ","
        << c.method << ",mean," << c.metric << ","
        << (n == 0 ? "" : fmt("%.10g", total / static_cast<double>(n))) << "\n";
  }
}

void write_result_json(const ResultTable& table, const ExperimentConfig& cfg,
                       const std::string& path) {
  json doc;
  doc["config"] = {
      {"protocol", cfg.protocol == Protocol::kObjectWise ? "object-wise"
                   : cfg.protocol == Protocol::kCategoryWiseBalanced
                       ? "category-wise-balanced"
                       : "category-wise-unbalanced"},
      {"task", cfg.task == TaskKind::kPose ? "pose" : "category"},
      {"c_schedule", cfg.c_schedule},
      {"n_train_schedule", cfg.n_train_schedule},
      {"n_test_per_category", cfg.n_test_per_category},
      {"repeats", cfg.repeats},
      {"seed", cfg.seed},
      {"grids",
       {{"bin_sizes", cfg.grids.bin_sizes},
        {"grid_cells", cfg.grids.grid_cells},
        {"alphas", cfg.grids.alphas}}},
  };
  json cells = json::array();
  for (const ResultCell& c : table.cells) {
    json cell = {{"protocol", c.protocol}, {"C", c.num_categories},
                 {"n_train", c.n_train},   {"method", c.method},
                 {"repeat", c.repeat},     {"metric", c.metric}};
    if (c.failed) {
      cell["value"] = nullptr;
      cell["reason"] = c.reason;
    } else {
      cell["value"] = c.value;
    }
    cells.push_back(cell);
  }
  doc["cells"] = cells;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("write_result_json: cannot write " + path);
  out << doc.dump(2) << "\n";
}

namespace {

const char* kPalette[] = {"#4878a8", "#e1812c", "#3a923a", "#c03d3e",
                          "#9372b2", "#846c5b", "#d684bd", "#7f7f7f"};

struct SeriesData {
  std::vector<std::string> methods;       // first-seen order
  std::vector<int> keys;                  // sorted group keys (C or n_train)
  std::map<std::pair<std::string, int>, std::pair<double, std::size_t>> sums;
  std::string metric;

  double value(const std::string& m, int k) const {
    auto it = sums.find({m, k});
    if (it == sums.end() || it->second.second == 0) return 0.0;
    return it->second.first / static_cast<double>(it->second.second);
  }
  double max_value() const {
    double best = 1e-9;
    for (const std::string& m : methods) {
      for (int k : keys) best = std::max(best, value(m, k));
    }
    return best;
  }
};

SeriesData collect(const ResultTable& table, bool key_is_ntrain) {
  SeriesData s;
  std::set<int> keys;
  for (const ResultCell& c : table.cells) {
    if (c.failed) continue;
    if (s.metric.empty()) s.metric = c.metric;
    int key = key_is_ntrain ? c.n_train : c.num_categories;
    keys.insert(key);
    if (std::find(s.methods.begin(), s.methods.end(), c.method) == s.methods.end()) {
      s.methods.push_back(c.method);
    }
    auto& slot = s.sums[{c.method, key}];
    slot.first += c.value;
    slot.second += 1;
  }
  s.keys.assign(keys.begin(), keys.end());
  return s;
}

void svg_header(std::ofstream& out, int w, int h) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
      << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
      << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
}

void svg_legend(std::ofstream& out, const std::vector<std::string>& methods, int x, int y) {
  for (std::size_t m = 0; m < methods.size(); ++m) {
    int yy = y + static_cast<int>(m) * 18;
    out << "<rect x=\"" << x << "\" y=\"" << yy << "\" width=\"12\" height=\"12\" fill=\""
        << kPalette[m % 8] << "\"/>\n"
        << "<text x=\"" << x + 16 << "\" y=\"" << yy + 10
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << methods[m]
        << "</text>\n";
  }
}

}  // namespace

void write_bar_chart_svg(const ResultTable& table, const std::string& path) {
  SeriesData s = collect(table, /*key_is_ntrain=*/false);
  const int width = 720, height = 400, left = 60, bottom = 350, top = 30;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("write_bar_chart_svg: cannot write " + path);
  svg_header(out, width, height);

  if (!s.keys.empty()) {
    double maxv = s.max_value() * 1.15;
    int plot_w = 500;
    double group_w = static_cast<double>(plot_w) / static_cast<double>(s.keys.size());
    double bar_w = group_w / static_cast<double>(s.methods.size() + 1);
    for (std::size_t k = 0; k < s.keys.size(); ++k) {
      double gx = left + group_w * static_cast<double>(k);
      for (std::size_t m = 0; m < s.methods.size(); ++m) {
        double v = s.value(s.methods[m], s.keys[k]);
        double bh = (bottom - top) * v / maxv;
        out << "<rect x=\"" << fmt("%.2f", gx + bar_w * static_cast<double>(m))
            << "\" y=\"" << fmt("%.2f", bottom - bh) << "\" width=\""
            << fmt("%.2f", bar_w * 0.9) << "\" height=\"" << fmt("%.2f", bh)
            << "\" fill=\"" << kPalette[m % 8] << "\"/>\n";
      }
      out << "<text x=\"" << fmt("%.2f", gx + group_w / 2 - 14) << "\" y=\""
          << bottom + 16 << "\" font-size=\"11\" font-family=\"sans-serif\">C="
          << s.keys[k] << "</text>\n";
    }
    out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << left + plot_w
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n"
        << "<text x=\"10\" y=\"" << top - 10
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << s.metric << "</text>\n";
    svg_legend(out, s.methods, left + plot_w + 20, top);
  }
  out << "</svg>\n";
}

void write_trend_svg(const ResultTable& table, const std::string& path) {
  SeriesData s = collect(table, /*key_is_ntrain=*/true);
  const int width = 720, height = 400, left = 60, right = 560, bottom = 350, top = 30;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("write_trend_svg: cannot write " + path);
  svg_header(out, width, height);

  if (!s.keys.empty()) {
    double maxv = s.max_value() * 1.15;
    auto x_of = [&](std::size_t k) {
      if (s.keys.size() == 1) return (left + right) / 2.0;
      return left + (right - left) * static_cast<double>(k) /
                        static_cast<double>(s.keys.size() - 1);
    };
    auto y_of = [&](double v) { return bottom - (bottom - top) * v / maxv; };
    for (std::size_t m = 0; m < s.methods.size(); ++m) {
      out << "<polyline fill=\"none\" stroke=\"" << kPalette[m % 8]
          << "\" stroke-width=\"2\" points=\"";
      for (std::size_t k = 0; k < s.keys.size(); ++k) {
        out << fmt("%.2f", x_of(k)) << "," << fmt("%.2f", y_of(s.value(s.methods[m], s.keys[k]))) << " ";
      }
      out << "\"/>\n";
      for (std::size_t k = 0; k < s.keys.size(); ++k) {
        out << "<circle cx=\"" << fmt("%.2f", x_of(k)) << "\" cy=\""
            << fmt("%.2f", y_of(s.value(s.methods[m], s.keys[k])))
            << "\" r=\"3\" fill=\"" << kPalette[m % 8] << "\"/>\n";
      }
    }
    for (std::size_t k = 0; k < s.keys.size(); ++k) {
      out << "<text x=\"" << fmt("%.2f", x_of(k) - 8) << "\" y=\"" << bottom + 16
          << "\" font-size=\"11\" font-family=\"sans-serif\">n=" << s.keys[k]
          << "</text>\n";
    }
    out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n"
        << "<text x=\"10\" y=\"" << top - 10
        << "\" font-size=\"12\" font-family=\"sans-serif\">" << s.metric << "</text>\n";
    svg_legend(out, s.methods, right + 20, top);
  }
  out << "</svg>\n";
}

DatasetManifest benchmark_dataset(std::uint64_t seed) {
  std::vector<SyntheticObjectSpec> templates;
  for (const std::string& name : {std::string("cup"), std::string("shoe")}) {
    SyntheticObjectSpec t = make_builtin_template(name);
    t.seed = derive_seed(seed, "benchmark-template", fnv1a64(name));
    templates.push_back(t);
  }
  return generate_dataset(templates, 5, TurntableSpec::defaults());
}

ExperimentConfig benchmark_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.protocol = Protocol::kCategoryWiseBalanced;
  cfg.task = TaskKind::kPose;
  cfg.c_schedule = {2};
  cfg.n_train_schedule = {1, 2, 3, 4};
  cfg.n_test_per_category = 1;
  cfg.repeats = 2;
  cfg.grids.bin_sizes = {45.0};
  cfg.grids.grid_cells = {4};
  cfg.grids.alphas = {0.1};
  cfg.admm.max_iters = 400;
  cfg.admm.inner_iters = 150;
  cfg.seed = seed;
  return cfg;
}

}  // namespace partpose
