#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "partpose/dataset_io.hpp"
#include "partpose/digest.hpp"
#include "partpose/errors.hpp"
#include "partpose/synth.hpp"

using namespace partpose;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("partpose_io_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

bool records_equal(const std::vector<ImageRecord>& a, const std::vector<ImageRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const ImageRecord& x = a[i];
    const ImageRecord& y = b[i];
    if (x.image_id != y.image_id || x.object_id != y.object_id ||
        x.category.value != y.category.value || x.pose.degrees != y.pose.degrees ||
        x.image_width != y.image_width || x.image_height != y.image_height ||
        x.num_layers() != y.num_layers()) {
      return false;
    }
    for (int l = 1; l <= x.num_layers(); ++l) {
      const auto& px = x.parts_at(l);
      const auto& py = y.parts_at(l);
      if (px.size() != py.size()) return false;
      for (std::size_t k = 0; k < px.size(); ++k) {
        if (px[k].part_id != py[k].part_id || px[k].x != py[k].x ||
            px[k].y != py[k].y || px[k].score != py[k].score) {
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("an empty part file reads as an empty record list") {
  TempDir tmp;
  std::string path = (tmp.path / "empty.jsonl").string();
  std::ofstream(path).close();
  CHECK(read_parts(path).empty());
}

TEST_CASE("part files round trip field-exact") {
  TempDir tmp;
  std::vector<SyntheticObjectSpec> cats{make_builtin_template("cup")};
  TurntableSpec tt = TurntableSpec::defaults();
  tt.poses_deg = {0.0, 120.0, 240.0};
  DatasetManifest m = generate_dataset(cats, 1, tt);
  REQUIRE(m.records.size() == 3);

  std::string path = (tmp.path / "parts.jsonl").string();
  write_parts(m.records, path);
  std::vector<ImageRecord> back = read_parts(path);
  CHECK(records_equal(m.records, back));

  // A second write of the re-read records is byte-identical.
  std::string path2 = (tmp.path / "parts2.jsonl").string();
  write_parts(back, path2);
  CHECK(file_digest(path) == file_digest(path2));
}

TEST_CASE("layer zero is rejected with a line number") {
  TempDir tmp;
  std::string path = (tmp.path / "bad.jsonl").string();
  {
    std::ofstream out(path);
    out << R"({"image_id":"a","object_id":"o","category":1,"pose_deg":0,"layer":1,"part_id":0,"x":1,"y":2,"score":1,"img_w":8,"img_h":8})"
        << "\n";
    out << R"({"image_id":"a","object_id":"o","category":1,"pose_deg":0,"layer":0,"part_id":1,"x":1,"y":2,"score":1,"img_w":8,"img_h":8})"
        << "\n";
  }
  try {
    read_parts(path);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("malformed JSON lines carry their line number") {
  TempDir tmp;
  std::string path = (tmp.path / "broken.jsonl").string();
  {
    std::ofstream out(path);
    out << "not json\n";
  }
  try {
    read_parts(path);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("unknown fields are ignored") {
  TempDir tmp;
  std::string path = (tmp.path / "extra.jsonl").string();
  {
    std::ofstream out(path);
    out << R"({"image_id":"a","object_id":"o","category":1,"pose_deg":5,"layer":1,"part_id":0,"x":1,"y":2,"score":1,"img_w":8,"img_h":8,"mystery":42})"
        << "\n";
  }
  std::vector<ImageRecord> recs = read_parts(path);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].parts_at(1).size() == 1);
}

TEST_CASE("dataset save/load round trips through manifest JSON") {
  TempDir tmp;
  std::vector<SyntheticObjectSpec> cats{make_builtin_template("cup"),
                                        make_builtin_template("shoe")};
  TurntableSpec tt = TurntableSpec::defaults();
  tt.poses_deg = TurntableSpec::full_turn(60.0);
  DatasetManifest m = generate_dataset(cats, 2, tt);

  save_dataset(m, tmp.path.string());
  DatasetManifest back = load_dataset((tmp.path / "manifest.json").string());
  CHECK(back.num_layers == m.num_layers);
  CHECK(back.categories == m.categories);
  CHECK(back.split.train_objects == m.split.train_objects);
  CHECK(back.split.test_objects == m.split.test_objects);
  CHECK(records_equal(m.records, back.records));
  CHECK(manifest_digest(back) == manifest_digest(m));
}

TEST_CASE("a manifest with overlapping splits refuses to load") {
  TempDir tmp;
  std::vector<SyntheticObjectSpec> cats{make_builtin_template("ball")};
  TurntableSpec tt = TurntableSpec::defaults();
  tt.poses_deg = {0.0, 180.0};
  DatasetManifest m = generate_dataset(cats, 2, tt);
  save_dataset(m, tmp.path.string());

  // Corrupt the split by putting a train object into the test list too.
  std::string mpath = (tmp.path / "manifest.json").string();
  std::ifstream in(mpath);
  std::string body((std::istreambuf_iterator<char>(in)), {});
  in.close();
  std::string needle = "\"test\": [";
  auto pos = body.find(needle);
  REQUIRE(pos != std::string::npos);
  body.insert(pos + needle.size(), "\"ball_00\",");
  std::ofstream(mpath) << body;

  CHECK_THROWS_AS(load_dataset(mpath), InputError);
}

TEST_CASE("PGM round trip and rejection of bad headers") {
  TempDir tmp;
  GrayImage img;
  img.width = 5;
  img.height = 3;
  img.max_value = 255;
  img.pixels = {0,  10, 20,  30,  40,  50,  60, 70,
                80, 90, 100, 110, 120, 130, 140};
  std::string path = (tmp.path / "img.pgm").string();
  write_pgm(img, path);
  GrayImage back = read_pgm(path);
  CHECK(back.width == 5);
  CHECK(back.height == 3);
  CHECK(back.pixels == img.pixels);

  std::string bad = (tmp.path / "bad.pgm").string();
  std::ofstream(bad) << "P2\n5 3\n255\n";
  CHECK_THROWS_AS(read_pgm(bad), InputError);
}
