#include <doctest.h>

#include "partpose/errors.hpp"
#include "partpose/part_hog.hpp"
#include "partpose/rng.hpp"

using namespace partpose;

namespace {

PartRealization part_at(double x, double y, double score = 1.0) {
  return {"img", 1, 0, x, y, score};
}

/// Block (by, bx) of the descriptor, 4*bins values.
Eigen::VectorXd block_of(const Eigen::VectorXd& d, const HogConfig& cfg, int width,
                         int by, int bx) {
  Eigen::Index len = 4 * cfg.bins;
  Eigen::Index idx = (static_cast<Eigen::Index>(by) * cfg.blocks_x(width) + bx) * len;
  return d.segment(idx, len);
}

}  // namespace

TEST_CASE("descriptor dimension follows the block grid") {
  HogConfig cfg{8, 9, 0.2};
  CHECK(cfg.dim(64, 64) == 7 * 7 * 4 * 9);
  CHECK(cfg.dim(64, 64) == 1764);

  HogConfig small{8, 9, 0.2};
  CHECK_THROWS_AS(small.dim(8, 8), InputError);  // one cell, no 2x2 block
}

TEST_CASE("a blank map yields the zero vector exactly") {
  HogConfig cfg{8, 9, 0.2};
  Eigen::VectorXd d = part_hog_features({}, 64, 64, cfg);
  CHECK(d.size() == 1764);
  CHECK((d.array() == 0.0).all());
}

TEST_CASE("activation map puts smoothed mass at the part pixel") {
  std::vector<PartRealization> parts{part_at(0.0, 0.0, 2.0)};
  Eigen::MatrixXd map = part_activation_map(parts, 16, 16);
  CHECK(map.sum() == doctest::Approx(2.0));  // triangle kernel preserves mass
  CHECK(map.maxCoeff() > 0.0);
}

TEST_CASE("single-part descriptor is shift-equivariant by whole cells") {
  HogConfig cfg{8, 9, 0.2};
  const int w = 64, h = 64;
  std::vector<PartRealization> base{part_at(-5.0, 3.0)};

  SUBCASE("shift right by one cell") {
    std::vector<PartRealization> moved{part_at(-5.0 + cfg.cell_px, 3.0)};
    Eigen::VectorXd d0 = part_hog_features(base, w, h, cfg);
    Eigen::VectorXd d1 = part_hog_features(moved, w, h, cfg);
    CHECK(d0.norm() == doctest::Approx(d1.norm()).epsilon(1e-12));
    for (int by = 0; by < cfg.blocks_y(h); ++by) {
      for (int bx = 1; bx < cfg.blocks_x(w); ++bx) {
        Eigen::VectorXd expect = block_of(d0, cfg, w, by, bx - 1);
        Eigen::VectorXd got = block_of(d1, cfg, w, by, bx);
        CHECK((expect - got).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }

  SUBCASE("shift up by one cell moves blocks one row up") {
    std::vector<PartRealization> moved{part_at(-5.0, 3.0 + cfg.cell_px)};
    Eigen::VectorXd d0 = part_hog_features(base, w, h, cfg);
    Eigen::VectorXd d1 = part_hog_features(moved, w, h, cfg);
    for (int by = 0; by + 1 < cfg.blocks_y(h); ++by) {
      for (int bx = 0; bx < cfg.blocks_x(w); ++bx) {
        Eigen::VectorXd expect = block_of(d0, cfg, w, by + 1, bx);
        Eigen::VectorXd got = block_of(d1, cfg, w, by, bx);
        CHECK((expect - got).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("descriptors stay finite and clipped on random inputs") {
  Rng rng(31);
  HogConfig cfg{8, 6, 0.2};
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<PartRealization> parts;
    int count = static_cast<int>(rng.below(60));
    for (int i = 0; i < count; ++i) {
      parts.push_back(part_at(rng.uniform(-32, 32), rng.uniform(-32, 32),
                              rng.uniform(0, 5)));
    }
    Eigen::VectorXd d = part_hog_features(parts, 64, 64, cfg);
    CHECK(d.allFinite());
    CHECK(d.minCoeff() >= 0.0);
    // Renormalized blocks cannot exceed unit norm per entry.
    CHECK(d.maxCoeff() <= 1.0 + 1e-12);
  }
}

TEST_CASE("derived config couples the HOG cell to the orientation grid") {
  HogConfig cfg = HogConfig::derived(4, 8, 64);
  CHECK(cfg.cell_px == 16);
  CHECK(cfg.bins == 8);
}
