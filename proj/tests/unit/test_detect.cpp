#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "partpose/dataset_io.hpp"
#include "partpose/errors.hpp"

using namespace partpose;

namespace {

GrayImage constant_image(int w, int h, std::uint8_t value) {
  GrayImage img;
  img.width = w;
  img.height = h;
  img.pixels.assign(static_cast<std::size_t>(w) * h, value);
  return img;
}

/// Vertical step edge: dark left half, bright right half.
GrayImage step_edge_image(int w, int h, int edge_col) {
  GrayImage img = constant_image(w, h, 40);
  for (int r = 0; r < h; ++r) {
    for (int c = edge_col; c < w; ++c) {
      img.pixels[static_cast<std::size_t>(r) * w + c] = 200;
    }
  }
  return img;
}

Eigen::MatrixXd to_matrix(const GrayImage& img) {
  Eigen::MatrixXd m(img.height, img.width);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) m(r, c) = img.at(r, c);
  }
  return m;
}

}  // namespace

TEST_CASE("a constant image yields no parts") {
  EdgeDetectorConfig cfg;
  CHECK(detect_layer1(constant_image(32, 32, 0), cfg).empty());
  CHECK(detect_layer1(constant_image(32, 32, 128), cfg).empty());
  CHECK(detect_layer1(constant_image(32, 32, 255), cfg).empty());
}

TEST_CASE("images below 16x16 are rejected") {
  EdgeDetectorConfig cfg;
  CHECK_THROWS_AS(detect_layer1(constant_image(15, 32, 0), cfg), InputError);
  CHECK_THROWS_AS(detect_layer1(constant_image(32, 8, 0), cfg), InputError);
}

TEST_CASE("a vertical step edge is found on the edge column") {
  const int w = 48, h = 48, edge_col = 23;
  GrayImage img = step_edge_image(w, h, edge_col);

  // Derive the threshold from the dense response (no suppression): at 70%
  // of the peak only the two columns astride the step survive.
  EdgeDetectorConfig cfg;
  EdgeResponse dense = oriented_edge_response(img, cfg);
  cfg.threshold = 0.7 * dense.response.maxCoeff();

  std::vector<PartRealization> parts = detect_layer1(img, cfg, "edge");
  REQUIRE(!parts.empty());
  // The response peaks between the last dark and first bright column.
  for (const PartRealization& p : parts) {
    PixelPoint px = to_pixel_coords(p.x, p.y, w, h);
    CHECK(std::fabs(px.col - (edge_col - 0.5)) <= 1.0);
  }

  // Dominant orientation: vertical tangent. With 6 orientations at 30-degree
  // steps the vertical one is index 3 (90 degrees).
  for (const PartRealization& p : parts) {
    CHECK(p.part_id == 3);
  }
}

TEST_CASE("the response map matches a quadruple-loop convolution oracle") {
  GrayImage img = step_edge_image(24, 20, 11);
  // Add texture so more than one orientation responds.
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      if ((r * 7 + c * 3) % 5 == 0) {
        img.pixels[static_cast<std::size_t>(r) * img.width + c] ^= 0x30;
      }
    }
  }
  EdgeDetectorConfig cfg;
  cfg.n_orientations = 4;
  EdgeResponse got = oriented_edge_response(img, cfg);

  Eigen::MatrixXd m = to_matrix(img);
  Eigen::MatrixXd best = Eigen::MatrixXd::Zero(img.height, img.width);
  for (int j = 0; j < cfg.n_orientations; ++j) {
    Eigen::MatrixXd resp =
        oracles::naive_correlate_valid(m, edge_kernel(180.0 * j / cfg.n_orientations));
    best = best.cwiseMax(resp.cwiseAbs());
  }
  CHECK((best - got.response).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("detections are translation-equivariant away from borders") {
  const int w = 64, h = 64;
  EdgeDetectorConfig cfg;
  cfg.threshold = 0.1;

  GrayImage a = step_edge_image(w, h, 24);
  GrayImage b = step_edge_image(w, h, 29);  // shifted 5 px right

  std::vector<PartRealization> pa = detect_layer1(a, cfg, "a");
  std::vector<PartRealization> pb = detect_layer1(b, cfg, "b");
  // Compare away from the top/bottom borders where the edge is identical.
  auto interior = [&](const std::vector<PartRealization>& parts) {
    std::vector<std::pair<double, double>> pos;
    for (const PartRealization& p : parts) {
      PixelPoint px = to_pixel_coords(p.x, p.y, w, h);
      if (px.row >= 8 && px.row < h - 8) pos.emplace_back(px.row, px.col);
    }
    std::sort(pos.begin(), pos.end());
    return pos;
  };
  std::vector<std::pair<double, double>> ia = interior(pa);
  std::vector<std::pair<double, double>> ib = interior(pb);
  REQUIRE(!ia.empty());
  REQUIRE(ia.size() == ib.size());
  for (std::size_t i = 0; i < ia.size(); ++i) {
    CHECK(ib[i].first == ia[i].first);          // same row
    CHECK(ib[i].second == ia[i].second + 5.0);  // shifted column
  }
}

TEST_CASE("no two surviving parts are within the suppression radius") {
  GrayImage img = step_edge_image(40, 40, 19);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      if ((r + 2 * c) % 7 == 0) {
        img.pixels[static_cast<std::size_t>(r) * img.width + c] ^= 0x40;
      }
    }
  }
  EdgeDetectorConfig cfg;
  cfg.threshold = 0.05;
  cfg.nms_radius = 4.0;
  std::vector<PartRealization> parts = detect_layer1(img, cfg, "tex");
  REQUIRE(parts.size() > 1);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (std::size_t j = i + 1; j < parts.size(); ++j) {
      double d = std::hypot(parts[i].x - parts[j].x, parts[i].y - parts[j].y);
      CHECK(d > cfg.nms_radius);
    }
  }
}
