#include <doctest.h>

#include <algorithm>
#include <array>
#include <fstream>

#include "mgrf/error.hpp"
#include "mgrf/image.hpp"
#include "support.hpp"

using namespace mgrf;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

// Textbook CLAHE written independently: per-region clipped CDFs, then for
// every pixel a bilinear blend of the four nearest region maps.
GreyImage reference_clahe(const GreyImage& img, int Q, int tiles, double clip) {
  const int W = img.width(), H = img.height();
  const int nx = std::min(tiles, W), ny = std::min(tiles, H);
  std::vector<int> xs(nx + 1), ys(ny + 1);
  for (int i = 0; i <= nx; ++i) xs[i] = i * W / nx;
  for (int j = 0; j <= ny; ++j) ys[j] = j * H / ny;
  std::vector<std::vector<double>> cdf(nx * ny, std::vector<double>(256));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      std::vector<double> h(256, 0.0);
      for (int y = ys[j]; y < ys[j + 1]; ++y)
        for (int x = xs[i]; x < xs[i + 1]; ++x) h[img.at(x, y)]++;
      const double n = double(xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
      const double lim = std::max(1.0, clip * n);
      double clipped = 0;
      for (double& v : h) clipped += std::max(0.0, v - lim), v = std::min(v, lim);
      double run = 0;
      for (int b = 0; b < 256; ++b) {
        run += h[b] + clipped / 256;
        cdf[j * nx + i][b] = run / n;
      }
    }
  auto centre = [](const std::vector<int>& e, int k) { return (e[k] + e[k + 1] - 1) / 2.0; };
  auto blend = [&](const std::vector<int>& e, int n, int p, int& a, int& b, double& t) {
    a = 0;
    for (int k = 0; k < n; ++k)
      if (centre(e, k) <= p) a = k;
    if (p <= centre(e, 0)) {
      a = b = 0;
      t = 0;
    } else if (a == n - 1) {
      b = a;
      t = 0;
    } else {
      b = a + 1;
      t = (p - centre(e, a)) / (centre(e, b) - centre(e, a));
    }
  };
  GreyImage out(W, H, Q);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      int i0, i1, j0, j1;
      double tx, ty;
      blend(xs, nx, x, i0, i1, tx);
      blend(ys, ny, y, j0, j1, ty);
      const int v = img.at(x, y);
      const double e = (1 - ty) * ((1 - tx) * cdf[j0 * nx + i0][v] + tx * cdf[j0 * nx + i1][v]) +
                       ty * ((1 - tx) * cdf[j1 * nx + i0][v] + tx * cdf[j1 * nx + i1][v]);
      out.at(x, y) = static_cast<std::uint8_t>(std::min(Q - 1, int(std::floor(e * Q))));
    }
  return out;
}

}  // namespace

TEST_CASE("grey image construction and bounds") {
  GreyImage img(3, 2, 8, 5);
  CHECK(img.size() == 6);
  CHECK(img.at(2, 1) == 5);
  CHECK(img.contains(2, 1));
  CHECK_FALSE(img.contains(3, 0));
  CHECK_THROWS_AS(GreyImage(2, 2, 1), Error);
  CHECK_THROWS_AS(GreyImage(2, 2, 4, std::vector<std::uint8_t>{0, 1, 2, 4}), Error);
  CHECK_THROWS_AS(GreyImage(2, 2, 4, std::vector<std::uint8_t>{0, 1, 2}), Error);
}

TEST_CASE("crop and paste") {
  auto img = testing::random_image(10, 8, 16, 3);
  auto c = img.crop(2, 3, 4, 5);
  CHECK(c.width() == 4);
  CHECK(c.at(1, 2) == img.at(3, 5));
  GreyImage blank(10, 8, 16);
  blank.paste(c, 2, 3);
  CHECK(blank.at(3, 5) == img.at(3, 5));
  CHECK_THROWS(img.crop(8, 0, 4, 4));
}

TEST_CASE("load 2x2 binary pgm byte for byte") {
  auto dir = testing::temp_dir("pgm");
  write_bytes(dir / "a.pgm", std::string("P5\n# comment\n2 2\n255\n") + std::string("\x00\xff\x11\x22", 4));
  auto img = load_image(dir / "a.pgm");
  CHECK(img == GreyImage(2, 2, 256, std::vector<std::uint8_t>{0, 255, 17, 34}));
}

TEST_CASE("ascii pgm and reduced maxval") {
  auto dir = testing::temp_dir("pgm_ascii");
  write_bytes(dir / "a.pgm", "P2\n2 1\n15\n0 15\n");
  auto img = load_image(dir / "a.pgm");
  CHECK(img.at(0, 0) == 0);
  CHECK(img.at(1, 0) == 255);
}

TEST_CASE("load errors") {
  auto dir = testing::temp_dir("pgm_err");
  write_bytes(dir / "t.pgm", std::string("P5\n4 4\n255\n") + std::string(5, '\x01'));
  try {
    load_image(dir / "t.pgm");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("unreadable") != std::string::npos);
  }
  CHECK_THROWS_AS(load_image(dir / "missing.pgm"), Error);
  write_bytes(dir / "c.ppm", "P6\n1 1\n255\nabc");
  try {
    load_image(dir / "c.ppm");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unsupported);
  }
}

TEST_CASE("save/load round trip is exact") {
  auto dir = testing::temp_dir("roundtrip");
  auto img = testing::random_image(13, 7, 256, 11);
  save_image(img, dir / "x.pgm", false);
  CHECK(load_image(dir / "x.pgm") == img);
  save_image(img, dir / "x.png", false);
  CHECK(load_image(dir / "x.png") == img);
}

TEST_CASE("rescaled save maps levels onto 0..255") {
  CHECK(rescale_level(7, 8) == 255);
  CHECK(rescale_level(0, 8) == 0);
  CHECK(rescale_level(8, 16) == 136);
  auto dir = testing::temp_dir("rescale");
  GreyImage img(3, 1, 8, std::vector<std::uint8_t>{0, 3, 7});
  save_image(img, dir / "r.pgm", true);
  auto back = load_image(dir / "r.pgm");
  CHECK(back.at(0, 0) == 0);
  CHECK(back.at(1, 0) == 109);
  CHECK(back.at(2, 0) == 255);
  CHECK_THROWS_AS(save_image(img, dir / "no_such_dir" / "r.pgm", true), Error);
}

TEST_CASE("clahe on a constant image gives a constant image") {
  GreyImage c(64, 48, 256, 90);
  auto out = clahe_quantize(c, 8);
  CHECK(std::all_of(out.pixels().begin(), out.pixels().end(), [&](auto v) { return v == out.pixels()[0]; }));
  CHECK(out.levels() == 8);
}

TEST_CASE("clahe matches the reference on a ramp and on random images") {
  GreyImage ramp(64, 64, 256);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) ramp.at(x, y) = static_cast<std::uint8_t>((x * 4 + y) % 256);
  CHECK(clahe_quantize(ramp, 8) == reference_clahe(ramp, 8, 16, 0.03));
  for (std::uint64_t s = 0; s < 4; ++s) {
    auto img = testing::pattern_image(50 + int(s) * 7, 41 + int(s) * 5, s);
    CHECK(clahe_quantize(img, 8) == reference_clahe(img, 8, 16, 0.03));
    CHECK(clahe_quantize(img, 16, 4, 0.1) == reference_clahe(img, 16, 4, 0.1));
  }
}

TEST_CASE("clahe range and re-application stay within Q levels") {
  auto img = testing::pattern_image(96, 96, 5);
  auto q = clahe_quantize(img, 8);
  for (auto v : q.pixels()) CHECK(v < 8);
  GreyImage expanded(q.width(), q.height(), 256);
  for (std::size_t i = 0; i < q.size(); ++i) expanded.pixels()[i] = rescale_level(q.pixels()[i], 8);
  auto again = clahe_quantize(expanded, 8);
  for (auto v : again.pixels()) CHECK(v < 8);
  CHECK_THROWS_AS(clahe_quantize(img, 1), Error);
}

TEST_CASE("uniform quantisation and scaling") {
  GreyImage img(4, 1, 256, std::vector<std::uint8_t>{0, 15, 16, 255});
  auto q = uniform_quantize(img, 16);
  CHECK(q.at(0, 0) == 0);
  CHECK(q.at(1, 0) == 0);
  CHECK(q.at(2, 0) == 1);
  CHECK(q.at(3, 0) == 15);
  GreyImage flat(40, 30, 256, 77);
  auto s = bilinear_scale(flat, 0.75);
  CHECK(s.width() == 30);
  CHECK(s.height() == 23);
  for (auto v : s.pixels()) CHECK(v == 77);
}

TEST_CASE("piece tiling") {
  CHECK(piece_origins(256, 80, 22) == std::vector<int>{0, 58, 116, 174, 176});
  auto pieces = split_pieces(GreyImage(256, 256, 8), 80, 22);
  CHECK(pieces.pieces.size() == 25);
  auto one = split_pieces(GreyImage(80, 80, 8), 80, 22);
  REQUIRE(one.pieces.size() == 1);
  CHECK(one.origins[0] == PieceOrigin{0, 0});
  CHECK_THROWS_AS(split_pieces(GreyImage(79, 80, 8), 80, 22), Error);
}

TEST_CASE("pieces cover every pixel") {
  for (int w : {80, 97, 138, 200}) {
    GreyImage img(w, 90, 8);
    auto set = split_pieces(img, 80, 22);
    std::vector<int> hit(img.size(), 0);
    for (std::size_t k = 0; k < set.pieces.size(); ++k) {
      CHECK(set.pieces[k].width() == 80);
      for (int y = 0; y < 80; ++y)
        for (int x = 0; x < 80; ++x) hit[img.index(set.origins[k].x + x, set.origins[k].y + y)] = 1;
    }
    CHECK(std::count(hit.begin(), hit.end(), 0) == 0);
  }
}
