#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mgrf/error.hpp"
#include "mgrf/filterbank.hpp"
#include "support.hpp"

using namespace mgrf;

namespace {

// Direct O(n k^2) correlation over the valid region.
std::vector<double> naive_responses(const LinearFilter& f, const GreyImage& img) {
  std::vector<double> out;
  const int r = f.side / 2;
  for (int y = r; y < img.height() - r; ++y)
    for (int x = r; x < img.width() - r; ++x) {
      double acc = 0;
      for (int v = -r; v <= r; ++v)
        for (int u = -r; u <= r; ++u) acc += f.coeffs[std::size_t((v + r) * f.side + (u + r))] * img.at(x + u, y + v);
      out.push_back(acc);
    }
  return out;
}

}  // namespace

TEST_CASE("bank composition") {
  const auto& bank = filter_bank();
  REQUIRE(bank.size() == 64);
  int log = 0, gabor = 0;
  for (const auto& f : bank) {
    CHECK(f.side % 2 == 1);
    CHECK(f.side <= 17);
    CHECK(f.coeffs.size() == std::size_t(f.side * f.side));
    double sum = 0, l1 = 0;
    for (double c : f.coeffs) sum += c, l1 += std::abs(c);
    CHECK(std::abs(sum) < 1e-12);
    CHECK(l1 == doctest::Approx(1.0).epsilon(1e-12));
    (f.family == FilterFamily::LoG ? log : gabor)++;
  }
  CHECK(log == 4);
  CHECK(gabor == 60);
  CHECK(bank.back().side == 17);
}

TEST_CASE("bank is deterministic") {
  const auto a = build_filter_bank(), b = build_filter_bank();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].coeffs == b[i].coeffs);
}

TEST_CASE("even Gabor part is symmetric under a half turn") {
  for (double lambda : {2.0, 4.0, 6.0})
    for (int k = 0; k < kGaborOrientations; ++k) {
      const double th = k * M_PI / kGaborOrientations;
      const auto a = gabor_filter(lambda, th, FilterFamily::GaborCos);
      const auto b = gabor_filter(lambda, th + M_PI, FilterFamily::GaborCos);
      auto img = testing::random_image(30, 30, 8, std::uint64_t(k));
      const auto ra = filter_responses(a, img), rb = filter_responses(b, img);
      for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i] == doctest::Approx(rb[i]).epsilon(1e-9).scale(1));
    }
}

TEST_CASE("responses equal a naive correlation") {
  for (std::size_t i : {0u, 3u, 10u, 33u, 63u}) {
    const auto& f = filter_bank()[i];
    auto img = testing::random_image(32, 32, 8, i);
    const auto fast = filter_responses(f, img), ref = naive_responses(f, img);
    REQUIRE(fast.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) CHECK(fast[k] == doctest::Approx(ref[k]).epsilon(1e-12).scale(1));
    const auto kind = make_filter_feature(int(i), img);
    std::vector<std::int64_t> counts(std::size_t(kind.bins), 0);
    for (double r : ref) counts[std::size_t(quantize_response(kind, r))]++;
    CHECK(filter_response_counts(kind, img) == counts);
  }
}

TEST_CASE("responses are linear in the kernel") {
  const auto& a = filter_bank()[20];
  const auto& b = filter_bank()[21];
  REQUIRE(a.side == b.side);
  LinearFilter c = a;
  for (std::size_t k = 0; k < c.coeffs.size(); ++k) c.coeffs[k] = a.coeffs[k] + b.coeffs[k];
  auto img = testing::random_image(25, 25, 8, 1);
  const auto ra = filter_responses(a, img), rb = filter_responses(b, img), rc = filter_responses(c, img);
  for (std::size_t k = 0; k < rc.size(); ++k) CHECK(rc[k] == doctest::Approx(ra[k] + rb[k]).epsilon(1e-12).scale(1));
}

TEST_CASE("constant image puts all mass in the zero bin") {
  auto train = testing::random_image(40, 40, 8, 2);
  GreyImage flat(40, 40, 8, 5);
  for (int i : {0, 4, 40}) {
    const auto kind = make_filter_feature(i, train);
    const auto h = filter_response_histogram(filter_bank()[std::size_t(i)], kind, flat);
    CHECK(h.freq[std::size_t(quantize_response(kind, 0.0))] == doctest::Approx(1.0));
  }
}

TEST_CASE("delta filter reproduces the marginal histogram") {
  auto img = testing::random_image(20, 20, 16, 4);
  const auto kind = FeatureKind::filter_hist(16, 0, -0.5, 15.5);
  const auto h = filter_response_histogram(delta_filter(), kind, img);
  const auto m = collect_histogram(FeatureKind::marginal(16), OffsetList{{0, 0}}, img);
  CHECK(h.freq[0] == 0.0);
  CHECK(h.freq[17] == 0.0);
  for (int q = 0; q < 16; ++q) CHECK(h.freq[std::size_t(q + 1)] == doctest::Approx(m.freq[std::size_t(q)]));
}

TEST_CASE("quantiser edges and footprints") {
  const auto kind = FeatureKind::filter_hist(8, 0, -1.0, 1.0);
  CHECK(quantize_response(kind, -1.5) == 0);
  CHECK(quantize_response(kind, 1.5) == 17);
  CHECK(quantize_response(kind, -1.0) == 1);
  CHECK(quantize_response(kind, 1.0) == 16);
  const auto& f = filter_bank()[1];
  const auto o = filter_offsets(f);
  CHECK(o.size() == std::size_t(f.side * f.side));
  CHECK(o[0] == Offset{0, 0});
  const auto w = weights_in_offset_order(f);
  for (std::size_t k = 0; k < o.size(); ++k) CHECK(w[k] == f.at(o[k].dx, o[k].dy));
  CHECK_THROWS_AS(filter_responses(filter_bank()[63], GreyImage(10, 10, 8)), Error);
  CHECK(describe_filter_bank().find("log(sigma") != std::string::npos);
}
