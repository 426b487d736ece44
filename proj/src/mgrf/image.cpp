#include "mgrf/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "mgrf/error.hpp"

namespace mgrf {

GreyImage::GreyImage(int width, int height, int levels, std::uint8_t fill)
    : width_(width), height_(height), levels_(levels) {
  require(width > 0 && height > 0, "image dimensions must be positive");
  require(levels >= 2 && levels <= 256, "grey level count must be in [2, 256]");
  require(fill < levels, "fill value out of range");
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GreyImage::GreyImage(int width, int height, int levels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), levels_(levels), pixels_(std::move(pixels)) {
  require(width > 0 && height > 0, "image dimensions must be positive");
  require(levels >= 2 && levels <= 256, "grey level count must be in [2, 256]");
  require(pixels_.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
          "pixel count does not match dimensions");
  for (auto v : pixels_) require(v < levels, "pixel value out of range");
}

GreyImage GreyImage::crop(int x, int y, int w, int h) const {
  require(x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= width_ && y + h <= height_,
          "crop window outside image");
  GreyImage out(w, h, levels_);
  for (int j = 0; j < h; ++j) {
    auto src = pixels_.begin() + static_cast<std::ptrdiff_t>(index(x, y + j));
    std::copy(src, src + w, out.pixels_.begin() + static_cast<std::ptrdiff_t>(out.index(0, j)));
  }
  return out;
}

void GreyImage::paste(const GreyImage& src, int x, int y) {
  require(src.levels_ == levels_, "paste: level count mismatch");
  require(x >= 0 && y >= 0 && x + src.width_ <= width_ && y + src.height_ <= height_,
          "paste window outside image");
  for (int j = 0; j < src.height_; ++j)
    for (int i = 0; i < src.width_; ++i) at(x + i, y + j) = src.at(i, j);
}

void GreyImage::set_levels(int levels) {
  require(levels >= 2 && levels <= 256, "grey level count must be in [2, 256]");
  for (auto v : pixels_) require(v < levels, "pixel value exceeds new level count");
  levels_ = levels;
}

namespace {

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "unreadable file: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Header tokens of a netpbm file, skipping '#' comments.
class PnmHeader {
 public:
  explicit PnmHeader(const std::string& data) : data_(data) {}

  long next_int(const std::filesystem::path& path) {
    skip_space();
    if (pos_ >= data_.size() || !std::isdigit(static_cast<unsigned char>(data_[pos_])))
      fail(ErrorKind::Io, "unreadable file (bad PGM header): " + path.string());
    long v = 0;
    while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) {
      v = v * 10 + (data_[pos_] - '0');
      if (v > 1'000'000) fail(ErrorKind::Io, "unreadable file (PGM header overflow): " + path.string());
      ++pos_;
    }
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }

 private:
  void skip_space() {
    while (pos_ < data_.size()) {
      if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(data_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& data_;
  std::size_t pos_ = 2;
};

GreyImage load_pnm(const std::string& data, const std::filesystem::path& path) {
  const char kind = data[1];
  if (kind == '3' || kind == '6' || kind == '1' || kind == '4')
    fail(ErrorKind::Unsupported, "unsupported format (not greyscale): " + path.string());
  if (kind != '2' && kind != '5') fail(ErrorKind::Io, "unreadable file: " + path.string());
  PnmHeader hdr(data);
  const long w = hdr.next_int(path);
  const long h = hdr.next_int(path);
  const long maxval = hdr.next_int(path);
  if (w <= 0 || h <= 0 || maxval <= 0)
    fail(ErrorKind::Io, "unreadable file (bad PGM dimensions): " + path.string());
  if (maxval > 255) fail(ErrorKind::Unsupported, "unsupported format (16-bit PGM): " + path.string());
  const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<std::uint8_t> px(n);
  if (kind == '5') {
    hdr.advance();  // single whitespace byte after maxval
    if (data.size() < hdr.pos() + n) fail(ErrorKind::Io, "unreadable file (truncated): " + path.string());
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(hdr.pos()), n, px.begin());
  } else {
    PnmHeader body = hdr;
    for (auto& v : px) v = static_cast<std::uint8_t>(std::min<long>(255, body.next_int(path)));
  }
  if (maxval != 255)
    for (auto& v : px) v = static_cast<std::uint8_t>(std::lround(v * 255.0 / static_cast<double>(maxval)));
  return GreyImage(static_cast<int>(w), static_cast<int>(h), 256, std::move(px));
}

GreyImage load_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    fail(ErrorKind::Io, "unreadable file: " + path.string() + " (" + image.message + ")");
  if ((image.format & PNG_FORMAT_FLAG_COLOR) != 0) {
    png_image_free(&image);
    fail(ErrorKind::Unsupported, "unsupported format (colour PNG): " + path.string());
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorKind::Io, "unreadable file: " + path.string() + " (" + msg + ")");
  }
  return GreyImage(static_cast<int>(image.width), static_cast<int>(image.height), 256, std::move(px));
}

bool has_png_extension(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

}  // namespace

GreyImage load_image(const std::filesystem::path& path) {
  const std::string data = read_all(path);
  if (data.size() >= 8 && static_cast<unsigned char>(data[0]) == 0x89 && data.compare(1, 3, "PNG") == 0)
    return load_png(path);
  if (data.size() >= 2 && data[0] == 'P') return load_pnm(data, path);
  fail(ErrorKind::Io, "unreadable file (unknown format): " + path.string());
}

std::uint8_t rescale_level(int level, int levels) {
  return static_cast<std::uint8_t>(std::lround(level * 255.0 / static_cast<double>(levels - 1)));
}

void save_image(const GreyImage& img, const std::filesystem::path& path, bool rescale) {
  std::vector<std::uint8_t> bytes(img.pixels().begin(), img.pixels().end());
  if (rescale)
    for (auto& v : bytes) v = rescale_level(v, img.levels());
  if (has_png_extension(path)) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr))
      fail(ErrorKind::Io, "cannot write " + path.string() + " (" + image.message + ")");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
}

GreyImage clahe_quantize(const GreyImage& img, int levels, int tiles, double clip) {
  require(levels >= 2 && levels <= 256, "clahe_quantize: Q must be in [2, 256]");
  require(tiles >= 1, "clahe_quantize: tile count must be positive");
  require(clip > 0.0, "clahe_quantize: clip limit must be positive");
  require(img.levels() == 256, "clahe_quantize: input must have 256 levels");
  constexpr int kBins = 256;
  const int W = img.width(), H = img.height();
  const int nx = std::min(tiles, W), ny = std::min(tiles, H);
  auto bound = [](int i, int n, int extent) { return static_cast<int>(static_cast<long>(i) * extent / n); };

  // Equalising map (CDF in (0,1]) per contextual region.
  std::vector<std::array<double, kBins>> maps(static_cast<std::size_t>(nx * ny));
  std::vector<double> cx(static_cast<std::size_t>(nx)), cy(static_cast<std::size_t>(ny));
  for (int i = 0; i < nx; ++i) cx[i] = 0.5 * (bound(i, nx, W) + bound(i + 1, nx, W) - 1);
  for (int j = 0; j < ny; ++j) cy[j] = 0.5 * (bound(j, ny, H) + bound(j + 1, ny, H) - 1);

  for (int tj = 0; tj < ny; ++tj) {
    for (int ti = 0; ti < nx; ++ti) {
      std::array<double, kBins> hist{};
      const int x0 = bound(ti, nx, W), x1 = bound(ti + 1, nx, W);
      const int y0 = bound(tj, ny, H), y1 = bound(tj + 1, ny, H);
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) hist[img.at(x, y)] += 1.0;
      const double npix = static_cast<double>((x1 - x0) * (y1 - y0));
      const double limit = std::max(1.0, clip * npix);
      double excess = 0.0;
      for (auto& h : hist) {
        if (h > limit) {
          excess += h - limit;
          h = limit;
        }
      }
      const double spread = excess / kBins;
      auto& map = maps[static_cast<std::size_t>(tj * nx + ti)];
      double acc = 0.0;
      for (int b = 0; b < kBins; ++b) {
        acc += hist[b] + spread;
        map[b] = acc / npix;
      }
    }
  }

  // Neighbouring region indices and the blend weight of the upper one.
  auto locate = [](const std::vector<double>& centres, int p, int& lo, int& hi, double& w) {
    const int n = static_cast<int>(centres.size());
    if (p <= centres.front()) {
      lo = hi = 0;
      w = 0.0;
      return;
    }
    if (p >= centres.back()) {
      lo = hi = n - 1;
      w = 0.0;
      return;
    }
    lo = 0;
    while (centres[lo + 1] <= p) ++lo;
    hi = lo + 1;
    w = (p - centres[lo]) / (centres[hi] - centres[lo]);
  };

  GreyImage out(W, H, levels);
  for (int y = 0; y < H; ++y) {
    int ja, jb;
    double wy;
    locate(cy, y, ja, jb, wy);
    for (int x = 0; x < W; ++x) {
      int ia, ib;
      double wx;
      locate(cx, x, ia, ib, wx);
      const int v = img.at(x, y);
      const double top = (1 - wx) * maps[ja * nx + ia][v] + wx * maps[ja * nx + ib][v];
      const double bottom = (1 - wx) * maps[jb * nx + ia][v] + wx * maps[jb * nx + ib][v];
      const double e = (1 - wy) * top + wy * bottom;
      const int q = std::clamp(static_cast<int>(std::floor(e * levels)), 0, levels - 1);
      out.at(x, y) = static_cast<std::uint8_t>(q);
    }
  }
  return out;
}

GreyImage uniform_quantize(const GreyImage& img, int levels) {
  require(levels >= 2 && levels <= 256, "uniform_quantize: Q must be in [2, 256]");
  require(img.levels() == 256, "uniform_quantize: input must have 256 levels");
  GreyImage out(img.width(), img.height(), levels);
  for (std::size_t i = 0; i < img.size(); ++i)
    out.pixels()[i] = static_cast<std::uint8_t>(img.pixels()[i] * levels / 256);
  return out;
}

GreyImage bilinear_scale(const GreyImage& img, double scale) {
  require(scale > 0.0, "bilinear_scale: scale must be positive");
  const int W = std::max(1, static_cast<int>(std::lround(img.width() * scale)));
  const int H = std::max(1, static_cast<int>(std::lround(img.height() * scale)));
  const double sx = static_cast<double>(img.width()) / W, sy = static_cast<double>(img.height()) / H;
  GreyImage out(W, H, img.levels());
  for (int y = 0; y < H; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
    const int y0 = static_cast<int>(fy), y1 = std::min(y0 + 1, img.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < W; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
      const int x0 = static_cast<int>(fx), x1 = std::min(x0 + 1, img.width() - 1);
      const double wx = fx - x0;
      const double v = (1 - wy) * ((1 - wx) * img.at(x0, y0) + wx * img.at(x1, y0)) +
                       wy * ((1 - wx) * img.at(x0, y1) + wx * img.at(x1, y1));
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, img.levels() - 1));
    }
  }
  return out;
}

std::vector<int> piece_origins(int extent, int size, int overlap) {
  require(size > 0 && overlap >= 0 && overlap < size, "piece geometry invalid");
  if (extent < size) fail(ErrorKind::InvalidArgument, "degenerate training data: image smaller than piece size");
  const int stride = size - overlap;
  std::vector<int> origins;
  int o = 0;
  for (; o + size <= extent; o += stride) origins.push_back(o);
  if (origins.back() + size < extent) origins.push_back(extent - size);
  return origins;
}

PieceSet split_pieces(const GreyImage& img, int size, int overlap) {
  const auto xs = piece_origins(img.width(), size, overlap);
  const auto ys = piece_origins(img.height(), size, overlap);
  PieceSet set;
  for (int y : ys) {
    for (int x : xs) {
      set.pieces.push_back(img.crop(x, y, size, size));
      set.origins.push_back({x, y});
    }
  }
  return set;
}

}  // namespace mgrf
