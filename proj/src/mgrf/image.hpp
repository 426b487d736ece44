#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace mgrf {

// Rectangular lattice of quantized grey levels in [0, levels).
class GreyImage {
 public:
  GreyImage() = default;
  GreyImage(int width, int height, int levels, std::uint8_t fill = 0);
  GreyImage(int width, int height, int levels, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int levels() const noexcept { return levels_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return pixels_[index(x, y)]; }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  // Copies the w×h window with top-left corner (x, y).
  GreyImage crop(int x, int y, int w, int h) const;
  void paste(const GreyImage& src, int x, int y);

  // Re-labels the level count without touching pixels (all pixels must fit).
  void set_levels(int levels);

  friend bool operator==(const GreyImage&, const GreyImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int levels_ = 2;
  std::vector<std::uint8_t> pixels_;
};

struct PieceOrigin {
  int x = 0;
  int y = 0;
  friend bool operator==(const PieceOrigin&, const PieceOrigin&) = default;
};

struct PieceSet {
  std::vector<GreyImage> pieces;
  std::vector<PieceOrigin> origins;
};

// 8-bit PGM (P5, also P2) or greyscale PNG. Result has 256 levels.
GreyImage load_image(const std::filesystem::path& path);

// Writes PGM unless the extension is .png. With rescale, level q is written as
// round(q*255/(Q-1)); otherwise raw levels are written.
void save_image(const GreyImage& img, const std::filesystem::path& path, bool rescale);

std::uint8_t rescale_level(int level, int levels);

// Contrast-limited adaptive histogram equalisation (Zuiderveld) followed by
// quantisation to `levels`. `tiles` is the number of contextual regions per
// axis; `clip` is the per-bin limit as a fraction of the region pixel count.
GreyImage clahe_quantize(const GreyImage& img, int levels, int tiles = 16, double clip = 0.03);

// Plain uniform quantisation of a 256-level image: q = floor(v*levels/256).
GreyImage uniform_quantize(const GreyImage& img, int levels);

// Bilinear resampling of a 256-level image by `scale` (pixel-centre aligned).
GreyImage bilinear_scale(const GreyImage& img, double scale);

// Origins along one axis: 0, stride, 2*stride, ... plus one edge-clamped
// origin when the last piece stops short of the edge.
std::vector<int> piece_origins(int extent, int size, int overlap);

PieceSet split_pieces(const GreyImage& img, int size = 80, int overlap = 22);

}  // namespace mgrf
