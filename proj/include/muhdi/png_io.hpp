#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace muhdi::png {

// 8-bit interleaved image, row-major. channels: 1 (gray) or 3 (RGB).
struct Image8 {
  int64_t h = 0, w = 0, channels = 0;
  std::vector<uint8_t> pix;

  uint8_t& at(int64_t y, int64_t x, int64_t c) { return pix[(y * w + x) * channels + c]; }
  uint8_t at(int64_t y, int64_t x, int64_t c) const { return pix[(y * w + x) * channels + c]; }
};

std::vector<uint8_t> encode_png(const Image8& img);
Image8 decode_png(const uint8_t* data, size_t n);

void write_png(const std::string& path, const Image8& img);
Image8 read_png(const std::string& path);

}  // namespace muhdi::png
