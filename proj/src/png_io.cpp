#include "muhdi/png_io.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>

#include "muhdi/errors.hpp"

namespace muhdi::png {

namespace {

const uint8_t kSig[8] = {137, 80, 78, 71, 13, 10, 26, 10};

void put_be32(std::vector<uint8_t>& out, uint32_t x) {
  out.push_back(static_cast<uint8_t>(x >> 24));
  out.push_back(static_cast<uint8_t>(x >> 16));
  out.push_back(static_cast<uint8_t>(x >> 8));
  out.push_back(static_cast<uint8_t>(x));
}

uint32_t get_be32(const uint8_t* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) |
         uint32_t(p[3]);
}

void put_chunk(std::vector<uint8_t>& out, const char type[4],
               const uint8_t* data, size_t n) {
  put_be32(out, static_cast<uint32_t>(n));
  size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  if (n) out.insert(out.end(), data, data + n);
  uint32_t crc = static_cast<uint32_t>(
      ::crc32(0L, out.data() + start, static_cast<uInt>(4 + n)));
  put_be32(out, crc);
}

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

std::vector<uint8_t> encode_png(const Image8& img) {
  if (img.h <= 0 || img.w <= 0 || (img.channels != 1 && img.channels != 3))
    throw ValidationError("png encoder expects a gray or RGB image with positive dims");
  if (img.pix.size() != static_cast<size_t>(img.h * img.w * img.channels))
    throw ValidationError("png encoder pixel buffer size mismatch");

  const size_t stride = static_cast<size_t>(img.w) * img.channels;
  std::vector<uint8_t> raw((stride + 1) * img.h);
  for (int64_t y = 0; y < img.h; ++y) {
    raw[y * (stride + 1)] = 0;  // filter: none
    std::memcpy(&raw[y * (stride + 1) + 1], &img.pix[y * stride], stride);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<uint8_t> z(bound);
  if (compress2(z.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw ValidationError("png deflate failed");
  z.resize(bound);

  std::vector<uint8_t> out(kSig, kSig + 8);
  uint8_t ihdr[13];
  ihdr[0] = static_cast<uint8_t>(img.w >> 24);
  ihdr[1] = static_cast<uint8_t>(img.w >> 16);
  ihdr[2] = static_cast<uint8_t>(img.w >> 8);
  ihdr[3] = static_cast<uint8_t>(img.w);
  ihdr[4] = static_cast<uint8_t>(img.h >> 24);
  ihdr[5] = static_cast<uint8_t>(img.h >> 16);
  ihdr[6] = static_cast<uint8_t>(img.h >> 8);
  ihdr[7] = static_cast<uint8_t>(img.h);
  ihdr[8] = 8;  // bit depth
  ihdr[9] = img.channels == 3 ? 2 : 0;
  ihdr[10] = ihdr[11] = ihdr[12] = 0;
  put_chunk(out, "IHDR", ihdr, sizeof ihdr);
  put_chunk(out, "IDAT", z.data(), z.size());
  put_chunk(out, "IEND", nullptr, 0);
  return out;
}

Image8 decode_png(const uint8_t* data, size_t n) {
  if (n < 8 || std::memcmp(data, kSig, 8) != 0)
    throw ValidationError("not a png stream");
  size_t pos = 8;
  Image8 img;
  std::vector<uint8_t> idat;
  bool saw_ihdr = false, saw_iend = false;
  while (pos + 12 <= n && !saw_iend) {
    uint32_t len = get_be32(data + pos);
    if (pos + 12 + len > n) throw ValidationError("png chunk overruns the stream");
    const uint8_t* type = data + pos + 4;
    const uint8_t* payload = data + pos + 8;
    uint32_t want = get_be32(data + pos + 8 + len);
    uint32_t got = static_cast<uint32_t>(::crc32(0L, type, 4 + len));
    if (want != got) throw ValidationError("png chunk crc mismatch");
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw ValidationError("png IHDR has the wrong length");
      img.w = get_be32(payload);
      img.h = get_be32(payload + 4);
      uint8_t depth = payload[8], color = payload[9], interlace = payload[12];
      if (depth != 8) throw ValidationError("png bit depth unsupported (want 8)");
      if (color == 0)
        img.channels = 1;
      else if (color == 2)
        img.channels = 3;
      else
        throw ValidationError("png color type unsupported (want gray or RGB)");
      if (interlace != 0) throw ValidationError("png interlace unsupported");
      if (img.w <= 0 || img.h <= 0 || img.w > 1 << 20 || img.h > 1 << 20)
        throw ValidationError("png dimensions are implausible");
      saw_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), payload, payload + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      saw_iend = true;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr || !saw_iend) throw ValidationError("png is missing IHDR or IEND");

  const size_t stride = static_cast<size_t>(img.w) * img.channels;
  std::vector<uint8_t> raw((stride + 1) * img.h);
  uLongf raw_len = static_cast<uLongf>(raw.size());
  int rc = uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size()));
  if (rc != Z_OK || raw_len != raw.size())
    throw ValidationError("png inflate failed or produced the wrong size");

  img.pix.assign(stride * img.h, 0);
  const int64_t bpp = img.channels;  // bytes per pixel at depth 8
  for (int64_t y = 0; y < img.h; ++y) {
    uint8_t filter = raw[y * (stride + 1)];
    const uint8_t* src = &raw[y * (stride + 1) + 1];
    uint8_t* cur = &img.pix[y * stride];
    const uint8_t* up = y > 0 ? &img.pix[(y - 1) * stride] : nullptr;
    for (size_t i = 0; i < stride; ++i) {
      int a = i >= static_cast<size_t>(bpp) ? cur[i - bpp] : 0;
      int b = up ? up[i] : 0;
      int c = (up && i >= static_cast<size_t>(bpp)) ? up[i - bpp] : 0;
      int x = src[i];
      switch (filter) {
        case 0: break;
        case 1: x += a; break;
        case 2: x += b; break;
        case 3: x += (a + b) / 2; break;
        case 4: x += paeth(a, b, c); break;
        default: throw ValidationError("png filter type unsupported");
      }
      cur[i] = static_cast<uint8_t>(x & 0xff);
    }
  }
  return img;
}

void write_png(const std::string& path, const Image8& img) {
  std::vector<uint8_t> bytes = encode_png(img);
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw ValidationError("cannot open for writing: " + path);
  size_t wrote = std::fwrite(bytes.data(), 1, bytes.size(), f);
  int rc = std::fclose(f);
  if (wrote != bytes.size() || rc != 0)
    throw ValidationError("short write: " + path);
}

Image8 read_png(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw ValidationError("cannot open: " + path);
  std::fseek(f, 0, SEEK_END);
  long size = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  if (size < 0) {
    std::fclose(f);
    throw ValidationError("cannot stat: " + path);
  }
  std::vector<uint8_t> bytes(static_cast<size_t>(size));
  size_t got = std::fread(bytes.data(), 1, bytes.size(), f);
  std::fclose(f);
  if (got != bytes.size()) throw ValidationError("short read: " + path);
  return decode_png(bytes.data(), bytes.size());
}

}  // namespace muhdi::png
