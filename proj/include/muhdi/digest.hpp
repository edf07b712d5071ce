#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace muhdi {

// FNV-1a 64-bit, used for parameter and pixel content digests.
class Fnv1a64 {
 public:
  void update(const void* p, size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) h_ = (h_ ^ b[i]) * 0x100000001b3ULL;
  }
  void update_u64(uint64_t x) { update(&x, sizeof x); }
  void update_i64(int64_t x) { update(&x, sizeof x); }
  void update_f64(double x) {
    uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    update_u64(bits);
  }
  void update_f64s(const double* p, size_t n) {
    for (size_t i = 0; i < n; ++i) update_f64(p[i]);
  }
  void update_str(const std::string& s) { update(s.data(), s.size()); }
  uint64_t digest() const { return h_; }

 private:
  uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline uint64_t fnv1a64(const void* p, size_t n) {
  Fnv1a64 h;
  h.update(p, n);
  return h.digest();
}

inline std::string hex_digest(uint64_t h) {
  static const char* k = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = k[h & 0xf];
    h >>= 4;
  }
  return s;
}

}  // namespace muhdi
