#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace occnav::binio {

// Little-endian primitives shared by the dataset and weights containers.

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f32(std::ostream& os, float f) { put_u32(os, std::bit_cast<std::uint32_t>(f)); }

template <typename Alloc>
void put_f32s(std::ostream& os, const std::vector<float, Alloc>& v) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 4));
  } else {
    for (float f : v) put_f32(os, f);
  }
}

inline void put_bytes(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

/// Reader over an in-memory buffer that reports truncation instead of throwing.
class Reader {
 public:
  explicit Reader(std::string buf) : buf_(std::move(buf)) {}

  bool get_u32(std::uint32_t& v) {
    if (remaining() < 4) return false;
    const auto* b = reinterpret_cast<const unsigned char*>(buf_.data() + pos_);
    v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
        (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    pos_ += 4;
    return true;
  }

  template <typename Alloc>
  bool get_f32s(std::vector<float, Alloc>& out, std::size_t n) {
    if (n > remaining() / 4) return false;
    out.resize(n);
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(out.data(), buf_.data() + pos_, n * 4);
      pos_ += n * 4;
    } else {
      for (auto& f : out) {
        std::uint32_t u;
        get_u32(u);
        f = std::bit_cast<float>(u);
      }
    }
    return true;
  }

  bool get_raw(std::string& out, std::size_t n) {
    if (n > remaining()) return false;
    out.assign(buf_.data() + pos_, n);
    pos_ += n;
    return true;
  }

  bool get_bytes(std::string& out) {
    std::uint32_t n;
    return get_u32(n) && get_raw(out, n);
  }

  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  std::string buf_;
  std::size_t pos_ = 0;
};

}  // namespace occnav::binio
