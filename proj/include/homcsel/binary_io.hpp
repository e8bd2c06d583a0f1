#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "homcsel/errors.hpp"

namespace homcsel::detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path);
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw IoError("failed to read file: " + path);
  return bytes;
}

inline void write_file_bytes(const std::string& path,
                             const std::uint8_t* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  if (size > 0) out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw IoError("failed to write file: " + path);
}

inline void write_file_text(const std::string& path, const std::string& text) {
  write_file_bytes(path, reinterpret_cast<const std::uint8_t*>(text.data()),
                   text.size());
}

inline std::string read_file_text(const std::string& path) {
  auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

// byte_order: 0 = little endian, 1 = big endian (file layout, not host)
inline std::uint32_t get_u32(const std::uint8_t* p, int byte_order) {
  if (byte_order == 0)
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
           std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
  return std::uint32_t(p[3]) | std::uint32_t(p[2]) << 8 |
         std::uint32_t(p[1]) << 16 | std::uint32_t(p[0]) << 24;
}

inline std::uint16_t get_u16(const std::uint8_t* p, int byte_order) {
  if (byte_order == 0) return std::uint16_t(p[0] | p[1] << 8);
  return std::uint16_t(p[1] | p[0] << 8);
}

inline void put_u32(std::uint8_t* p, std::uint32_t v, int byte_order) {
  if (byte_order == 0) {
    p[0] = v & 0xff; p[1] = (v >> 8) & 0xff; p[2] = (v >> 16) & 0xff; p[3] = (v >> 24) & 0xff;
  } else {
    p[3] = v & 0xff; p[2] = (v >> 8) & 0xff; p[1] = (v >> 16) & 0xff; p[0] = (v >> 24) & 0xff;
  }
}

inline void put_u16(std::uint8_t* p, std::uint16_t v, int byte_order) {
  if (byte_order == 0) {
    p[0] = v & 0xff; p[1] = (v >> 8) & 0xff;
  } else {
    p[1] = v & 0xff; p[0] = (v >> 8) & 0xff;
  }
}

inline float get_f32(const std::uint8_t* p, int byte_order) {
  return std::bit_cast<float>(get_u32(p, byte_order));
}

inline void put_f32(std::uint8_t* p, float v, int byte_order) {
  put_u32(p, std::bit_cast<std::uint32_t>(v), byte_order);
}

inline std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace homcsel::detail
