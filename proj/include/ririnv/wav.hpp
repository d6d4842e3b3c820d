// Copyright 2026 The ririnv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "ririnv/core.hpp"

// Mono RIFF/WAVE files. Writing is always 32-bit IEEE float; reading also
// accepts 16-bit PCM. Multichannel files are rejected.

namespace ririnv::wav {

inline constexpr std::uint16_t kFormatPcm = 1;
inline constexpr std::uint16_t kFormatFloat = 3;
inline constexpr std::uint16_t kFormatExtensible = 0xFFFE;

namespace detail {

inline void put_u16(std::vector<char>& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

inline void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_tag(std::vector<char>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline Error io_error(const std::filesystem::path& path, const std::string& what) {
  return Error(ErrorKind::kIo, path.string() + ": " + what);
}

}  // namespace detail

/// Encodes samples as a float32 mono WAVE image (little endian).
inline std::vector<char> encode(const ImpulseResponse& ir) {
  static_assert(sizeof(float) == 4);
  const auto n = static_cast<std::uint32_t>(ir.size());
  const auto rate = static_cast<std::uint32_t>(std::lround(ir.sample_rate()));
  const std::uint32_t data_bytes = n * 4;
  std::vector<char> out;
  out.reserve(58 + data_bytes);
  detail::put_tag(out, "RIFF");
  detail::put_u32(out, 50 + data_bytes);
  detail::put_tag(out, "WAVE");
  detail::put_tag(out, "fmt ");
  detail::put_u32(out, 18);
  detail::put_u16(out, kFormatFloat);
  detail::put_u16(out, 1);
  detail::put_u32(out, rate);
  detail::put_u32(out, rate * 4);
  detail::put_u16(out, 4);
  detail::put_u16(out, 32);
  detail::put_u16(out, 0);  // cbSize
  // non-PCM files carry a fact chunk
  detail::put_tag(out, "fact");
  detail::put_u32(out, 4);
  detail::put_u32(out, n);
  detail::put_tag(out, "data");
  detail::put_u32(out, data_bytes);
  for (double s : ir.samples()) {
    const float f = static_cast<float>(s);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    detail::put_u32(out, bits);
  }
  return out;
}

inline ImpulseResponse decode(const std::vector<char>& bytes,
                              const std::filesystem::path& origin = "<memory>") {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  if (size < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw detail::io_error(origin, "not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const unsigned char* chunk = p + pos;
    const std::uint32_t len = detail::get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (len > size - body) throw detail::io_error(origin, "truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) throw detail::io_error(origin, "short fmt chunk");
      format = detail::get_u16(p + body);
      channels = detail::get_u16(p + body + 2);
      rate = detail::get_u32(p + body + 4);
      bits = detail::get_u16(p + body + 14);
      if (format == kFormatExtensible && len >= 26) format = detail::get_u16(p + body + 24);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw detail::io_error(origin, "data chunk before fmt chunk");
      if (channels != 1) throw detail::io_error(origin, "only mono files are supported");
      if (rate == 0) throw detail::io_error(origin, "zero sample rate");
      std::vector<double> samples;
      if (format == kFormatFloat && bits == 32) {
        samples.resize(len / 4);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          const std::uint32_t raw = detail::get_u32(p + body + 4 * i);
          float f;
          std::memcpy(&f, &raw, 4);
          samples[i] = f;
        }
      } else if (format == kFormatPcm && bits == 16) {
        samples.resize(len / 2);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          const auto raw = static_cast<std::int16_t>(detail::get_u16(p + body + 2 * i));
          samples[i] = raw / 32768.0;
        }
      } else {
        throw detail::io_error(origin, "unsupported sample format " + std::to_string(format) +
                                           "/" + std::to_string(bits) + " bit");
      }
      if (samples.empty()) throw detail::io_error(origin, "empty data chunk");
      return ImpulseResponse(std::move(samples), static_cast<double>(rate));
    }
    pos = body + len + (len & 1u);
  }
  throw detail::io_error(origin, "no data chunk");
}

inline void write(const std::filesystem::path& path, const ImpulseResponse& ir) {
  const auto bytes = encode(ir);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw detail::io_error(path, "cannot open for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw detail::io_error(path, "write failed");
}

inline ImpulseResponse read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw detail::io_error(path, "cannot open for reading");
  std::vector<char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode(bytes, path);
}

}  // namespace ririnv::wav
