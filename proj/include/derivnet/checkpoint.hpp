// Copyright 2026 The derivnet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/// @file checkpoint.hpp
/// Weight checkpoint file:
///
///   "DNWT" | version u8 (=1) | precision u8 (4 = float32, 8 = float64)
///   | layer count u32 | layer sizes u32 x count
///   | per weight layer: row-major weight matrix, then thresholds
///
/// All integers and reals are little-endian.

#ifndef DERIVNET_CHECKPOINT_HPP
#define DERIVNET_CHECKPOINT_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "derivnet/network.hpp"

namespace derivnet {

inline constexpr std::array<char, 4> kCheckpointMagic{'D', 'N', 'W', 'T'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

namespace detail {

template <class U> void write_le(std::ostream &os, U v) {
  static_assert(std::is_trivially_copyable_v<U>);
  std::array<unsigned char, sizeof(U)> b;
  std::memcpy(b.data(), &v, sizeof(U));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(b.begin(), b.end());
  os.write(reinterpret_cast<const char *>(b.data()), sizeof(U));
}

template <class U> U read_le(std::istream &is) {
  std::array<unsigned char, sizeof(U)> b;
  is.read(reinterpret_cast<char *>(b.data()), sizeof(U));
  if (!is)
    throw usage_error("checkpoint: truncated file");
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(b.begin(), b.end());
  U v;
  std::memcpy(&v, b.data(), sizeof(U));
  return v;
}

} // namespace detail

template <class T> void save_params(std::ostream &os, const Params<T> &p) {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  os.write(kCheckpointMagic.data(), 4);
  detail::write_le<std::uint8_t>(os, kCheckpointVersion);
  detail::write_le<std::uint8_t>(os, sizeof(T));
  const auto &layers = p.config().layers;
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(layers.size()));
  for (int n : layers)
    detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(n));
  // Flat storage already follows the file order.
  for (T v : p.values())
    detail::write_le<T>(os, v);
}

struct CheckpointHeader {
  std::uint8_t version = 0;
  Precision precision = Precision::single;
  std::vector<int> layers;
};

inline CheckpointHeader read_checkpoint_header(std::istream &is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), 4);
  if (!is || magic != kCheckpointMagic)
    throw usage_error("checkpoint: bad magic");
  CheckpointHeader h;
  h.version = detail::read_le<std::uint8_t>(is);
  if (h.version != kCheckpointVersion)
    throw usage_error("checkpoint: unsupported version " + std::to_string(h.version));
  const auto bytes = detail::read_le<std::uint8_t>(is);
  if (bytes != 4 && bytes != 8)
    throw usage_error("checkpoint: unknown precision byte");
  h.precision = bytes == 4 ? Precision::single : Precision::double_;
  const auto n = detail::read_le<std::uint32_t>(is);
  if (n < 3 || n > 1024)
    throw usage_error("checkpoint: implausible layer count");
  for (std::uint32_t i = 0; i < n; ++i)
    h.layers.push_back(static_cast<int>(detail::read_le<std::uint32_t>(is)));
  return h;
}

/// Reads parameters stored in precision T; a file in the other precision is
/// a usage error.
template <class T> Params<T> load_params(std::istream &is) {
  const CheckpointHeader h = read_checkpoint_header(is);
  const Precision want = sizeof(T) == 4 ? Precision::single : Precision::double_;
  if (h.precision != want)
    throw usage_error("checkpoint: stored precision does not match requested type");
  Params<T> p(NetworkConfig{h.layers, want});
  for (T &v : p.values())
    v = detail::read_le<T>(is);
  return p;
}

template <class T> void save_params(const std::string &path, const Params<T> &p) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw usage_error("checkpoint: cannot open " + path);
  save_params(os, p);
}

template <class T> Params<T> load_params(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw usage_error("checkpoint: cannot open " + path);
  return load_params<T>(is);
}

} // namespace derivnet

#endif
