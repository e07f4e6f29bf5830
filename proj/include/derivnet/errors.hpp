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

#ifndef DERIVNET_ERRORS_HPP
#define DERIVNET_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace derivnet {

/// Caller violated a precondition (shape mismatch, bad order, empty batch...).
class usage_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Arithmetic produced a non-finite value. Carries the offending pattern
/// index when one is known.
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string &what, std::ptrdiff_t pattern = -1)
      : std::runtime_error(what), pattern_(pattern) {}

  std::ptrdiff_t pattern() const noexcept { return pattern_; }

private:
  std::ptrdiff_t pattern_;
};

namespace detail {

inline void require(bool cond, const char *msg) {
  if (!cond)
    throw usage_error(msg);
}

inline void require(bool cond, const std::string &msg) {
  if (!cond)
    throw usage_error(msg);
}

} // namespace detail
} // namespace derivnet

#endif
