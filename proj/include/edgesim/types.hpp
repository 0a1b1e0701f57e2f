/*
 * Copyright 2026 The edgesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef EDGESIM_TYPES_HPP
#define EDGESIM_TYPES_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <type_traits>

namespace edgesim {

/// Virtual time and durations. Integer microseconds keep event ordering exact.
using Micros = std::chrono::microseconds;

inline Micros from_ms(double ms) { return Micros{std::llround(ms * 1000.0)}; }
inline Micros from_s(double s) { return Micros{std::llround(s * 1'000'000.0)}; }
inline double to_ms(Micros t) { return static_cast<double>(t.count()) / 1000.0; }
inline double to_s(Micros t) { return static_cast<double>(t.count()) / 1'000'000.0; }

enum class NodeId : std::uint32_t {};
enum class ReplicaId : std::uint32_t {};
enum class RequestId : std::uint64_t {};
enum class UserId : std::uint32_t {};

template <class E>
constexpr auto index_of(E e) noexcept {
    return static_cast<std::underlying_type_t<E>>(e);
}

enum class TopologyKind : std::uint8_t { single_site, multi_site };

} // namespace edgesim

#endif // EDGESIM_TYPES_HPP
