#pragma once

#include <array>
#include <cstddef>

namespace rtp {

/// Internal state of a particle; the value is the drift direction.
enum class Spin : int { minus = -1, plus = 1 };

constexpr int sign(Spin s) { return static_cast<int>(s); }

constexpr Spin flipped(Spin s) { return s == Spin::plus ? Spin::minus : Spin::plus; }

/// Storage index of a layer: +1 -> 0, -1 -> 1.
constexpr std::size_t layer(Spin s) { return s == Spin::plus ? 0 : 1; }

constexpr Spin spin_of_layer(std::size_t l) { return l == 0 ? Spin::plus : Spin::minus; }

inline constexpr std::array<Spin, 2> kSpins{Spin::plus, Spin::minus};

}  // namespace rtp
