#pragma once

#include <cstddef>
#include <span>

namespace kschemo {

// Fixed-order pairwise summation. The split points depend only on the
// length, so every reduction is reproducible bit for bit.
template <class Fn>
double pairwise_sum(std::size_t begin, std::size_t end, Fn&& term) {
  constexpr std::size_t kBlock = 64;
  const std::size_t len = end - begin;
  if (len <= kBlock) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = begin + len / 2;
  return pairwise_sum(begin, mid, term) + pairwise_sum(mid, end, term);
}

inline double pairwise_sum(std::span<const double> xs) {
  return pairwise_sum(0, xs.size(), [&](std::size_t i) { return xs[i]; });
}

}  // namespace kschemo
