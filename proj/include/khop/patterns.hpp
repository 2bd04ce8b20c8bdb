#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "khop/rng.hpp"

namespace khop {

// A bipolar network state. Values are kept both as signed bytes (for
// arithmetic) and as packed bits, bit = 1 for +1, (for Hamming distance).
class State {
 public:
  State() = default;

  // All-(+1) state of length n.
  explicit State(std::size_t n) : values_(n, 1), bits_(word_count(n), 0) {
    for (std::size_t i = 0; i < n; ++i) bits_[i / 64] |= (1ULL << (i % 64));
  }

  explicit State(std::vector<std::int8_t> values) : values_(std::move(values)) {
    bits_.assign(word_count(values_.size()), 0);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i] == 1) {
        bits_[i / 64] |= (1ULL << (i % 64));
      } else if (values_[i] != -1) {
        throw std::invalid_argument("State: element " + std::to_string(i) +
                                    " is not -1 or +1");
      }
    }
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::int8_t operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const std::int8_t> values() const noexcept { return values_; }
  std::span<const std::uint64_t> bits() const noexcept { return bits_; }

  void set(std::size_t i, std::int8_t v) {
    if (v != 1 && v != -1) throw std::invalid_argument("State::set: value must be -1 or +1");
    values_[i] = v;
    const std::uint64_t mask = 1ULL << (i % 64);
    if (v == 1) {
      bits_[i / 64] |= mask;
    } else {
      bits_[i / 64] &= ~mask;
    }
  }

  void flip(std::size_t i) {
    values_[i] = static_cast<std::int8_t>(-values_[i]);
    bits_[i / 64] ^= (1ULL << (i % 64));
  }

  State negated() const {
    State out = *this;
    for (std::size_t i = 0; i < size(); ++i) out.flip(i);
    return out;
  }

  friend bool operator==(const State& a, const State& b) noexcept {
    return a.bits_ == b.bits_ && a.values_.size() == b.values_.size();
  }

  static constexpr std::size_t word_count(std::size_t n) noexcept { return (n + 63) / 64; }

 private:
  std::vector<std::int8_t> values_;
  std::vector<std::uint64_t> bits_;
};

// Number of positions where a and b differ.
inline std::size_t hamming(const State& a, const State& b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming: length mismatch");
  const auto wa = a.bits();
  const auto wb = b.bits();
  std::size_t d = 0;
  for (std::size_t w = 0; w < wa.size(); ++w) d += std::popcount(wa[w] ^ wb[w]);
  return d;
}

// Normalized dot product (1/N) sum_i a_i b_i.
inline double overlap(const State& a, const State& b) {
  if (a.size() != b.size()) throw std::invalid_argument("overlap: length mismatch");
  const auto va = a.values();
  const auto vb = b.values();
  long long dot = 0;
  for (std::size_t i = 0; i < va.size(); ++i) dot += va[i] * vb[i];
  return static_cast<double>(dot) / static_cast<double>(va.size());
}

// P stored bipolar patterns of dimension N.
class PatternSet {
 public:
  PatternSet() = default;
  PatternSet(std::vector<State> rows, std::uint64_t seed) : rows_(std::move(rows)), seed_(seed) {
    if (rows_.empty()) throw std::invalid_argument("PatternSet: needs at least one pattern");
    n_ = rows_.front().size();
    for (const auto& r : rows_) {
      if (r.size() != n_) throw std::invalid_argument("PatternSet: ragged rows");
    }
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t p() const noexcept { return rows_.size(); }
  std::uint64_t seed() const noexcept { return seed_; }
  const State& operator[](std::size_t mu) const noexcept { return rows_[mu]; }
  const std::vector<State>& rows() const noexcept { return rows_; }

  friend bool operator==(const PatternSet&, const PatternSet&) = default;

 private:
  std::vector<State> rows_;
  std::size_t n_ = 0;
  std::uint64_t seed_ = 0;
};

// Row-major stream: element (mu, i) is bit (k % 64) of the (k / 64)-th
// SplitMix64 output, k = mu * N + i; bit 1 maps to +1.
inline PatternSet generate_patterns(std::size_t n, std::size_t p, std::uint64_t seed) {
  if (n == 0 || p == 0) throw std::invalid_argument("generate_patterns: n and p must be positive");
  SplitMix64 rng(seed);
  std::uint64_t word = 0;
  std::size_t used = 64;
  std::vector<State> rows;
  rows.reserve(p);
  for (std::size_t mu = 0; mu < p; ++mu) {
    std::vector<std::int8_t> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (used == 64) {
        word = rng();
        used = 0;
      }
      v[i] = ((word >> used++) & 1ULL) ? std::int8_t{1} : std::int8_t{-1};
    }
    rows.emplace_back(std::move(v));
  }
  return PatternSet(std::move(rows), seed);
}

// Flip count that realizes an overlap of `similarity`: round-half-up of
// N(1 - s)/2. The 1e-9 slack absorbs representation error in s so that
// exact half-integers (e.g. N=500, s=0.05 -> 237.5) always round up.
inline std::size_t flip_count(std::size_t n, double similarity) {
  if (!(similarity >= 0.0 && similarity <= 1.0)) {
    throw std::invalid_argument("corrupt: similarity must lie in [0, 1]");
  }
  const double half = static_cast<double>(n) * (1.0 - similarity) / 2.0;
  return static_cast<std::size_t>(std::floor(half + 0.5 + 1e-9));
}

// Copy of `pattern` with exactly flip_count(N, similarity) distinct positions
// sign-flipped. Positions come from a partial Fisher-Yates shuffle driven by
// SplitMix64(seed).
inline State corrupt(const State& pattern, double similarity, std::uint64_t seed) {
  const std::size_t n = pattern.size();
  const std::size_t k = flip_count(n, similarity);
  State out = pattern;
  if (k == 0) return out;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t pick = j + static_cast<std::size_t>(rng.below(n - j));
    std::swap(idx[j], idx[pick]);
    out.flip(idx[j]);
  }
  return out;
}

}  // namespace khop
