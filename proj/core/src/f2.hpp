#pragma once

// Dense linear algebra over the two-element field, for the small
// verification backend. Not part of the installed interface.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace halluzig::f2 {

class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

  std::size_t size() const noexcept { return bits_; }
  bool test(std::size_t i) const noexcept { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set(std::size_t i) noexcept { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void flip(std::size_t i) noexcept { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }

  BitVec& operator^=(const BitVec& other) noexcept {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
    return *this;
  }

  bool none() const noexcept {
    for (auto w : words_) {
      if (w != 0) return false;
    }
    return true;
  }

  /// Lowest set bit, or size() when empty.
  std::size_t lowest() const noexcept {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      if (words_[w] != 0) return w * 64 + static_cast<std::size_t>(std::countr_zero(words_[w]));
    }
    return bits_;
  }

 private:
  std::size_t bits_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Incrementally built echelon basis. Each stored row has a pivot bit that
/// is clear in every row stored after it, so one pass in insertion order
/// clears every pivot position of a vector. Optionally tracks, per row, the
/// combination of inserted vectors that produced it.
class Echelon {
 public:
  Echelon(std::size_t bits, std::size_t max_inserts)
      : bits_(bits), max_inserts_(max_inserts) {}

  /// Clears every pivot position of v; records the rows used in `combo`
  /// when given.
  void reduce(BitVec& v, BitVec* combo = nullptr) const {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (v.test(pivots_[r])) {
        v ^= rows_[r];
        if (combo) *combo ^= combos_[r];
      }
    }
  }

  /// Inserts v. Combinations are tracked for the first `max_inserts`
  /// insertions only. Returns the combination
  /// of inserted vectors summing to zero when v was dependent.
  std::optional<BitVec> insert(BitVec v) {
    BitVec combo(max_inserts_);
    if (inserted_ < max_inserts_) combo.set(inserted_);
    ++inserted_;
    reduce(v, &combo);
    if (v.none()) return combo;
    pivots_.push_back(v.lowest());
    rows_.push_back(std::move(v));
    combos_.push_back(std::move(combo));
    return std::nullopt;
  }

  bool is_pivot(std::size_t bit) const noexcept {
    for (auto p : pivots_) {
      if (p == bit) return true;
    }
    return false;
  }

  std::size_t rank() const noexcept { return rows_.size(); }
  std::size_t bits() const noexcept { return bits_; }

 private:
  std::size_t bits_;
  std::size_t max_inserts_;
  std::size_t inserted_ = 0;
  std::vector<BitVec> rows_;
  std::vector<BitVec> combos_;
  std::vector<std::size_t> pivots_;
};

}  // namespace halluzig::f2
