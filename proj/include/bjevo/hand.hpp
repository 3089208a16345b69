#pragma once

#include <array>
#include <cassert>
#include <initializer_list>
#include <optional>
#include <span>

#include "bjevo/cards.hpp"

namespace bjevo {

using Money = double;

struct HandValue {
  int count = 0;
  bool soft = false;

  bool busted() const { return count > 21; }
  friend constexpr bool operator==(const HandValue&, const HandValue&) = default;
};

/// Best total not above 21 (one ace promoted to 11 when it fits), otherwise
/// the hard total. Soft iff an ace is counted as 11.
constexpr HandValue hand_value(std::span<const Rank> cards) {
  int hard = 0;
  bool has_ace = false;
  for (Rank r : cards) {
    hard += pip_value(r);
    has_ace = has_ace || r == Rank::Ace;
  }
  if (has_ace && hard + 10 <= 21) return {hard + 10, true};
  return {hard, false};
}

/// Original two-card 21. A split hand never holds a natural.
constexpr bool is_natural(std::span<const Rank> cards, bool split_hand = false) {
  return !split_hand && cards.size() == 2 && hand_value(cards).count == 21;
}

class Hand {
 public:
  // A single-deck hand cannot exceed 12 cards without busting.
  static constexpr std::size_t kMaxCards = 16;

  Hand() = default;
  explicit Hand(Money stake) : bet(stake) {}
  Hand(std::initializer_list<Rank> cards, Money stake = 0) : bet(stake) {
    for (Rank r : cards) add(r);
  }

  void add(Rank r) {
    assert(size_ < kMaxCards);
    cards_[size_++] = r;
  }

  std::span<const Rank> cards() const { return {cards_.data(), size_}; }
  std::size_t size() const { return size_; }
  Rank operator[](std::size_t i) const { return cards_[i]; }

  HandValue value() const { return hand_value(cards()); }
  bool busted() const { return value().busted(); }
  bool natural() const { return is_natural(cards(), is_split_hand); }

  /// Two cards of equal value (any two ten-valued cards pair).
  bool is_pair() const {
    return size_ == 2 && value_class(cards_[0]) == value_class(cards_[1]);
  }

  bool split_aces() const { return is_split_hand && origin_split_rank == Rank::Ace; }

  bool is_split_hand = false;
  std::optional<Rank> origin_split_rank;
  Money bet = 0;
  bool doubled = false;

 private:
  std::array<Rank, kMaxCards> cards_{};
  std::size_t size_ = 0;
};

}  // namespace bjevo
