#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bjevo/rng.hpp"

namespace bjevo {

enum class Rank : std::uint8_t {
  Ace,
  Two,
  Three,
  Four,
  Five,
  Six,
  Seven,
  Eight,
  Nine,
  Ten,
  Jack,
  Queen,
  King,
};

inline constexpr std::size_t kRankCount = 13;
inline constexpr std::size_t kCardsPerRank = 4;
inline constexpr std::size_t kFullDeckSize = kRankCount * kCardsPerRank;

/// Number of distinct card values (A, 2..9, ten-valued). Also the number of
/// rows in the pair tables and columns in every strategy table.
inline constexpr std::size_t kValueClasses = 10;

inline constexpr std::array<Rank, kRankCount> kAllRanks = {
    Rank::Ace,   Rank::Two,   Rank::Three, Rank::Four, Rank::Five,
    Rank::Six,   Rank::Seven, Rank::Eight, Rank::Nine, Rank::Ten,
    Rank::Jack,  Rank::Queen, Rank::King};

constexpr std::size_t rank_index(Rank r) { return static_cast<std::size_t>(r); }

/// 0 for an ace, 1..8 for 2..9, 9 for any ten-valued card.
constexpr std::size_t value_class(Rank r) {
  return std::min<std::size_t>(rank_index(r), 9);
}

/// Hard value: aces count 1, faces 10.
constexpr int pip_value(Rank r) { return static_cast<int>(value_class(r)) + 1; }

constexpr char symbol(Rank r) { return "A23456789TJQK"[rank_index(r)]; }

/// Symbol of a value class (A, 2..9, T).
constexpr char class_symbol(std::size_t value_class) { return "A23456789T"[value_class]; }

/// Representative rank of a value class.
constexpr Rank class_rank(std::size_t value_class) { return static_cast<Rank>(value_class); }

constexpr std::optional<Rank> parse_rank(char c) {
  constexpr std::string_view symbols = "A23456789TJQK";
  if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  const auto pos = symbols.find(c);
  if (pos == std::string_view::npos) return std::nullopt;
  return static_cast<Rank>(pos);
}

using RankSet = std::bitset<kRankCount>;

/// Parses a comma-separated list of rank symbols ("T,J,Q,K", "5", "").
inline RankSet parse_rank_set(std::string_view text) {
  RankSet set;
  for (char c : text) {
    if (c == ',' || c == ' ') continue;
    const auto r = parse_rank(c);
    if (!r) throw std::invalid_argument(std::string("unknown rank symbol '") + c + "'");
    set.set(rank_index(*r));
  }
  return set;
}

inline std::string format_rank_set(const RankSet& set) {
  std::string out;
  for (Rank r : kAllRanks) {
    if (!set.test(rank_index(r))) continue;
    if (!out.empty()) out += ',';
    out += symbol(r);
  }
  return out;
}

/// Exact rational, used for payout ratios and the reshuffle fraction.
struct Ratio {
  int num = 1;
  int den = 1;

  constexpr double value() const { return static_cast<double>(num) / den; }
  friend constexpr bool operator==(const Ratio&, const Ratio&) = default;
};

class DeckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single deck dealt from a seeded shuffle. Cards stay out until the deck is
/// reshuffled between rounds once a fixed fraction has been dealt.
class Deck {
 public:
  Deck(const RankSet& removed, std::uint64_t seed, Ratio reshuffle_fraction = {1, 3})
      : rng_(seed) {
    if (removed.all()) throw DeckError("all ranks removed: deck would be empty");
    if (reshuffle_fraction.num <= 0 || reshuffle_fraction.den <= 0 ||
        reshuffle_fraction.num > reshuffle_fraction.den) {
      throw DeckError("reshuffle fraction must lie in (0, 1]");
    }
    for (Rank r : kAllRanks) {
      if (removed.test(rank_index(r))) continue;
      cards_.insert(cards_.end(), kCardsPerRank, r);
    }
    const auto n = cards_.size();
    const auto num = static_cast<std::size_t>(reshuffle_fraction.num);
    const auto den = static_cast<std::size_t>(reshuffle_fraction.den);
    threshold_ = (n * num + den - 1) / den;
    shuffle(std::span<Rank>(cards_), rng_);
  }

  std::size_t size() const { return cards_.size(); }
  std::size_t dealt_count() const { return dealt_; }
  std::size_t remaining() const { return cards_.size() - dealt_; }
  std::size_t reshuffle_threshold() const { return threshold_; }

  /// Current card order; positions below dealt_count() are out of the deck.
  std::span<const Rank> cards() const { return cards_; }

  /// Next card. If the deck runs dry mid-round, cards from earlier rounds are
  /// shuffled back in while the current round's cards stay out.
  Rank deal() {
    if (dealt_ == cards_.size()) refill_mid_round();
    return cards_[dealt_++];
  }

  /// Between rounds: reshuffles the whole deck once the threshold is reached.
  bool maybe_reshuffle() {
    if (dealt_ < threshold_) return false;
    reshuffle();
    return true;
  }

  /// Round boundary: reshuffle check, then remember where the round starts.
  bool begin_round() {
    const bool reshuffled = maybe_reshuffle();
    round_start_ = dealt_;
    return reshuffled;
  }

  void reshuffle() {
    shuffle(std::span<Rank>(cards_), rng_);
    dealt_ = 0;
    round_start_ = 0;
  }

 private:
  void refill_mid_round() {
    if (round_start_ == 0) throw DeckError("deck exhausted within a single round");
    std::rotate(cards_.begin(), cards_.begin() + static_cast<std::ptrdiff_t>(round_start_),
                cards_.end());
    const std::size_t in_play = cards_.size() - round_start_;
    shuffle(std::span<Rank>(cards_).subspan(in_play), rng_);
    dealt_ = in_play;
    round_start_ = 0;
  }

  Rng rng_;
  std::vector<Rank> cards_;
  std::size_t dealt_ = 0;
  std::size_t round_start_ = 0;
  std::size_t threshold_ = 0;
};

/// Card source drawing with replacement from a full deck: each rank has
/// probability 1/13 on every draw.
class InfiniteDeck {
 public:
  explicit InfiniteDeck(std::uint64_t seed) : rng_(seed) {}

  Rank deal() { return static_cast<Rank>(rng_.below(kRankCount)); }
  bool begin_round() { return false; }

 private:
  Rng rng_;
};

inline Deck new_deck(const RankSet& removed, std::uint64_t seed) { return Deck(removed, seed); }

}  // namespace bjevo
