#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bjevo/cards.hpp"
#include "bjevo/hand.hpp"
#include "bjevo/rng.hpp"
#include "bjevo/rules.hpp"

namespace bjevo {

/// Rows indexed by pair card / other card (A..T) or by player count (2..21);
/// columns by dealer up-card class (A..T). 1 = split/double/stand.
template <std::size_t Rows>
using DecisionTable = std::array<std::array<std::uint8_t, kValueClasses>, Rows>;

inline constexpr std::size_t kCardRows = 10;
inline constexpr std::size_t kCountRows = 20;
inline constexpr int kMinCount = 2;

constexpr std::size_t count_row(int count) { return static_cast<std::size_t>(count - kMinCount); }

struct StrategyTables {
  DecisionTable<kCardRows> split{};
  DecisionTable<kCardRows> soft_dd{};
  DecisionTable<kCountRows> hard_dd{};
  DecisionTable<kCountRows> soft_stand{};
  DecisionTable<kCountRows> hard_stand{};

  friend bool operator==(const StrategyTables&, const StrategyTables&) = default;
};

// Chromosome layout: [split | soft_dd | hard_dd | soft_stand | hard_stand],
// every table serialized row by row.
inline constexpr std::size_t kGeneCount = 800;
inline constexpr std::size_t kSplitOffset = 0;
inline constexpr std::size_t kSoftDdOffset = 100;
inline constexpr std::size_t kHardDdOffset = 200;
inline constexpr std::size_t kSoftStandOffset = 400;
inline constexpr std::size_t kHardStandOffset = 600;

enum class Block : std::uint8_t { Split, SoftDd, HardDd, SoftStand, HardStand };

struct BlockInfo {
  Block block;
  std::string_view name;
  std::size_t offset;
  std::size_t rows;
  bool count_indexed;
};

inline constexpr std::array<BlockInfo, 5> kBlocks = {{
    {Block::Split, "SPLIT", kSplitOffset, kCardRows, false},
    {Block::SoftDd, "SOFT_DD", kSoftDdOffset, kCardRows, false},
    {Block::HardDd, "HARD_DD", kHardDdOffset, kCountRows, true},
    {Block::SoftStand, "SOFT_STAND", kSoftStandOffset, kCountRows, true},
    {Block::HardStand, "HARD_STAND", kHardStandOffset, kCountRows, true},
}};

/// Label of row `row` in a block: "A".."T" or "2".."21".
inline std::string row_label(const BlockInfo& info, std::size_t row) {
  if (info.count_indexed) return std::to_string(static_cast<int>(row) + kMinCount);
  return std::string(1, class_symbol(row));
}

/// Gene index of (block, row, dealer column).
constexpr std::size_t gene_index(Block block, std::size_t row, std::size_t column) {
  return kBlocks[static_cast<std::size_t>(block)].offset + row * kValueClasses + column;
}

class CodecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Chromosome {
  std::array<std::uint8_t, kGeneCount> genes{};

  std::uint8_t operator[](std::size_t i) const { return genes[i]; }
  std::uint8_t& operator[](std::size_t i) { return genes[i]; }

  /// Validating constructor from an arbitrary integer vector.
  template <typename Range>
  static Chromosome from_bits(const Range& bits) {
    if (bits.size() != kGeneCount) {
      throw CodecError("chromosome must have " + std::to_string(kGeneCount) + " genes, got " +
                       std::to_string(bits.size()));
    }
    Chromosome c;
    for (std::size_t i = 0; i < kGeneCount; ++i) {
      if (bits[i] != 0 && bits[i] != 1) {
        throw CodecError("gene " + std::to_string(i) + " is not binary");
      }
      c.genes[i] = static_cast<std::uint8_t>(bits[i]);
    }
    return c;
  }

  friend bool operator==(const Chromosome&, const Chromosome&) = default;
};

namespace detail {

template <typename Tables, typename Fn>
void for_each_table(Tables& t, Fn&& fn) {
  fn(kBlocks[0], std::span(t.split));
  fn(kBlocks[1], std::span(t.soft_dd));
  fn(kBlocks[2], std::span(t.hard_dd));
  fn(kBlocks[3], std::span(t.soft_stand));
  fn(kBlocks[4], std::span(t.hard_stand));
}

}  // namespace detail

/// Visits every table of `t` as (BlockInfo, span of rows).
template <typename Fn>
void for_each_table(StrategyTables& t, Fn&& fn) { detail::for_each_table(t, fn); }
template <typename Fn>
void for_each_table(const StrategyTables& t, Fn&& fn) { detail::for_each_table(t, fn); }

inline Chromosome encode(const StrategyTables& tables) {
  Chromosome c;
  for_each_table(tables, [&](const BlockInfo& info, auto rows) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t col = 0; col < kValueClasses; ++col) {
        c.genes[info.offset + r * kValueClasses + col] = rows[r][col];
      }
    }
  });
  return c;
}

inline StrategyTables decode(const Chromosome& c) {
  StrategyTables tables;
  for_each_table(tables, [&](const BlockInfo& info, auto rows) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t col = 0; col < kValueClasses; ++col) {
        const auto g = c.genes[info.offset + r * kValueClasses + col];
        if (g > 1) throw CodecError("gene " + std::to_string(info.offset + r * kValueClasses + col) +
                                    " is not binary");
        rows[r][col] = g;
      }
    }
  });
  return tables;
}

/// Thorp's full-deck basic strategy.
inline const StrategyTables& thorp_baseline() {
  static const StrategyTables tables = [] {
    StrategyTables t;
    t.split = {{
        {1, 1, 1, 1, 1, 1, 1, 1, 1, 1},  // A
        {0, 1, 1, 1, 1, 1, 1, 0, 0, 0},  // 2
        {0, 1, 1, 1, 1, 1, 1, 0, 0, 0},  // 3
        {0, 0, 0, 0, 1, 0, 0, 0, 0, 0},  // 4
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0},  // 5
        {0, 1, 1, 1, 1, 1, 1, 0, 0, 0},  // 6
        {0, 1, 1, 1, 1, 1, 1, 1, 0, 0},  // 7
        {1, 1, 1, 1, 1, 1, 1, 1, 1, 1},  // 8
        {0, 1, 1, 1, 1, 1, 0, 1, 1, 0},  // 9
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0},  // T
    }};
    t.soft_dd = {{
        {0, 0, 0, 0, 1, 1, 0, 0, 0, 0},  // A
        {0, 0, 0, 1, 1, 1, 0, 0, 0, 0},  // 2
        {0, 0, 0, 1, 1, 1, 0, 0, 0, 0},  // 3
        {0, 0, 0, 1, 1, 1, 0, 0, 0, 0},  // 4
        {0, 0, 0, 1, 1, 1, 0, 0, 0, 0},  // 5
        {0, 1, 1, 1, 1, 1, 0, 0, 0, 0},  // 6
        {0, 0, 1, 1, 1, 1, 0, 0, 0, 0},  // 7
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0},  // 8
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0},  // 9
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0},  // T
    }};
    // Hard doubles: 8 vs 5-6, 9 vs 2-6, 10 vs 2-9, 11 vs all.
    t.hard_dd[count_row(8)] = {0, 0, 0, 0, 1, 1, 0, 0, 0, 0};
    t.hard_dd[count_row(9)] = {0, 1, 1, 1, 1, 1, 0, 0, 0, 0};
    t.hard_dd[count_row(10)] = {0, 1, 1, 1, 1, 1, 1, 1, 1, 0};
    t.hard_dd[count_row(11)] = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    // Soft stands: 18 except vs 9 and T, 19 and up always.
    t.soft_stand[count_row(18)] = {1, 1, 1, 1, 1, 1, 1, 1, 0, 0};
    for (int c = 19; c <= 21; ++c) t.soft_stand[count_row(c)].fill(1);
    // Hard stands: 12 vs 4-6, 13-16 vs 2-6, 17 and up always.
    t.hard_stand[count_row(12)] = {0, 0, 0, 1, 1, 1, 0, 0, 0, 0};
    for (int c = 13; c <= 16; ++c) t.hard_stand[count_row(c)] = {0, 1, 1, 1, 1, 1, 0, 0, 0, 0};
    for (int c = 17; c <= 21; ++c) t.hard_stand[count_row(c)].fill(1);
    return t;
  }();
  return tables;
}

enum class Action : std::uint8_t { Split, Double, Stand, Hit };

constexpr std::string_view to_string(Action a) {
  switch (a) {
    case Action::Split: return "split";
    case Action::Double: return "double";
    case Action::Stand: return "stand";
    case Action::Hit: return "hit";
  }
  return "?";
}

/// Basic-strategy decision from the player's cards and the dealer up-card.
/// Precedence: split, then double, then stand/hit. A count of 21 always
/// stands. `can_split` / `can_double` carry the rule and bankroll checks.
inline Action decide(const StrategyTables& t, std::span<const Rank> cards, Rank upcard,
                     bool can_split, bool can_double, bool thorp_refinements = false) {
  const std::size_t up = value_class(upcard);
  const HandValue v = hand_value(cards);
  const bool two_cards = cards.size() == 2;

  if (can_split && two_cards && value_class(cards[0]) == value_class(cards[1]) &&
      t.split[value_class(cards[0])][up] != 0) {
    return Action::Split;
  }
  if (v.count >= 21) return Action::Stand;

  if (can_double && two_cards) {
    bool dd = false;
    if (v.soft) {
      const std::size_t other =
          value_class(cards[0]) == 0 ? value_class(cards[1]) : value_class(cards[0]);
      dd = t.soft_dd[other][up] != 0;
    } else {
      dd = t.hard_dd[count_row(v.count)][up] != 0;
      if (thorp_refinements && v.count == 8 &&
          (value_class(cards[0]) == 5 || value_class(cards[1]) == 5)) {
        dd = false;  // (6,2)
      }
    }
    if (dd) return Action::Double;
  }

  bool stand = v.soft ? t.soft_stand[count_row(v.count)][up] != 0
                      : t.hard_stand[count_row(v.count)][up] != 0;
  if (thorp_refinements && !v.soft && v.count == 16 && cards.size() >= 3 && up == 9) stand = true;
  return stand ? Action::Stand : Action::Hit;
}

inline Action decide(const StrategyTables& t, const Hand& hand, Rank upcard, bool can_split,
                     bool can_double, bool thorp_refinements = false) {
  return decide(t, hand.cards(), upcard, can_split, can_double, thorp_refinements);
}

/// 1 marks genes that can influence play; 0 marks structurally dead genes.
struct ExpressionMask {
  std::array<std::uint8_t, kGeneCount> bits{};

  bool expressed(std::size_t gene) const { return bits[gene] != 0; }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }
};

/// Structural redundancy only: soft counts below 12, any count of 21 (always
/// stands, never doubles), hard counts 2-3 (unreachable), soft double on
/// (A,T). Genes shadowed by a particular strategy's priorities stay expressed.
inline ExpressionMask expression_mask(const RulesConfig& /*rules*/ = {}) {
  ExpressionMask m;
  m.bits.fill(1);
  const auto clear_row = [&](Block b, std::size_t row) {
    for (std::size_t col = 0; col < kValueClasses; ++col) m.bits[gene_index(b, row, col)] = 0;
  };
  for (int c = 2; c <= 11; ++c) clear_row(Block::SoftStand, count_row(c));
  clear_row(Block::SoftStand, count_row(21));
  clear_row(Block::HardStand, count_row(21));
  for (int c = 2; c <= 3; ++c) {
    clear_row(Block::HardStand, count_row(c));
    clear_row(Block::HardDd, count_row(c));
  }
  clear_row(Block::HardDd, count_row(21));
  clear_row(Block::SoftDd, 9);
  return m;
}

/// Every gene an independent fair coin.
inline Chromosome random_strategy(Rng& rng) {
  Chromosome c;
  for (auto& g : c.genes) g = rng.coin() ? 1 : 0;
  return c;
}

/// Number of expressed genes on which two chromosomes differ.
inline std::size_t expressed_distance(const Chromosome& a, const Chromosome& b,
                                      const ExpressionMask& mask) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < kGeneCount; ++i) n += mask.expressed(i) && a[i] != b[i];
  return n;
}

}  // namespace bjevo
