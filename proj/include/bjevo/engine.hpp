#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bjevo/cards.hpp"
#include "bjevo/hand.hpp"
#include "bjevo/rules.hpp"
#include "bjevo/strategy.hpp"

namespace bjevo {

/// Dealer draws to 17 or more, counting an ace as 11 unless that busts.
/// `draw` is any callable returning the next Rank. Returns the final count
/// (above 21 means bust).
template <typename Draw>
int dealer_play(Rank upcard, Rank hole, Draw&& draw, bool stands_soft_17 = true) {
  Hand dealer{upcard, hole};
  for (;;) {
    const HandValue v = dealer.value();
    if (v.count > 17 || (v.count == 17 && (stands_soft_17 || !v.soft))) return v.count;
    dealer.add(draw());
  }
}

inline int dealer_play(Rank upcard, Rank hole, Deck& deck, bool stands_soft_17 = true) {
  return dealer_play(upcard, hole, [&] { return deck.deal(); }, stands_soft_17);
}

enum class Outcome : std::uint8_t { Win, Loss, Push };

struct HandResult {
  Outcome outcome = Outcome::Push;
  Money payout = 0;
  bool doubled = false;
  bool split = false;
};

/// Settles one resolved hand against the dealer's final count. Naturals are
/// handled before play and never reach here.
inline HandResult settle_hand(const Hand& hand, int dealer_count) {
  HandResult r;
  r.doubled = hand.doubled;
  r.split = hand.is_split_hand;
  const int count = hand.value().count;
  if (count > 21) {
    r.outcome = Outcome::Loss;
  } else if (dealer_count > 21 || count > dealer_count) {
    r.outcome = Outcome::Win;
  } else if (count == dealer_count) {
    r.outcome = Outcome::Push;
  } else {
    r.outcome = Outcome::Loss;
  }
  r.payout = r.outcome == Outcome::Win ? hand.bet : r.outcome == Outcome::Loss ? -hand.bet : 0;
  return r;
}

inline Money settle(std::span<const Hand> hands, int dealer_count) {
  Money total = 0;
  for (const Hand& h : hands) total += settle_hand(h, dealer_count).payout;
  return total;
}

inline constexpr std::size_t kMaxHands = 4;

struct RoundRecord {
  std::array<HandResult, kMaxHands> hands{};
  std::size_t hand_count = 0;
  Money payout = 0;
  bool was_split = false;
  int splits = 0;
  int dd_hands = 0;
  bool natural_player = false;
  bool natural_dealer = false;
  int dealer_count = 0;

  std::span<const HandResult> results() const { return {hands.data(), hand_count}; }
};

namespace detail {

inline bool double_permitted(const Hand& hand, const RulesConfig& rules) {
  if (hand.size() != 2) return false;
  if (hand.is_split_hand) return !hand.split_aces() && rules.double_after_split_non_aces;
  if (rules.double_on_any_two_except_21) return true;
  const HandValue v = hand.value();
  return !v.soft && (v.count == 10 || v.count == 11);
}

}  // namespace detail

/// Plays one full round with one player hand (plus any split hands) against
/// the dealer. `bankroll` is the player's money before the round and limits
/// additional split/double stakes; the returned payout is the net change.
/// `deck` is a Deck or any source with deal() and begin_round().
template <typename CardSource>
RoundRecord play_round(const StrategyTables& strategy, CardSource& deck, Money bankroll,
                       Money bet, const RulesConfig& rules = {}) {
  deck.begin_round();
  RoundRecord rec;

  std::array<Hand, kMaxHands> hands;
  std::size_t hand_count = 1;
  hands[0] = Hand(bet);
  hands[0].add(deck.deal());
  hands[0].add(deck.deal());
  const Rank up = deck.deal();
  const Rank hole = deck.deal();
  const std::array<Rank, 2> dealer_cards{up, hole};

  rec.natural_player = hands[0].natural();
  rec.natural_dealer = is_natural(dealer_cards);

  if (rec.natural_dealer || rec.natural_player) {
    HandResult r;
    if (rec.natural_dealer && rec.natural_player) {
      r.outcome = Outcome::Push;
    } else if (rec.natural_dealer) {
      r.outcome = Outcome::Loss;
      r.payout = -bet;
    } else {
      r.outcome = Outcome::Win;
      r.payout = bet * rules.natural_payout.num / rules.natural_payout.den;
    }
    rec.hands[0] = r;
    rec.hand_count = 1;
    rec.payout = r.payout;
    rec.dealer_count = hand_value(dealer_cards).count;
    return rec;
  }

  Money committed = bet;
  for (std::size_t h = 0; h < hand_count; ++h) {
    int ace_hits = 0;
    for (;;) {
      Hand& hand = hands[h];
      const HandValue v = hand.value();
      if (v.count >= 21) break;
      if (hand.split_aces() && hand.size() >= 2 && ace_hits >= rules.split_ace_max_hits) break;

      const bool can_afford = bankroll >= committed + hand.bet;
      const bool can_split = can_afford && hand.is_pair() && hand_count < kMaxHands &&
                             (!hand.is_split_hand || rules.resplit_allowed);
      const bool can_double = can_afford && detail::double_permitted(hand, rules);
      const Action action =
          decide(strategy, hand.cards(), up, can_split, can_double, rules.thorp_refinements);

      if (action == Action::Split) {
        const Rank first = hand[0];
        const Rank second = hand[1];
        committed += hand.bet;
        for (std::size_t k = hand_count; k > h + 1; --k) hands[k] = hands[k - 1];
        ++hand_count;
        Hand left(hand.bet);
        Hand right(hand.bet);
        left.add(first);
        right.add(second);
        left.is_split_hand = right.is_split_hand = true;
        left.origin_split_rank = right.origin_split_rank = first;
        left.add(deck.deal());
        right.add(deck.deal());
        hands[h] = left;
        hands[h + 1] = right;
        rec.was_split = true;
        ++rec.splits;
        continue;
      }
      if (action == Action::Double) {
        committed += hand.bet;
        hand.bet *= 2;
        hand.doubled = true;
        hand.add(deck.deal());
        break;
      }
      if (action == Action::Stand) break;
      hand.add(deck.deal());
      if (hand.split_aces()) ++ace_hits;
    }
  }

  bool any_live = false;
  for (std::size_t h = 0; h < hand_count; ++h) any_live = any_live || !hands[h].busted();
  rec.dealer_count = any_live ? dealer_play(
                                    up, hole, [&] { return deck.deal(); },
                                    rules.dealer_stands_soft_17)
                              : hand_value(dealer_cards).count;

  rec.hand_count = hand_count;
  for (std::size_t h = 0; h < hand_count; ++h) {
    rec.hands[h] = settle_hand(hands[h], rec.dealer_count);
    rec.payout += rec.hands[h].payout;
    rec.dd_hands += hands[h].doubled ? 1 : 0;
  }
  return rec;
}

struct SessionConfig {
  std::size_t rounds = 10000;  // N
  Money bet = 2;               // b
  Money bankroll = 1000;       // B0
  std::uint64_t seed = 0;
  RulesConfig rules{};
  RankSet removed_ranks{};
  bool record_trace = false;
};

struct SessionStats {
  Money final_bankroll = 0;
  std::size_t hands_played = 0;  // T, split hands included
  std::size_t dealt_rounds = 0;
  std::size_t wins = 0;
  std::size_t losses = 0;
  std::size_t pushes = 0;
  std::size_t splits = 0;
  std::size_t split_hands = 0;
  std::size_t split_wins = 0;
  std::size_t split_losses = 0;
  std::size_t dds = 0;
  std::size_t dd_wins = 0;
  std::size_t dd_losses = 0;
  std::size_t player_naturals = 0;
  std::size_t dealer_naturals = 0;
  bool went_broke = false;
  std::vector<Money> bankroll_trace;  // bankroll after each round, if requested

  void add(const RoundRecord& rec) {
    ++dealt_rounds;
    hands_played += rec.hand_count;
    splits += static_cast<std::size_t>(rec.splits);
    player_naturals += rec.natural_player ? 1 : 0;
    dealer_naturals += rec.natural_dealer ? 1 : 0;
    for (const HandResult& h : rec.results()) {
      const bool win = h.outcome == Outcome::Win;
      const bool loss = h.outcome == Outcome::Loss;
      wins += win;
      losses += loss;
      pushes += h.outcome == Outcome::Push;
      if (h.split) {
        ++split_hands;
        split_wins += win;
        split_losses += loss;
      }
      if (h.doubled) {
        ++dds;
        dd_wins += win;
        dd_losses += loss;
      }
    }
  }
};

/// Plays up to `rounds` rounds, stopping early once the bankroll cannot cover
/// the bet.
inline SessionStats play_session(const StrategyTables& strategy, const SessionConfig& cfg) {
  Deck deck(cfg.removed_ranks, cfg.seed, cfg.rules.reshuffle_fraction);
  SessionStats stats;
  Money bankroll = cfg.bankroll;
  if (cfg.record_trace) stats.bankroll_trace.reserve(cfg.rounds);
  for (std::size_t r = 0; r < cfg.rounds && bankroll >= cfg.bet; ++r) {
    const RoundRecord rec = play_round(strategy, deck, bankroll, cfg.bet, cfg.rules);
    bankroll += rec.payout;
    stats.add(rec);
    if (cfg.record_trace) stats.bankroll_trace.push_back(bankroll);
  }
  stats.final_bankroll = bankroll;
  stats.went_broke = bankroll < cfg.bet;
  return stats;
}

}  // namespace bjevo
