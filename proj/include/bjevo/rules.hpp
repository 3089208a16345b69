#pragma once

#include "bjevo/cards.hpp"

namespace bjevo {

/// Table rules. Defaults are the single-deck, player-favourable rule set:
/// natural pays 3:2, dealer stands on soft 17, double on any two cards (not
/// 21), double after splitting anything but aces, no resplits, split aces may
/// take one hit, reshuffle after a third of the deck is dealt.
struct RulesConfig {
  Ratio natural_payout{3, 2};
  bool dealer_stands_soft_17 = true;
  bool double_after_split_non_aces = true;
  bool resplit_allowed = false;
  int split_ace_max_hits = 1;
  // When false, original hands may double on hard 10 and 11 only.
  bool double_on_any_two_except_21 = true;
  // Never double (6,2); stand on hard 16 of three or more cards against a ten.
  bool thorp_refinements = false;
  Ratio reshuffle_fraction{1, 3};

  friend bool operator==(const RulesConfig&, const RulesConfig&) = default;
};

}  // namespace bjevo
