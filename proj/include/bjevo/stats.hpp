#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "bjevo/engine.hpp"
#include "bjevo/parallel.hpp"
#include "bjevo/rng.hpp"
#include "bjevo/strategy.hpp"

namespace bjevo {

struct EvalConfig {
  std::size_t games = 1000;    // M
  std::size_t rounds = 10000;  // N
  Money bet = 2;
  Money bankroll = 1000;
  std::uint64_t seed = 0;
  RulesConfig rules{};
  RankSet removed_ranks{};
};

struct Interval {
  double lo = 0;
  double hi = 0;

  double width() const { return hi - lo; }
};

struct EvaluationReport {
  std::size_t games = 0;
  std::size_t rounds = 0;
  Money bet = 0;
  Money initial_bankroll = 0;

  Money mean_final_bankroll = 0;
  Money sd_final_bankroll = 0;
  Interval ci95;
  double edge = 0;
  Interval edge_ci95;

  double p_win = 0;
  double p_loss = 0;
  double p_push = 0;
  double mean_hands = 0;    // T averaged over games
  double mean_doubles = 0;  // doubled hands averaged over games
  double split_freq = 0;    // splits per hand
  double dd_freq = 0;       // doubled hands per hand
  double split_win = 0;     // per split hand
  double split_loss = 0;
  double dd_win = 0;        // per doubled hand
  double dd_loss = 0;
  std::size_t broke_games = 0;

  std::vector<Money> final_bankrolls;
};

class StatsError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Two-sided standard-normal quantile for a central `level` interval.
inline double normal_critical_value(double level) {
  const boost::math::normal_distribution<double> normal;
  return boost::math::quantile(normal, 0.5 + level / 2);
}

/// Normal-approximation interval mean +/- z * sd / sqrt(n).
inline Interval confidence_interval(double mean, double sd, std::size_t n, double level = 0.95) {
  if (n < 2) throw StatsError("confidence interval needs at least two samples");
  if (sd < 0) throw StatsError("standard deviation must be non-negative");
  const double half = normal_critical_value(level) * sd / std::sqrt(static_cast<double>(n));
  return {mean - half, mean + half};
}

/// Player edge: mean profit over the mean money in action, where a doubled
/// hand puts 2b in action and a split adds a hand.
inline double edge(double mean_final_bankroll, double initial_bankroll, double bet,
                   double mean_hands, double mean_doubles) {
  const double action = bet * (mean_hands + mean_doubles);
  if (action <= 0) throw StatsError("edge undefined: no money was bet");
  return (mean_final_bankroll - initial_bankroll) / action;
}

inline double edge(const EvaluationReport& r) {
  return edge(r.mean_final_bankroll, r.initial_bankroll, r.bet, r.mean_hands, r.mean_doubles);
}

struct Moments {
  double mean = 0;
  double sd = 0;  // sample (n - 1) standard deviation
};

inline Moments moments(std::span<const double> values) {
  Moments m;
  if (values.empty()) return m;
  m.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() < 2) return m;
  double ss = 0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return m;
}

/// Folds per-game statistics into a report.
inline EvaluationReport summarize(std::span<const SessionStats> sessions, const EvalConfig& cfg) {
  EvaluationReport r;
  r.games = sessions.size();
  r.rounds = cfg.rounds;
  r.bet = cfg.bet;
  r.initial_bankroll = cfg.bankroll;
  r.final_bankrolls.reserve(sessions.size());

  SessionStats total;
  for (const SessionStats& s : sessions) {
    r.final_bankrolls.push_back(s.final_bankroll);
    total.hands_played += s.hands_played;
    total.wins += s.wins;
    total.losses += s.losses;
    total.pushes += s.pushes;
    total.splits += s.splits;
    total.split_hands += s.split_hands;
    total.split_wins += s.split_wins;
    total.split_losses += s.split_losses;
    total.dds += s.dds;
    total.dd_wins += s.dd_wins;
    total.dd_losses += s.dd_losses;
    r.broke_games += s.went_broke ? 1 : 0;
  }
  const Moments m = moments(r.final_bankrolls);
  r.mean_final_bankroll = m.mean;
  r.sd_final_bankroll = m.sd;

  const auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  const double games = static_cast<double>(std::max<std::size_t>(r.games, 1));
  r.mean_hands = static_cast<double>(total.hands_played) / games;
  r.mean_doubles = static_cast<double>(total.dds) / games;
  r.p_win = ratio(total.wins, total.hands_played);
  r.p_loss = ratio(total.losses, total.hands_played);
  r.p_push = ratio(total.pushes, total.hands_played);
  r.split_freq = ratio(total.splits, total.hands_played);
  r.dd_freq = ratio(total.dds, total.hands_played);
  r.split_win = ratio(total.split_wins, total.split_hands);
  r.split_loss = ratio(total.split_losses, total.split_hands);
  r.dd_win = ratio(total.dd_wins, total.dds);
  r.dd_loss = ratio(total.dd_losses, total.dds);

  if (r.mean_hands > 0) r.edge = edge(r);
  if (r.games >= 2) {
    r.ci95 = confidence_interval(r.mean_final_bankroll, r.sd_final_bankroll, r.games);
    const double action = r.bet * (r.mean_hands + r.mean_doubles);
    if (action > 0) {
      r.edge_ci95 = {(r.ci95.lo - r.initial_bankroll) / action,
                     (r.ci95.hi - r.initial_bankroll) / action};
    }
  } else {
    r.ci95 = {r.mean_final_bankroll, r.mean_final_bankroll};
    r.edge_ci95 = {r.edge, r.edge};
  }
  return r;
}

/// Session config of game `g` of an evaluation.
inline SessionConfig evaluation_session(const EvalConfig& cfg, std::size_t game) {
  SessionConfig s;
  s.rounds = cfg.rounds;
  s.bet = cfg.bet;
  s.bankroll = cfg.bankroll;
  s.seed = derive_seed(cfg.seed, stream::kEvaluation, game);
  s.rules = cfg.rules;
  s.removed_ranks = cfg.removed_ranks;
  return s;
}

/// Plays `games` independent sessions and aggregates them.
inline EvaluationReport evaluate_strategy(const StrategyTables& strategy, const EvalConfig& cfg,
                                          std::size_t threads = 1) {
  if (cfg.games < 1) throw StatsError("evaluation needs at least one game");
  std::vector<SessionStats> sessions(cfg.games);
  parallel_for(cfg.games, threads, [&](std::size_t g) {
    sessions[g] = play_session(strategy, evaluation_session(cfg, g));
  });
  return summarize(sessions, cfg);
}

struct TTestResult {
  double t = 0;
  std::size_t df = 0;
  double pooled_sd = 0;
};

/// Student's two-sample t statistic with pooled standard deviation.
inline TTestResult pooled_t_test(double mean1, double sd1, std::size_t n1, double mean2, double sd2,
                                 std::size_t n2) {
  if (n1 < 2 || n2 < 2) throw StatsError("t-test needs at least two samples per group");
  TTestResult r;
  r.df = n1 + n2 - 2;
  const double a = static_cast<double>(n1);
  const double b = static_cast<double>(n2);
  r.pooled_sd = std::sqrt(((a - 1) * sd1 * sd1 + (b - 1) * sd2 * sd2) / static_cast<double>(r.df));
  const double diff = mean1 - mean2;
  if (r.pooled_sd == 0) {
    r.t = diff == 0 ? 0.0
                    : std::copysign(std::numeric_limits<double>::infinity(), diff);
    return r;
  }
  r.t = diff / (r.pooled_sd * std::sqrt(1 / a + 1 / b));
  return r;
}

struct PValue {
  double p = 1;
  std::string_view method;
};

/// Two-sided p-value of a t statistic: exact Student t for df <= 200,
/// normal approximation above.
inline PValue two_sided_p_value(double t, std::size_t df) {
  if (std::isinf(t)) return {0.0, df > 200 ? "normal approximation" : "student t"};
  if (df > 200) return {std::erfc(std::abs(t) / std::sqrt(2.0)), "normal approximation"};
  const boost::math::students_t_distribution<double> dist(static_cast<double>(df));
  return {2 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), "student t"};
}

// Dealer final outcomes, in table order.
enum class DealerOutcome : std::uint8_t { D17, D18, D19, D20, D21, Natural, Bust };
inline constexpr std::size_t kDealerOutcomes = 7;
inline constexpr std::array<std::string_view, kDealerOutcomes> kDealerOutcomeNames = {
    "17", "18", "19", "20", "21", "natural", "bust"};

using DealerDistribution = std::array<double, kDealerOutcomes>;

/// Probability of drawing a card of each value class from an infinite deck.
constexpr double infinite_deck_probability(std::size_t value_class) {
  return value_class == 9 ? 4.0 / 13.0 : 1.0 / 13.0;
}

inline DealerOutcome classify_dealer(int final_count, bool natural) {
  if (natural) return DealerOutcome::Natural;
  if (final_count > 21) return DealerOutcome::Bust;
  return static_cast<DealerOutcome>(final_count - 17);
}

namespace detail {

inline void dealer_recurse(int hard, bool has_ace, int cards, double p, bool stands_soft_17,
                           DealerDistribution& out) {
  const bool soft = has_ace && hard + 10 <= 21;
  const int count = soft ? hard + 10 : hard;
  if (cards == 2 && count == 21) {
    out[static_cast<std::size_t>(DealerOutcome::Natural)] += p;
    return;
  }
  if (count > 21) {
    out[static_cast<std::size_t>(DealerOutcome::Bust)] += p;
    return;
  }
  if (count > 17 || (count == 17 && (stands_soft_17 || !soft))) {
    out[static_cast<std::size_t>(count - 17)] += p;
    return;
  }
  for (std::size_t c = 0; c < kValueClasses; ++c) {
    dealer_recurse(hard + static_cast<int>(c) + 1, has_ace || c == 0, cards + 1,
                   p * infinite_deck_probability(c), stands_soft_17, out);
  }
}

}  // namespace detail

/// Exact dealer outcome distribution for an up-card, drawing with
/// replacement (ten-valued 4/13, every other value 1/13), by exhaustive
/// recursion over draw sequences.
inline DealerDistribution dealer_outcome_oracle(Rank upcard, bool stands_soft_17 = true) {
  DealerDistribution out{};
  detail::dealer_recurse(pip_value(upcard), upcard == Rank::Ace, 1, 1.0, stands_soft_17, out);
  return out;
}

/// Monte Carlo counterpart of the oracle: dealer_play fed by an infinite-deck
/// card source.
inline DealerDistribution dealer_monte_carlo(Rank upcard, std::size_t trials, std::uint64_t seed,
                                             bool stands_soft_17 = true) {
  Rng rng(seed);
  const auto draw = [&rng] {
    const auto k = rng.below(13);
    return static_cast<Rank>(k);
  };
  DealerDistribution counts{};
  for (std::size_t i = 0; i < trials; ++i) {
    const Rank hole = draw();
    const std::array<Rank, 2> two{upcard, hole};
    const bool natural = is_natural(two);
    const int final_count = natural ? 21 : dealer_play(upcard, hole, draw, stands_soft_17);
    counts[static_cast<std::size_t>(classify_dealer(final_count, natural))] += 1;
  }
  for (double& c : counts) c /= static_cast<double>(trials);
  return counts;
}

inline double total_variation(const DealerDistribution& a, const DealerDistribution& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d / 2;
}

struct HistogramBin {
  double lo = 0;
  double hi = 0;
  std::size_t count = 0;
};

/// Equal-width bins over [min, max]; the top edge is inclusive. All-equal
/// values collapse into one bin.
inline std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
  if (values.empty()) throw StatsError("histogram needs at least one value");
  if (bins == 0) throw StatsError("histogram needs at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) return {{lo, hi, values.size()}};
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    out[i].lo = lo + width * static_cast<double>(i);
    out[i].hi = i + 1 == bins ? hi : lo + width * static_cast<double>(i + 1);
  }
  for (double v : values) {
    auto i = static_cast<std::size_t>((v - lo) / width);
    out[std::min(i, bins - 1)].count += 1;
  }
  return out;
}

}  // namespace bjevo
