#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bjevo/engine.hpp"
#include "bjevo/parallel.hpp"
#include "bjevo/rng.hpp"
#include "bjevo/strategy.hpp"

namespace bjevo {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class InitMode : std::uint8_t { Random, Thorp, File };

constexpr std::string_view to_string(InitMode m) {
  switch (m) {
    case InitMode::Random: return "random";
    case InitMode::Thorp: return "thorp";
    case InitMode::File: return "file";
  }
  return "?";
}

struct EvolutionConfig {
  std::size_t population = 5000;   // M
  std::size_t generations = 1000;  // tau
  double alpha = 0.05;             // selection rate
  double propagation = 1 - 1e-4;   // pi; 1 - pi is the mutation rate
  std::size_t rounds = 10000;      // N per fitness session
  Money bet = 2;
  Money bankroll = 10000;          // B0, reset every generation
  InitMode init = InitMode::Random;
  std::optional<Chromosome> initial_strategy;  // used when init == File
  std::uint64_t seed = 0;
  RulesConfig rules{};
  RankSet removed_ranks{};
  // Use phi_i / sum(phi) when every score is positive.
  bool raw_fitness_weights = false;
};

/// floor(alpha * M), tolerant of binary rounding in alpha * M.
inline std::size_t survivor_count(std::size_t population, double alpha) {
  return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(population) + 1e-9));
}

inline void validate(const EvolutionConfig& cfg) {
  if (!(cfg.alpha > 0 && cfg.alpha < 1)) throw ConfigError("alpha must lie in (0, 1)");
  if (survivor_count(cfg.population, cfg.alpha) < 2) {
    throw ConfigError("alpha * M must be at least 2 (got alpha=" + std::to_string(cfg.alpha) +
                      ", M=" + std::to_string(cfg.population) + ")");
  }
  if (!(cfg.propagation > 0 && cfg.propagation <= 1)) throw ConfigError("pi must lie in (0, 1]");
  if (cfg.rounds < 1) throw ConfigError("rounds per session must be at least 1");
  if (!(cfg.bet > 0) || cfg.bankroll < cfg.bet) throw ConfigError("need B0 >= b > 0");
  if (cfg.init == InitMode::File && !cfg.initial_strategy) {
    throw ConfigError("file initialisation needs an initial strategy");
  }
}

struct GenerationReport {
  std::size_t generation = 0;  // t, starting at 1
  double phi_hat = 0;          // mean fit of the alpha*M best
  double population_mean = 0;
  double best = 0;
  std::size_t mutations = 0;   // gene flips while breeding this generation's offspring
};

struct Survivor {
  Chromosome chromosome;
  double phi = 0;
  std::size_t index = 0;  // position in the evaluated population
};

/// Return on bankroll, (B_T - B0) / B0.
inline double fit_score(Money final_bankroll, Money initial_bankroll) {
  return (final_bankroll - initial_bankroll) / initial_bankroll;
}

inline SessionConfig fitness_session(const EvolutionConfig& cfg, std::size_t generation,
                                     std::size_t index) {
  SessionConfig s;
  s.rounds = cfg.rounds;
  s.bet = cfg.bet;
  s.bankroll = cfg.bankroll;
  s.seed = derive_seed(cfg.seed, stream::kFitness, generation, index);
  s.rules = cfg.rules;
  s.removed_ranks = cfg.removed_ranks;
  return s;
}

/// One fresh-bankroll session per strategy; scores are gathered by index.
inline std::vector<double> evaluate_population(std::span<const Chromosome> population,
                                               const EvolutionConfig& cfg,
                                               std::size_t generation, std::size_t threads = 1) {
  std::vector<double> scores(population.size());
  parallel_for(population.size(), threads, [&](std::size_t i) {
    const StrategyTables tables = decode(population[i]);
    const SessionStats stats = play_session(tables, fitness_session(cfg, generation, i));
    scores[i] = fit_score(stats.final_bankroll, cfg.bankroll);
  });
  return scores;
}

/// Truncation selection: the floor(alpha*M) best, best first, ties to the
/// lower index.
inline std::vector<Survivor> select(std::span<const Chromosome> population,
                                    std::span<const double> scores, double alpha) {
  if (population.size() != scores.size()) throw ConfigError("one score per strategy required");
  const std::size_t keep = survivor_count(population.size(), alpha);
  if (keep < 2) throw ConfigError("alpha * M must be at least 2");
  std::vector<std::size_t> order(population.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<Survivor> out;
  out.reserve(keep);
  for (std::size_t k = 0; k < keep; ++k) {
    out.push_back({population[order[k]], scores[order[k]], order[k]});
  }
  return out;
}

inline constexpr double kWeightFloor = 1e-6;

/// Fit-proportional weights, normalised to 1. Scores are shifted by their
/// minimum (plus a small floor) so losing strategies get valid weights; with
/// `raw_if_positive` and all scores positive, phi_i / sum(phi) is used as is.
inline std::vector<double> breeding_weights(std::span<const double> phi,
                                            bool raw_if_positive = false) {
  std::vector<double> w(phi.begin(), phi.end());
  if (w.empty()) return w;
  const bool all_positive = std::all_of(w.begin(), w.end(), [](double x) { return x > 0; });
  if (!(raw_if_positive && all_positive)) {
    const double lo = *std::min_element(w.begin(), w.end());
    for (double& x : w) x = x - lo + kWeightFloor;
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

inline std::vector<double> survivor_scores(std::span<const Survivor> survivors) {
  std::vector<double> phi;
  phi.reserve(survivors.size());
  for (const Survivor& s : survivors) phi.push_back(s.phi);
  return phi;
}

/// Draws an index with probability proportional to weights, never `exclude`.
inline std::size_t sample_weighted(std::span<const double> weights, Rng& rng,
                                   std::optional<std::size_t> exclude = std::nullopt) {
  double total = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (i != exclude) total += weights[i];
  }
  double u = rng.uniform() * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (i == exclude) continue;
    last = i;
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return last;
}

/// One offspring. Agreeing genes are copied with probability pi and flipped
/// otherwise; disagreeing genes come from parent i with probability
/// w_i / (w_i + w_j).
inline Chromosome breed(const Chromosome& parent_i, const Chromosome& parent_j, double w_i,
                        double w_j, double pi, Rng& rng, std::size_t* mutations = nullptr) {
  const double take_i = w_i + w_j > 0 ? w_i / (w_i + w_j) : 0.5;
  const double flip = 1 - pi;
  Chromosome child;
  std::size_t flips = 0;
  for (std::size_t a = 0; a < kGeneCount; ++a) {
    if (parent_i[a] == parent_j[a]) {
      child[a] = parent_i[a];
      if (rng.uniform() < flip) {
        child[a] ^= 1;
        ++flips;
      }
    } else {
      child[a] = rng.uniform() < take_i ? parent_i[a] : parent_j[a];
    }
  }
  if (mutations) *mutations += flips;
  return child;
}

struct GenerationStep {
  std::vector<Chromosome> next_population;
  GenerationReport report;
  std::vector<double> scores;
  std::vector<Survivor> survivors;
};

/// Produces (1 - alpha) M offspring from distinct survivor pairs.
inline std::vector<Chromosome> breed_offspring(std::span<const Survivor> survivors,
                                               std::size_t count, const EvolutionConfig& cfg,
                                               std::size_t generation,
                                               std::size_t* mutations = nullptr) {
  const std::vector<double> phi = survivor_scores(survivors);
  const std::vector<double> w = breeding_weights(phi, cfg.raw_fitness_weights);
  Rng rng(derive_seed(cfg.seed, stream::kBreeding, generation));
  std::vector<Chromosome> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = sample_weighted(w, rng);
    const std::size_t j = sample_weighted(w, rng, i);
    out.push_back(breed(survivors[i].chromosome, survivors[j].chromosome, w[i], w[j],
                        cfg.propagation, rng, mutations));
  }
  return out;
}

/// Evaluate, select, breed. Survivors are carried unchanged into the next
/// population, ahead of the offspring.
inline GenerationStep step_generation(std::span<const Chromosome> population,
                                      const EvolutionConfig& cfg, std::size_t generation,
                                      std::size_t threads = 1) {
  GenerationStep step;
  step.scores = evaluate_population(population, cfg, generation, threads);
  step.survivors = select(population, step.scores, cfg.alpha);

  GenerationReport& rep = step.report;
  rep.generation = generation;
  double top = 0;
  for (const Survivor& s : step.survivors) top += s.phi;
  rep.phi_hat = top / static_cast<double>(step.survivors.size());
  rep.population_mean = std::accumulate(step.scores.begin(), step.scores.end(), 0.0) /
                        static_cast<double>(step.scores.size());
  rep.best = step.survivors.front().phi;

  step.next_population.reserve(population.size());
  for (const Survivor& s : step.survivors) step.next_population.push_back(s.chromosome);
  auto offspring = breed_offspring(step.survivors, population.size() - step.survivors.size(), cfg,
                                   generation, &rep.mutations);
  std::move(offspring.begin(), offspring.end(), std::back_inserter(step.next_population));
  return step;
}

inline std::vector<Chromosome> initial_population(const EvolutionConfig& cfg) {
  std::vector<Chromosome> pop(cfg.population);
  switch (cfg.init) {
    case InitMode::Random:
      for (std::size_t i = 0; i < pop.size(); ++i) {
        Rng rng(derive_seed(cfg.seed, stream::kInit, i));
        pop[i] = random_strategy(rng);
      }
      break;
    case InitMode::Thorp:
      std::fill(pop.begin(), pop.end(), encode(thorp_baseline()));
      break;
    case InitMode::File:
      std::fill(pop.begin(), pop.end(), *cfg.initial_strategy);
      break;
  }
  return pop;
}

struct EvolutionResult {
  std::vector<GenerationReport> history;
  std::vector<Chromosome> final_population;
  // The final population is evaluated once more (generation tau + 1) so its
  // best strategies can be averaged.
  std::vector<double> final_scores;
  std::vector<Survivor> final_survivors;
};

using GenerationObserver =
    std::function<void(const GenerationReport&, std::span<const Survivor> survivors)>;

inline EvolutionResult run_evolution(const EvolutionConfig& cfg, std::size_t threads = 1,
                                     const GenerationObserver& observer = {}) {
  validate(cfg);
  EvolutionResult result;
  std::vector<Chromosome> pop = initial_population(cfg);
  result.history.reserve(cfg.generations);
  for (std::size_t t = 1; t <= cfg.generations; ++t) {
    GenerationStep step = step_generation(pop, cfg, t, threads);
    if (observer) observer(step.report, step.survivors);
    result.history.push_back(step.report);
    pop = std::move(step.next_population);
  }
  result.final_scores = evaluate_population(pop, cfg, cfg.generations + 1, threads);
  result.final_survivors = select(pop, result.final_scores, cfg.alpha);
  result.final_population = std::move(pop);
  return result;
}

struct MeanStrategy {
  std::array<double, kGeneCount> genes{};

  friend bool operator==(const MeanStrategy&, const MeanStrategy&) = default;
};

/// Per-gene weighted average of the survivors, weights from breeding_weights.
inline MeanStrategy mean_strategy(std::span<const Survivor> survivors,
                                  bool raw_if_positive = false) {
  if (survivors.empty()) throw ConfigError("mean strategy needs at least one survivor");
  const std::vector<double> phi = survivor_scores(survivors);
  const std::vector<double> w = breeding_weights(phi, raw_if_positive);
  double total = 0;
  for (double x : w) total += x;
  MeanStrategy m;
  for (std::size_t a = 0; a < kGeneCount; ++a) {
    double acc = 0;
    for (std::size_t k = 0; k < survivors.size(); ++k) {
      if (survivors[k].chromosome[a]) acc += w[k];
    }
    // Same summation order as `total`, so unanimous genes come out exactly 0 or 1.
    m.genes[a] = acc == total ? 1.0 : acc / total;
  }
  return m;
}

/// Gene is 1 iff its mean is at least `threshold`.
inline Chromosome extract_binary(const MeanStrategy& mean, double threshold) {
  if (!(threshold > 0 && threshold <= 1)) throw ConfigError("threshold must lie in (0, 1]");
  Chromosome c;
  for (std::size_t a = 0; a < kGeneCount; ++a) c[a] = mean.genes[a] >= threshold ? 1 : 0;
  return c;
}

}  // namespace bjevo
