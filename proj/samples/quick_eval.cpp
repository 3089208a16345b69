// Plays the basic strategy for a few hundred games and prints the edge, then
// runs a tiny evolution from random strategies.

#include <cstdio>

#include "bjevo/evolution.hpp"
#include "bjevo/stats.hpp"

int main() {
  bjevo::EvalConfig eval;
  eval.games = 200;
  eval.rounds = 10000;
  eval.seed = 7;
  const auto report = bjevo::evaluate_strategy(bjevo::thorp_baseline(), eval, 0);
  std::printf("basic strategy: mean %.2f, edge %+.3f%%, CI [%.2f, %.2f]\n",
              report.mean_final_bankroll, 100 * report.edge, report.ci95.lo, report.ci95.hi);

  bjevo::EvolutionConfig cfg;
  cfg.population = 100;
  cfg.generations = 10;
  cfg.rounds = 1000;
  cfg.seed = 7;
  bjevo::run_evolution(cfg, 0, [](const bjevo::GenerationReport& g, auto) {
    std::printf("t=%2zu phi_hat=%+.4f pop_mean=%+.4f\n", g.generation, g.phi_hat,
                g.population_mean);
  });
}
