// bjevo: evaluate, evolve and compare blackjack strategies from the command line.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "bjevo/engine.hpp"
#include "bjevo/evolution.hpp"
#include "bjevo/io.hpp"
#include "bjevo/rng.hpp"
#include "bjevo/stats.hpp"
#include "bjevo/strategy.hpp"

namespace fs = std::filesystem;
using namespace bjevo;

namespace {

constexpr std::uint64_t kDefaultSeed = 0x5EED;

enum Exit : int { kOk = 0, kConfigError = 1, kIoError = 2 };

struct Common {
  std::string seed = std::to_string(kDefaultSeed);
  std::size_t threads = 0;
  bool refinements = false;
  std::string removed;
  std::string out_dir = ".";
};

struct EvalFlags {
  std::string strategy = "thorp";
  std::size_t games = 1000;
  std::size_t rounds = 10000;
  double bet = 2;
  double bankroll = 1000;
  std::size_t bins = 20;
};

struct EvolveFlags {
  std::size_t pop = 5000;
  std::size_t generations = 1000;
  double alpha = 0.05;
  double mutation = 1e-4;
  std::size_t rounds = 10000;
  double bet = 2;
  double bankroll = 10000;
  std::string init = "random";
  std::size_t snapshot_every = 100;
  double threshold = 0.95;
  bool raw_weights = false;
};

struct CompareFlags {
  std::string first;
  std::string second;
  bool same_seeds = false;
};

std::uint64_t resolve_seed(const std::string& text) {
  if (text == "random") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &used, 0);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw ConfigError("--seed must be an unsigned integer or 'random', got '" + text + "'");
  }
  return v;
}

RulesConfig rules_from(const Common& c) {
  RulesConfig r;
  r.thorp_refinements = c.refinements;
  return r;
}

StrategyTables resolve_strategy(const std::string& spec) {
  if (spec == "thorp") return thorp_baseline();
  return read_strategy(spec);
}

fs::path prepare_out_dir(const Common& c) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void add_run_metadata(KeyValues& kv, std::uint64_t seed, const Common& c) {
  kv.add("prng", std::string(kPrngName));
  kv.add("seed_derivation", std::string(kSeedDerivation));
  kv.add("seed", std::to_string(seed));
  kv.add("rules_refinements", std::string(c.refinements ? "true" : "false"));
  kv.add("removed_ranks", format_rank_set(parse_rank_set(c.removed)));
}

void print_report(const std::string& title, const EvaluationReport& r) {
  std::printf("%s\n", title.c_str());
  std::printf("  games x rounds        %zu x %zu (bet %.2f, bankroll %.2f)\n", r.games, r.rounds,
              r.bet, r.initial_bankroll);
  std::printf("  mean final bankroll   %.2f (sd %.2f)\n", r.mean_final_bankroll,
              r.sd_final_bankroll);
  std::printf("  95%% CI                [%.2f, %.2f]\n", r.ci95.lo, r.ci95.hi);
  std::printf("  edge                  %+.4f%%  (95%% CI [%+.4f%%, %+.4f%%])\n", 100 * r.edge,
              100 * r.edge_ci95.lo, 100 * r.edge_ci95.hi);
  std::printf("  win / loss / push     %.4f / %.4f / %.4f\n", r.p_win, r.p_loss, r.p_push);
  std::printf("  split freq, W / L     %.4f, %.4f / %.4f\n", r.split_freq, r.split_win,
              r.split_loss);
  std::printf("  double freq, W / L    %.4f, %.4f / %.4f\n", r.dd_freq, r.dd_win, r.dd_loss);
  std::printf("  games gone broke      %zu\n", r.broke_games);
}

EvalConfig eval_config(const EvalFlags& f, const Common& c, std::uint64_t seed) {
  EvalConfig cfg;
  cfg.games = f.games;
  cfg.rounds = f.rounds;
  cfg.bet = f.bet;
  cfg.bankroll = f.bankroll;
  cfg.seed = seed;
  cfg.rules = rules_from(c);
  cfg.removed_ranks = parse_rank_set(c.removed);
  if (cfg.games < 2) throw ConfigError("--games must be at least 2");
  if (cfg.rounds < 1) throw ConfigError("--rounds must be at least 1");
  if (!(cfg.bet > 0) || cfg.bankroll < cfg.bet) throw ConfigError("need bankroll >= bet > 0");
  return cfg;
}

int cmd_eval(const EvalFlags& f, const Common& c) {
  const std::uint64_t seed = resolve_seed(c.seed);
  const EvalConfig cfg = eval_config(f, c, seed);
  const StrategyTables strategy = resolve_strategy(f.strategy);
  const fs::path dir = prepare_out_dir(c);

  const EvaluationReport r = evaluate_strategy(strategy, cfg, c.threads);

  KeyValues kv;
  kv.add("strategy", f.strategy);
  add_run_metadata(kv, seed, c);
  const KeyValues values = report_values(r);
  for (const auto& [k, v] : values.entries()) kv.add(k, v);
  write_file(dir / "eval_report.txt", kv.str());
  write_file(dir / "eval_histogram.csv", format_histogram(histogram(r.final_bankrolls, f.bins)));
  write_file(dir / "eval_final_bankrolls.csv", format_final_bankrolls(r.final_bankrolls));

  print_report("strategy " + f.strategy + ", seed " + std::to_string(seed), r);
  return kOk;
}

int cmd_compare(const EvalFlags& f, const CompareFlags& cf, const Common& c) {
  const std::uint64_t seed = resolve_seed(c.seed);
  const EvalConfig cfg_a = eval_config(f, c, seed);
  EvalConfig cfg_b = cfg_a;
  if (!cf.same_seeds) cfg_b.seed = derive_seed(seed, stream::kCompareSecond);
  const StrategyTables a = resolve_strategy(cf.first);
  const StrategyTables b = resolve_strategy(cf.second);
  const fs::path dir = prepare_out_dir(c);

  const EvaluationReport ra = evaluate_strategy(a, cfg_a, c.threads);
  const EvaluationReport rb = evaluate_strategy(b, cfg_b, c.threads);
  const TTestResult t = pooled_t_test(ra.mean_final_bankroll, ra.sd_final_bankroll, ra.games,
                                      rb.mean_final_bankroll, rb.sd_final_bankroll, rb.games);
  const PValue p = two_sided_p_value(t.t, t.df);

  KeyValues kv;
  kv.add("first", cf.first);
  kv.add("second", cf.second);
  add_run_metadata(kv, seed, c);
  kv.add("same_seeds", std::string(cf.same_seeds ? "true" : "false"));
  const KeyValues va = report_values(ra);
  const KeyValues vb = report_values(rb);
  for (const auto& [k, v] : va.entries()) kv.add("first." + k, v);
  for (const auto& [k, v] : vb.entries()) kv.add("second." + k, v);
  kv.add("t", t.t);
  kv.add("df", t.df);
  kv.add("pooled_sd", t.pooled_sd);
  kv.add("p_two_sided", p.p);
  kv.add("p_method", std::string(p.method));
  kv.add("confidence", 1 - p.p);
  write_file(dir / "compare_report.txt", kv.str());

  print_report("first: " + cf.first, ra);
  print_report("second: " + cf.second, rb);
  std::printf("t = %.4f, df = %zu, two-sided p = %.4g (%s), confidence 1-p = %.1f%%\n", t.t, t.df,
              p.p, std::string(p.method).c_str(), 100 * (1 - p.p));
  return kOk;
}

int cmd_evolve(const EvolveFlags& f, const Common& c) {
  const std::uint64_t seed = resolve_seed(c.seed);
  EvolutionConfig cfg;
  cfg.population = f.pop;
  cfg.generations = f.generations;
  cfg.alpha = f.alpha;
  cfg.propagation = 1 - f.mutation;
  cfg.rounds = f.rounds;
  cfg.bet = f.bet;
  cfg.bankroll = f.bankroll;
  cfg.seed = seed;
  cfg.rules = rules_from(c);
  cfg.removed_ranks = parse_rank_set(c.removed);
  cfg.raw_fitness_weights = f.raw_weights;
  if (f.init == "random") {
    cfg.init = InitMode::Random;
  } else if (f.init == "thorp") {
    cfg.init = InitMode::Thorp;
  } else {
    cfg.init = InitMode::File;
    cfg.initial_strategy = encode(read_strategy(f.init));
  }
  if (!(f.mutation >= 0 && f.mutation < 1)) throw ConfigError("--mutation must lie in [0, 1)");
  if (!(f.threshold > 0 && f.threshold <= 1)) throw ConfigError("--threshold must lie in (0, 1]");
  validate(cfg);
  const fs::path dir = prepare_out_dir(c);

  KeyValues meta;
  add_run_metadata(meta, seed, c);
  meta.add("init", f.init);
  meta.add("population", cfg.population);
  meta.add("generations", cfg.generations);
  meta.add("alpha", cfg.alpha);
  meta.add("mutation", f.mutation);
  meta.add("rounds", cfg.rounds);
  meta.add("bet", cfg.bet);
  meta.add("bankroll", cfg.bankroll);
  meta.add("threshold", f.threshold);
  meta.add("raw_fitness_weights", std::string(f.raw_weights ? "true" : "false"));
  meta.add("survivors", survivor_count(cfg.population, cfg.alpha));
  write_file(dir / "evolve_run.txt", meta.str());

  const std::size_t print_every = std::max<std::size_t>(1, cfg.generations / 20);
  const auto observer = [&](const GenerationReport& g, std::span<const Survivor> survivors) {
    if (f.snapshot_every && g.generation % f.snapshot_every == 0) {
      write_mean_strategy(mean_strategy(survivors, cfg.raw_fitness_weights),
                          dir / format("mean_strategy_t%06zu.txt", g.generation));
    }
    if (g.generation % print_every == 0 || g.generation == 1) {
      std::printf("t=%5zu  phi_hat=%+.5f  pop_mean=%+.5f  best=%+.5f  mutations=%zu\n",
                  g.generation, g.phi_hat, g.population_mean, g.best, g.mutations);
      std::fflush(stdout);
    }
  };
  const EvolutionResult result = run_evolution(cfg, c.threads, observer);

  write_generation_log(result.history, dir / "generation_log.csv");
  const MeanStrategy mean = mean_strategy(result.final_survivors, cfg.raw_fitness_weights);
  write_mean_strategy(mean, dir / "mean_strategy_final.txt");
  const Chromosome extracted = extract_binary(mean, f.threshold);
  write_strategy(decode(extracted), dir / "strategy_final.txt");

  const ExpressionMask mask = expression_mask(cfg.rules);
  std::printf("final strategy differs from Thorp in %zu of %zu expressed genes\n",
              expressed_distance(extracted, encode(thorp_baseline()), mask), mask.count());
  std::printf("outputs written to %s\n", dir.string().c_str());
  return kOk;
}

int cmd_export_thorp(const Common& c) {
  const fs::path dir = prepare_out_dir(c);
  const fs::path path = dir / "thorp_strategy.txt";
  write_strategy(thorp_baseline(), path);
  std::printf("wrote %s\n", path.string().c_str());
  return kOk;
}

int cmd_oracle(const Common& c, bool stands_soft_17) {
  const fs::path dir = prepare_out_dir(c);
  std::string csv = "upcard";
  for (auto name : kDealerOutcomeNames) csv += ',' + std::string(name);
  csv += '\n';
  std::printf("up ");
  for (auto name : kDealerOutcomeNames) std::printf("%9s", std::string(name).c_str());
  std::printf("\n");
  for (std::size_t v = 0; v < kValueClasses; ++v) {
    const DealerDistribution d = dealer_outcome_oracle(class_rank(v), stands_soft_17);
    csv += class_symbol(v);
    std::printf(" %c ", class_symbol(v));
    for (double p : d) {
      csv += ',' + format_double(p);
      std::printf("%9.4f", p);
    }
    csv += '\n';
    std::printf("\n");
  }
  write_file(dir / "dealer_oracle.csv", csv);
  return kOk;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Run seed (unsigned integer or 'random')")
      ->capture_default_str();
  app->add_option("--threads", c.threads, "Worker threads, 0 = all cores")->capture_default_str();
  app->add_flag("--rules-refinements", c.refinements,
                "No double on (6,2); stand on hard 16 of three or more cards vs T");
  app->add_option("--removed-ranks", c.removed, "Ranks removed from the deck, e.g. T,J,Q,K");
  app->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
}

void add_eval_flags(CLI::App* app, EvalFlags& f) {
  app->add_option("--games", f.games, "Games M")->capture_default_str();
  app->add_option("--rounds", f.rounds, "Rounds per game N")->capture_default_str();
  app->add_option("--bet", f.bet, "Bet per round b")->capture_default_str();
  app->add_option("--bankroll", f.bankroll, "Initial bankroll B0")->capture_default_str();
  app->add_option("--bins", f.bins, "Histogram bins")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blackjack strategy evaluation and evolution"};
  app.require_subcommand(1);

  Common common;
  EvalFlags eval;
  EvolveFlags evolve;
  CompareFlags compare;
  bool h17 = false;

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a strategy over many games");
  add_common(eval_cmd, common);
  add_eval_flags(eval_cmd, eval);
  eval_cmd->add_option("--strategy", eval.strategy, "Strategy file or 'thorp'")
      ->capture_default_str();

  auto* evolve_cmd = app.add_subcommand("evolve", "Evolve a population of strategies");
  add_common(evolve_cmd, common);
  evolve_cmd->add_option("--pop", evolve.pop, "Population size M")->capture_default_str();
  evolve_cmd->add_option("--generations", evolve.generations, "Generations tau")
      ->capture_default_str();
  evolve_cmd->add_option("--alpha", evolve.alpha, "Selection rate")->capture_default_str();
  evolve_cmd->add_option("--mutation", evolve.mutation, "Mutation rate 1 - pi")
      ->capture_default_str();
  evolve_cmd->add_option("--rounds", evolve.rounds, "Rounds per fitness session N")
      ->capture_default_str();
  evolve_cmd->add_option("--bet", evolve.bet, "Bet per round b")->capture_default_str();
  evolve_cmd->add_option("--bankroll", evolve.bankroll, "Bankroll B0 per generation")
      ->capture_default_str();
  evolve_cmd->add_option("--init", evolve.init, "random, thorp or a strategy file")
      ->capture_default_str();
  evolve_cmd->add_option("--snapshot-every", evolve.snapshot_every,
                         "Write the survivors' mean strategy every K generations (0 = never)")
      ->capture_default_str();
  evolve_cmd->add_option("--threshold", evolve.threshold, "Extraction threshold a")
      ->capture_default_str();
  evolve_cmd->add_flag("--raw-fitness-weights", evolve.raw_weights,
                       "Use unshifted fit-score weights when every score is positive");

  auto* compare_cmd = app.add_subcommand("compare", "Evaluate two strategies and t-test them");
  add_common(compare_cmd, common);
  add_eval_flags(compare_cmd, eval);
  compare_cmd->add_option("first", compare.first, "First strategy file or 'thorp'")->required();
  compare_cmd->add_option("second", compare.second, "Second strategy file or 'thorp'")
      ->required();
  compare_cmd->add_flag("--same-seeds", compare.same_seeds,
                        "Play both strategies on the same card sequences");

  auto* export_cmd = app.add_subcommand("export-thorp", "Write the basic strategy tables");
  export_cmd->add_option("--out-dir", common.out_dir, "Output directory")->capture_default_str();
  // accepted everywhere so scripts can pass it uniformly; nothing here is parallel
  export_cmd->add_option("--threads", common.threads, "Ignored");

  auto* oracle_cmd =
      app.add_subcommand("oracle", "Exact infinite-deck dealer outcome probabilities");
  oracle_cmd->add_option("--out-dir", common.out_dir, "Output directory")->capture_default_str();
  oracle_cmd->add_option("--threads", common.threads, "Ignored");
  oracle_cmd->add_flag("--h17", h17, "Dealer hits soft 17");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*eval_cmd) return cmd_eval(eval, common);
    if (*evolve_cmd) return cmd_evolve(evolve, common);
    if (*compare_cmd) return cmd_compare(eval, compare, common);
    if (*export_cmd) return cmd_export_thorp(common);
    if (*oracle_cmd) return cmd_oracle(common, !h17);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kIoError;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const CodecError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
