#include <catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "bjevo/io.hpp"

using namespace bjevo;
using Catch::Matchers::ContainsSubstring;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    out.push_back(text.substr(start, nl - start));
    start = nl == std::string::npos ? text.size() : nl + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + '\n';
  return out;
}

// Expects parse to throw a ParseError whose message contains `needle` and
// which points at `line`.
template <typename Parse>
void expect_parse_error(Parse&& parse, const std::string& text, const std::string& needle,
                        std::size_t line) {
  try {
    parse(text);
    FAIL("no error for: " << needle);
  } catch (const ParseError& e) {
    INFO(e.what());
    CHECK_THAT(std::string(e.what()), ContainsSubstring(needle));
    CHECK(e.line() == line);
  }
}

const auto parse_strat = [](const std::string& t) { return parse_strategy(t); };

}  // namespace

TEST_CASE("strategy file layout") {
  const std::string text = format_strategy(StrategyTables{});
  const auto lines = lines_of(text);
  REQUIRE(lines.size() == 1 + 5 + 80);
  CHECK(lines[0] == kStrategyHeader);
  CHECK(lines[1] == "SPLIT");
  CHECK(lines[12] == "SOFT_DD");
  CHECK(lines[23] == "HARD_DD");
  CHECK(lines[44] == "SOFT_STAND");
  CHECK(lines[65] == "HARD_STAND");

  std::size_t data_rows = 0;
  std::size_t zeros = 0;
  for (const auto& l : lines) {
    if (l.empty() || (l[0] >= 'A' && l[0] <= 'Z')) continue;
    ++data_rows;
    CHECK(l == "0 0 0 0 0 0 0 0 0 0");
    zeros += static_cast<std::size_t>(std::count(l.begin(), l.end(), '0'));
  }
  CHECK(data_rows == 80);
  CHECK(zeros == 800);
}

TEST_CASE("thorp round trip") {
  const StrategyTables thorp = thorp_baseline();
  const std::string text = format_strategy(thorp);
  CHECK(parse_strategy(text) == thorp);
  CHECK(format_strategy(parse_strategy(text)) == text);

  // the 21 rows of the stand tables are written as ones
  const auto lines = lines_of(text);
  CHECK(lines[65 + 20] == "1 1 1 1 1 1 1 1 1 1");
}

TEST_CASE("random strategies round trip") {
  Rng rng(404);
  for (int k = 0; k < 100; ++k) {
    const StrategyTables s = decode(random_strategy(rng));
    REQUIRE(parse_strategy(format_strategy(s)) == s);
  }
}

TEST_CASE("blank lines between sections are accepted") {
  auto lines = lines_of(format_strategy(thorp_baseline()));
  lines.insert(lines.begin() + 65, "");
  lines.insert(lines.begin() + 1, "");
  lines.emplace_back("");
  CHECK(parse_strategy(join(lines)) == thorp_baseline());
}

TEST_CASE("strategy parse errors name the problem and the line") {
  const auto good = lines_of(format_strategy(thorp_baseline()));

  SECTION("short section") {
    auto lines = good;
    lines.pop_back();
    expect_parse_error(parse_strat, join(lines), "section HARD_STAND has 19 rows, expected 20",
                       lines.size());
  }
  SECTION("short section in the middle") {
    auto lines = good;
    lines.erase(lines.begin() + 30);
    expect_parse_error(parse_strat, join(lines), "section HARD_DD has 19 rows, expected 20", 44);
  }
  SECTION("long section") {
    auto lines = good;
    lines.insert(lines.begin() + 12, "0 0 0 0 0 0 0 0 0 0");
    expect_parse_error(parse_strat, join(lines), "section SPLIT has more than 10 rows", 13);
  }
  SECTION("bad header") {
    auto lines = good;
    lines[0] = "BJSTRAT v2";
    expect_parse_error(parse_strat, join(lines), "unknown header 'BJSTRAT v2'", 1);
  }
  SECTION("non-binary token") {
    auto lines = good;
    lines[70] = "1 1 1 1 2 1 1 1 1 1";
    expect_parse_error(parse_strat, join(lines), "section HARD_STAND row 6: invalid entry '2'", 71);
  }
  SECTION("wrong row width") {
    auto lines = good;
    lines[3] = "0 0 0";
    expect_parse_error(parse_strat, join(lines), "section SPLIT row 2 has 3 entries, expected 10", 4);
  }
  SECTION("missing section") {
    auto lines = good;
    lines.resize(65);
    expect_parse_error(parse_strat, join(lines), "missing section HARD_STAND", 65);
  }
  SECTION("sections out of order") {
    auto lines = good;
    lines[12] = "HARD_DD";
    expect_parse_error(parse_strat, join(lines), "expected section SOFT_DD, found 'HARD_DD'", 13);
  }
  SECTION("trailing content") {
    auto lines = good;
    lines.emplace_back("EXTRA");
    expect_parse_error(parse_strat, join(lines), "unexpected trailing content", lines.size());
  }
  SECTION("empty") {
    CHECK_THROWS_AS(parse_strategy(""), ParseError);
  }
}

TEST_CASE("mean strategy round trip") {
  Rng rng(5);
  MeanStrategy m;
  for (double& g : m.genes) g = rng.uniform();
  m.genes[0] = 0;
  m.genes[1] = 1;
  const MeanStrategy back = parse_mean_strategy(format_mean_strategy(m));
  for (std::size_t a = 0; a < kGeneCount; ++a) REQUIRE(std::abs(back.genes[a] - m.genes[a]) <= 5e-5);
  CHECK(back.genes[1] == 1.0);

  auto lines = lines_of(format_mean_strategy(m));
  CHECK(lines[0] == kMeanStrategyHeader);
  lines[2] = "1.2000 0 0 0 0 0 0 0 0 0";
  CHECK_THROWS_AS(parse_mean_strategy(join(lines)), ParseError);
}

TEST_CASE("generation log") {
  CHECK(format_generation_log({}) == std::string(kGenerationLogHeader) + "\n");

  EvolutionConfig cfg;
  cfg.population = 40;
  cfg.generations = 3;
  cfg.rounds = 200;
  cfg.alpha = 0.1;
  const EvolutionResult r = run_evolution(cfg, 1);
  const std::string text = format_generation_log(r.history);
  CHECK(lines_of(text).size() == 4);

  const auto back = parse_generation_log(text);
  REQUIRE(back.size() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(back[t].generation == t + 1);
    CHECK(back[t].phi_hat == r.history[t].phi_hat);
    CHECK(back[t].population_mean == r.history[t].population_mean);
    CHECK(back[t].best == r.history[t].best);
    CHECK(back[t].mutations == r.history[t].mutations);
  }

  expect_parse_error([](const std::string& t) { return parse_generation_log(t); },
                     "t,phi\n", "expected header", 1);
  expect_parse_error([](const std::string& t) { return parse_generation_log(t); },
                     std::string(kGenerationLogHeader) + "\n1,0.1,x,0.2,3\n", "malformed number", 2);
}

TEST_CASE("logged phi_hat matches the survivors of that generation") {
  EvolutionConfig cfg;
  cfg.population = 40;
  cfg.generations = 3;
  cfg.rounds = 200;
  cfg.alpha = 0.1;
  std::vector<double> from_survivors;
  const EvolutionResult r = run_evolution(cfg, 1, [&](const GenerationReport&, std::span<const Survivor> s) {
    double sum = 0;
    for (const Survivor& v : s) sum += v.phi;
    from_survivors.push_back(sum / static_cast<double>(s.size()));
  });
  const auto logged = parse_generation_log(format_generation_log(r.history));
  REQUIRE(logged.size() == from_survivors.size());
  for (std::size_t t = 0; t < logged.size(); ++t) CHECK(logged[t].phi_hat == from_survivors[t]);
}

TEST_CASE("key value files") {
  KeyValues kv;
  kv.add("name", std::string("thorp"));
  kv.add("games", std::size_t{1000});
  kv.add("edge", 0.00125);
  const auto back = parse_key_values(kv.str());
  CHECK(back.at("name") == "thorp");
  CHECK(back.at("games") == "1000");
  CHECK(std::stod(back.at("edge")) == 0.00125);
  CHECK(parse_key_values("a=b=c\n").at("a") == "b=c");
  CHECK_THROWS_AS(parse_key_values("novalue\n"), ParseError);

  EvalConfig cfg;
  cfg.games = 5;
  cfg.rounds = 100;
  const EvaluationReport r = evaluate_strategy(thorp_baseline(), cfg, 1);
  const auto values = parse_key_values(report_values(r).str());
  CHECK(std::stod(values.at("mean_final_bankroll")) == r.mean_final_bankroll);
  CHECK(std::stod(values.at("edge")) == r.edge);
}

TEST_CASE("files on disk") {
  const auto dir = std::filesystem::temp_directory_path() / "bjevo_test_io";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  write_strategy(thorp_baseline(), dir / "s.txt");
  CHECK(read_strategy(dir / "s.txt") == thorp_baseline());
  CHECK_THROWS_AS(read_strategy(dir / "missing.txt"), IoError);
  CHECK_THROWS_AS(write_file(dir / "no" / "such" / "dir.txt", "x"), IoError);

  std::filesystem::remove_all(dir);
}

TEST_CASE("csv outputs") {
  const std::vector<HistogramBin> bins{{0, 1, 2}, {1, 2, 3}};
  CHECK(format_histogram(bins) == "lo,hi,count\n0,1,2\n1,2,3\n");
  const std::vector<double> finals{1000, 1002.5};
  CHECK(format_final_bankrolls(finals) == "game,final_bankroll\n0,1000\n1,1002.5\n");
}
