#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bjevo/evolution.hpp"
#include "bjevo/stats.hpp"
#include "bjevo/strategy.hpp"

namespace bjevo {

/// Malformed input. `line` is 1-based; 0 when the problem is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kStrategyHeader = "BJSTRAT v1";
inline constexpr std::string_view kMeanStrategyHeader = "BJMEAN v1";
inline constexpr std::string_view kGenerationLogHeader = "t,phi_hat,pop_mean,best,mutations";

/// printf-style formatting into a std::string.
template <typename... Args>
std::string format(const char* fmt, Args... args) {
  const int n = std::snprintf(nullptr, 0, fmt, args...);
  std::string out(static_cast<std::size_t>(n), '\0');
  std::snprintf(out.data(), out.size() + 1, fmt, args...);
  return out;
}

/// Shortest text that reads back as the same double.
inline std::string format_double(double v) { return format("%.17g", v); }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto pos = line.find(sep);
    out.push_back(line.substr(0, pos));
    if (pos == std::string_view::npos) return out;
    line.remove_prefix(pos + 1);
  }
}

// Five sections of values in gene order. `parse_token` turns one entry into a
// value or returns false.
template <typename Token>
std::array<double, kGeneCount> parse_sections(std::string_view text, std::string_view header,
                                              Token&& parse_token) {
  const auto lines = split_lines(text);
  std::size_t i = 0;
  const auto skip_blank = [&] {
    while (i < lines.size() && lines[i].empty()) ++i;
  };
  skip_blank();
  if (i == lines.size()) throw ParseError("empty file, expected header '" + std::string(header) + "'", 0);
  if (lines[i] != header) {
    throw ParseError("unknown header '" + std::string(lines[i]) + "', expected '" +
                         std::string(header) + "'",
                     i + 1);
  }
  ++i;

  std::array<double, kGeneCount> values{};
  for (const BlockInfo& info : kBlocks) {
    const std::string name(info.name);
    skip_blank();
    if (i == lines.size()) throw ParseError("missing section " + name, i);
    if (lines[i] != info.name) {
      throw ParseError("expected section " + name + ", found '" + std::string(lines[i]) + "'",
                       i + 1);
    }
    ++i;
    for (std::size_t r = 0; r < info.rows; ++r, ++i) {
      if (i == lines.size() || lines[i].empty() || (lines[i][0] >= 'A' && lines[i][0] <= 'Z')) {
        throw ParseError("section " + name + " has " + std::to_string(r) + " rows, expected " +
                             std::to_string(info.rows),
                         i + (i < lines.size() ? 1 : 0));
      }
      const auto fields = split_fields(lines[i], ' ');
      if (fields.size() != kValueClasses) {
        throw ParseError("section " + name + " row " + row_label(info, r) + " has " +
                             std::to_string(fields.size()) + " entries, expected " +
                             std::to_string(kValueClasses),
                         i + 1);
      }
      for (std::size_t c = 0; c < kValueClasses; ++c) {
        double v = 0;
        if (!parse_token(fields[c], v)) {
          throw ParseError("section " + name + " row " + row_label(info, r) + ": invalid entry '" +
                               std::string(fields[c]) + "'",
                           i + 1);
        }
        values[info.offset + r * kValueClasses + c] = v;
      }
    }
    // A longer section runs into the next header (or trailing junk).
    if (i < lines.size() && !lines[i].empty() && !(lines[i][0] >= 'A' && lines[i][0] <= 'Z')) {
      throw ParseError("section " + name + " has more than " + std::to_string(info.rows) + " rows",
                       i + 1);
    }
  }
  skip_blank();
  if (i != lines.size()) {
    throw ParseError("unexpected trailing content '" + std::string(lines[i]) + "'", i + 1);
  }
  return values;
}

template <typename Entry>
std::string format_sections(std::string_view header, Entry&& entry) {
  std::string out(header);
  out += '\n';
  for (const BlockInfo& info : kBlocks) {
    out += info.name;
    out += '\n';
    for (std::size_t r = 0; r < info.rows; ++r) {
      for (std::size_t c = 0; c < kValueClasses; ++c) {
        if (c) out += ' ';
        out += entry(info.offset + r * kValueClasses + c);
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace detail

// Strategy files: header, then SPLIT, SOFT_DD, HARD_DD, SOFT_STAND,
// HARD_STAND, each followed by its rows of ten space-separated 0/1 entries.

inline std::string format_strategy(const StrategyTables& tables) {
  const Chromosome c = encode(tables);
  return detail::format_sections(kStrategyHeader,
                                 [&](std::size_t a) { return c[a] ? std::string("1") : std::string("0"); });
}

inline StrategyTables parse_strategy(std::string_view text) {
  const auto values = detail::parse_sections(text, kStrategyHeader, [](std::string_view tok, double& v) {
    if (tok != "0" && tok != "1") return false;
    v = tok == "1" ? 1 : 0;
    return true;
  });
  Chromosome c;
  for (std::size_t a = 0; a < kGeneCount; ++a) c[a] = values[a] != 0 ? 1 : 0;
  return decode(c);
}

inline void write_strategy(const StrategyTables& tables, const std::filesystem::path& path) {
  write_file(path, format_strategy(tables));
}

inline StrategyTables read_strategy(const std::filesystem::path& path) {
  return parse_strategy(read_file(path));
}

// Mean strategy files: same layout, entries with four decimals.

inline std::string format_mean_strategy(const MeanStrategy& m) {
  return detail::format_sections(kMeanStrategyHeader,
                                 [&](std::size_t a) { return format("%.4f", m.genes[a]); });
}

inline MeanStrategy parse_mean_strategy(std::string_view text) {
  const auto values =
      detail::parse_sections(text, kMeanStrategyHeader, [](std::string_view tok, double& v) {
        if (tok.empty() || tok.size() > 32) return false;
        const std::string s(tok);
        char* end = nullptr;
        v = std::strtod(s.c_str(), &end);
        return end == s.c_str() + s.size() && v >= 0 && v <= 1;
      });
  MeanStrategy m;
  m.genes = values;
  return m;
}

inline void write_mean_strategy(const MeanStrategy& m, const std::filesystem::path& path) {
  write_file(path, format_mean_strategy(m));
}

inline MeanStrategy read_mean_strategy(const std::filesystem::path& path) {
  return parse_mean_strategy(read_file(path));
}

// Generation log (CSV).

inline std::string format_generation_log(std::span<const GenerationReport> history) {
  std::string out(kGenerationLogHeader);
  out += '\n';
  for (const GenerationReport& g : history) {
    out += std::to_string(g.generation) + ',' + format_double(g.phi_hat) + ',' +
           format_double(g.population_mean) + ',' + format_double(g.best) + ',' +
           std::to_string(g.mutations) + '\n';
  }
  return out;
}

inline std::vector<GenerationReport> parse_generation_log(std::string_view text) {
  const auto lines = detail::split_lines(text);
  if (lines.empty() || lines[0] != kGenerationLogHeader) {
    throw ParseError("expected header '" + std::string(kGenerationLogHeader) + "'", 1);
  }
  std::vector<GenerationReport> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = detail::split_fields(lines[i], ',');
    if (f.size() != 5) throw ParseError("expected 5 fields", i + 1);
    try {
      GenerationReport g;
      g.generation = std::stoull(std::string(f[0]));
      g.phi_hat = std::stod(std::string(f[1]));
      g.population_mean = std::stod(std::string(f[2]));
      g.best = std::stod(std::string(f[3]));
      g.mutations = std::stoull(std::string(f[4]));
      out.push_back(g);
    } catch (const std::logic_error&) {
      throw ParseError("malformed number", i + 1);
    }
  }
  return out;
}

inline void write_generation_log(std::span<const GenerationReport> history,
                                 const std::filesystem::path& path) {
  write_file(path, format_generation_log(history));
}

inline std::vector<GenerationReport> read_generation_log(const std::filesystem::path& path) {
  return parse_generation_log(read_file(path));
}

// Key=value files for reports and run metadata. Keys keep insertion order.

class KeyValues {
 public:
  void add(std::string key, std::string value) {
    entries_.emplace_back(std::move(key), std::move(value));
  }
  void add(std::string key, double value) { add(std::move(key), format_double(value)); }
  void add(std::string key, std::size_t value) { add(std::move(key), std::to_string(value)); }

  std::string str() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + '=' + v + '\n';
    return out;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

inline std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  const auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto eq = lines[i].find('=');
    if (eq == std::string_view::npos || eq == 0) throw ParseError("expected key=value", i + 1);
    out[std::string(lines[i].substr(0, eq))] = std::string(lines[i].substr(eq + 1));
  }
  return out;
}

inline KeyValues report_values(const EvaluationReport& r) {
  KeyValues kv;
  kv.add("games", r.games);
  kv.add("rounds", r.rounds);
  kv.add("bet", r.bet);
  kv.add("initial_bankroll", r.initial_bankroll);
  kv.add("mean_final_bankroll", r.mean_final_bankroll);
  kv.add("sd_final_bankroll", r.sd_final_bankroll);
  kv.add("ci95_lo", r.ci95.lo);
  kv.add("ci95_hi", r.ci95.hi);
  kv.add("edge", r.edge);
  kv.add("edge_ci95_lo", r.edge_ci95.lo);
  kv.add("edge_ci95_hi", r.edge_ci95.hi);
  kv.add("p_win", r.p_win);
  kv.add("p_loss", r.p_loss);
  kv.add("p_push", r.p_push);
  kv.add("mean_hands", r.mean_hands);
  kv.add("mean_doubles", r.mean_doubles);
  kv.add("split_freq", r.split_freq);
  kv.add("dd_freq", r.dd_freq);
  kv.add("split_win", r.split_win);
  kv.add("split_loss", r.split_loss);
  kv.add("dd_win", r.dd_win);
  kv.add("dd_loss", r.dd_loss);
  kv.add("broke_games", r.broke_games);
  return kv;
}

inline std::string format_histogram(std::span<const HistogramBin> bins) {
  std::string out = "lo,hi,count\n";
  for (const HistogramBin& b : bins) {
    out += format_double(b.lo) + ',' + format_double(b.hi) + ',' + std::to_string(b.count) + '\n';
  }
  return out;
}

/// Final bankroll of every game, one per line, in game order.
inline std::string format_final_bankrolls(std::span<const double> values) {
  std::string out = "game,final_bankroll\n";
  for (std::size_t g = 0; g < values.size(); ++g) {
    out += std::to_string(g) + ',' + format_double(values[g]) + '\n';
  }
  return out;
}

}  // namespace bjevo
