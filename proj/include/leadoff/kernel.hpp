#pragma once

// Transition kernel over an absorbing game. Rows are stored sparse in CSR
// layout, one row per (state, runner action, pitcher action), runner-major
// within a state. Most states have a single dummy action on each side; in the
// baseball kernels the 108 lone-runner-on-first states carry the full lead
// grid times the pitcher's two options (or one row per lead in one-player
// mode, where the pitcher's behavior is already mixed in).
//
// Edge rewards live next to the probabilities so hand-built test games can
// use arbitrary rewards; the baseball assembler fills them from the state
// pair. Per-row expected rewards are precomputed for the solver.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leadoff/errors.hpp"
#include "leadoff/game_state.hpp"
#include "leadoff/util.hpp"

namespace leadoff {

enum class KernelMode : std::uint8_t { two_player, one_player, generic };

inline const char* to_string(KernelMode m) {
  switch (m) {
    case KernelMode::two_player: return "two-player";
    case KernelMode::one_player: return "one-player";
    case KernelMode::generic: return "generic";
  }
  return "?";
}

inline std::string canonical_state_order_hash() {
  std::string all;
  for (int i = 0; i < kNumStates; ++i) {
    all += state_to_string(state_at(i));
    all += ';';
  }
  return hex64(fnv1a64(all));
}

struct TransitionKernel {
  KernelMode mode = KernelMode::generic;
  std::optional<LeadGrid> grid;  // present for the baseball modes
  int n_states = 0;
  int terminal = -1;

  std::vector<std::int32_t> n_runner_actions;   // per state
  std::vector<std::int32_t> n_pitcher_actions;  // per state
  std::vector<std::int64_t> state_row;          // first row id of each state

  std::vector<std::int64_t> row_begin;  // size n_rows()+1
  std::vector<std::int32_t> col;
  std::vector<double> prob;
  std::vector<double> rew;
  std::vector<double> row_reward;  // expected immediate reward of each row

  std::string state_order_hash;
  std::map<std::string, std::string> provenance;
  long long redirects = 0;

  std::int64_t n_rows() const {
    return row_begin.empty() ? 0 : static_cast<std::int64_t>(row_begin.size()) - 1;
  }
  std::int64_t row_id(int s, int runner_action, int pitcher_action) const {
    return state_row[s] +
           static_cast<std::int64_t>(runner_action) * n_pitcher_actions[s] +
           pitcher_action;
  }
  bool is_baseball() const { return mode != KernelMode::generic; }
};

// Incremental row-major construction. States must be declared in index order
// and rows added in row-id order; finish() wires the CSR offsets.
class KernelBuilder {
 public:
  KernelBuilder(int n_states, int terminal, KernelMode mode) {
    k_.mode = mode;
    k_.n_states = n_states;
    k_.terminal = terminal;
    k_.n_runner_actions.reserve(n_states);
    k_.n_pitcher_actions.reserve(n_states);
    k_.state_row.reserve(n_states);
    k_.row_begin.push_back(0);
  }

  void set_grid(const LeadGrid& g) { k_.grid = g; }

  void begin_state(int s, int n_runner, int n_pitcher) {
    if (s != static_cast<int>(k_.n_runner_actions.size()))
      throw contract_error("KernelBuilder: states must be declared in order");
    if (n_runner < 1 || n_pitcher < 1)
      throw contract_error("KernelBuilder: action counts must be positive");
    k_.n_runner_actions.push_back(n_runner);
    k_.n_pitcher_actions.push_back(n_pitcher);
    k_.state_row.push_back(next_row_);
    expected_rows_ = next_row_ + static_cast<std::int64_t>(n_runner) * n_pitcher;
  }

  void add_row(const std::vector<std::pair<int, std::pair<double, double>>>& entries) {
    if (next_row_ >= expected_rows_)
      throw contract_error("KernelBuilder: too many rows for the declared state");
    double er = 0;
    for (const auto& [c, pr] : entries) {
      k_.col.push_back(c);
      k_.prob.push_back(pr.first);
      k_.rew.push_back(pr.second);
      er += pr.first * pr.second;
    }
    k_.row_reward.push_back(er);
    k_.row_begin.push_back(static_cast<std::int64_t>(k_.col.size()));
    ++next_row_;
  }

  TransitionKernel finish() {
    if (static_cast<int>(k_.n_runner_actions.size()) != k_.n_states)
      throw contract_error("KernelBuilder: not all states declared");
    if (next_row_ != expected_rows_)
      throw contract_error("KernelBuilder: missing rows for the last state");
    k_.state_order_hash = k_.is_baseball() ? canonical_state_order_hash() : std::string();
    return std::move(k_);
  }

 private:
  TransitionKernel k_;
  std::int64_t next_row_ = 0;
  std::int64_t expected_rows_ = 0;
};

// Full structural check: stochastic rows, absorbing terminal, and for the
// baseball modes the exact action layout and penultimate wiring.
inline void validate_kernel(const TransitionKernel& k) {
  auto fail = [](const std::string& msg) { throw invalid_kernel_error("kernel: " + msg); };
  if (k.n_states <= 0 || k.terminal < 0 || k.terminal >= k.n_states)
    fail("bad state space");
  if (static_cast<int>(k.n_runner_actions.size()) != k.n_states ||
      static_cast<int>(k.n_pitcher_actions.size()) != k.n_states ||
      static_cast<int>(k.state_row.size()) != k.n_states)
    fail("action tables do not cover the state space");

  std::int64_t expect_rows = 0;
  for (int s = 0; s < k.n_states; ++s) {
    if (k.state_row[s] != expect_rows) fail("row blocks are not contiguous");
    expect_rows +=
        static_cast<std::int64_t>(k.n_runner_actions[s]) * k.n_pitcher_actions[s];
  }
  if (k.n_rows() != expect_rows || static_cast<std::int64_t>(k.row_reward.size()) != expect_rows)
    fail("row count mismatch");

  for (int s = 0; s < k.n_states; ++s) {
    for (int a = 0; a < k.n_runner_actions[s]; ++a)
      for (int p = 0; p < k.n_pitcher_actions[s]; ++p) {
        std::int64_t row = k.row_id(s, a, p);
        double sum = 0;
        if (k.row_begin[row] >= k.row_begin[row + 1])
          fail("empty row at state " + std::to_string(s));
        for (std::int64_t e = k.row_begin[row]; e < k.row_begin[row + 1]; ++e) {
          if (k.col[e] < 0 || k.col[e] >= k.n_states) fail("column out of range");
          if (!(k.prob[e] > 0.0) || k.prob[e] > 1.0 + 1e-12)
            fail("probability out of range at state " + std::to_string(s));
          if (!std::isfinite(k.rew[e])) fail("non-finite reward");
          sum += k.prob[e];
        }
        if (std::abs(sum - 1.0) > 1e-10)
          fail("row does not sum to 1 at state " + std::to_string(s) + " (sum " +
               fmt_double(sum) + ")");
      }
  }

  // terminal: single dummy action pair, self-loop, no reward
  {
    if (k.n_runner_actions[k.terminal] != 1 || k.n_pitcher_actions[k.terminal] != 1)
      fail("terminal state must have dummy actions");
    std::int64_t row = k.row_id(k.terminal, 0, 0);
    if (k.row_begin[row + 1] - k.row_begin[row] != 1 ||
        k.col[k.row_begin[row]] != k.terminal || k.prob[k.row_begin[row]] != 1.0 ||
        k.rew[k.row_begin[row]] != 0.0)
      fail("terminal state must absorb with probability 1 and reward 0");
  }

  if (k.is_baseball()) {
    if (k.n_states != kNumStates || k.terminal != kTerminalIndex)
      fail("baseball kernel has the wrong state space");
    if (!k.grid) fail("baseball kernel missing its lead grid");
    k.grid->validate();
    if (k.state_order_hash != canonical_state_order_hash())
      fail("state order hash mismatch");
    int leads = k.grid->size();
    int np = k.mode == KernelMode::two_player ? 2 : 1;
    for (int s = 0; s < k.n_states; ++s) {
      bool agency = has_runner_agency(state_at(s));
      if (k.n_runner_actions[s] != (agency ? leads : 1))
        fail("runner action count wrong at state " + std::to_string(s));
      if (k.n_pitcher_actions[s] != (agency ? np : 1))
        fail("pitcher action count wrong at state " + std::to_string(s));
    }
    for (int runs = 0; runs < kNumPenultimate; ++runs) {
      int s = kNumPlayStates + runs;
      std::int64_t row = k.row_id(s, 0, 0);
      if (k.row_begin[row + 1] - k.row_begin[row] != 1 ||
          k.col[k.row_begin[row]] != k.terminal || k.prob[k.row_begin[row]] != 1.0 ||
          k.rew[k.row_begin[row]] != 0.0)
        fail("penultimate state must step to terminal with probability 1");
    }
  }
}

// --- persistence -----------------------------------------------------------
//
// Versioned line-oriented text. Floats are shortest-round-trip decimals, so
// save(load(x)) is byte-identical to save(x).

inline void save_kernel(std::ostream& out, const TransitionKernel& k) {
  out << "leadoff-kernel/1\n";
  out << "mode " << to_string(k.mode) << '\n';
  if (k.grid)
    out << "grid " << fmt_double(k.grid->min_ft) << ' ' << fmt_double(k.grid->max_ft) << ' '
        << fmt_double(k.grid->step_ft) << '\n';
  out << "states " << k.n_states << ' ' << k.terminal << '\n';
  if (!k.state_order_hash.empty()) out << "hash " << k.state_order_hash << '\n';
  out << "redirects " << k.redirects << '\n';
  for (const auto& [key, value] : k.provenance) out << "prov " << key << ' ' << value << '\n';

  // action table, run-length encoded over states
  std::vector<std::array<std::int64_t, 3>> groups;
  for (int s = 0; s < k.n_states; ++s) {
    if (!groups.empty() && groups.back()[1] == k.n_runner_actions[s] &&
        groups.back()[2] == k.n_pitcher_actions[s])
      ++groups.back()[0];
    else
      groups.push_back({1, k.n_runner_actions[s], k.n_pitcher_actions[s]});
  }
  out << "actions " << groups.size() << '\n';
  for (const auto& g : groups) out << g[0] << ' ' << g[1] << ' ' << g[2] << '\n';

  out << "rows " << k.n_rows() << '\n';
  std::string line;
  for (std::int64_t r = 0; r < k.n_rows(); ++r) {
    line.clear();
    line += std::to_string(k.row_begin[r + 1] - k.row_begin[r]);
    for (std::int64_t e = k.row_begin[r]; e < k.row_begin[r + 1]; ++e) {
      line += ' ';
      line += std::to_string(k.col[e]);
      line += ':';
      line += fmt_double(k.prob[e]);
      line += ':';
      line += fmt_double(k.rew[e]);
    }
    line += '\n';
    out << line;
  }
  out << "end\n";
}

inline void save_kernel(const std::string& path, const TransitionKernel& k) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write kernel file: " + path);
  save_kernel(out, k);
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

inline TransitionKernel load_kernel(std::istream& in) {
  auto bad = [](const std::string& msg) { throw data_error("kernel file: " + msg); };
  std::string line;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) bad("unexpected end of file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line() != "leadoff-kernel/1") bad("unrecognized format line");

  TransitionKernel k;
  std::optional<LeadGrid> grid;
  long long n_states = -1, terminal = -1, n_rows = -1;
  std::vector<std::array<std::int64_t, 3>> groups;

  while (true) {
    auto f = detail::split_ws(next_line());
    if (f.empty()) bad("blank line in header");
    if (f[0] == "mode" && f.size() == 2) {
      if (f[1] == "two-player") k.mode = KernelMode::two_player;
      else if (f[1] == "one-player") k.mode = KernelMode::one_player;
      else if (f[1] == "generic") k.mode = KernelMode::generic;
      else bad("unknown mode");
    } else if (f[0] == "grid" && f.size() == 4) {
      LeadGrid g;
      if (!try_parse_double(f[1], g.min_ft) || !try_parse_double(f[2], g.max_ft) ||
          !try_parse_double(f[3], g.step_ft))
        bad("bad grid line");
      grid = g;
    } else if (f[0] == "states" && f.size() == 3) {
      if (!try_parse_int(f[1], n_states) || !try_parse_int(f[2], terminal))
        bad("bad states line");
    } else if (f[0] == "hash" && f.size() == 2) {
      k.state_order_hash = std::string(f[1]);
    } else if (f[0] == "redirects" && f.size() == 2) {
      long long r;
      if (!try_parse_int(f[1], r)) bad("bad redirects line");
      k.redirects = r;
    } else if (f[0] == "prov" && f.size() >= 3) {
      std::string key(f[1]);
      // line is "prov <key> <value...>"; the value may itself contain spaces
      k.provenance[key] = line.substr(5 + key.size() + 1);
    } else if (f[0] == "actions" && f.size() == 2) {
      long long ng;
      if (!try_parse_int(f[1], ng) || ng < 0) bad("bad actions line");
      for (long long i = 0; i < ng; ++i) {
        auto g = detail::split_ws(next_line());
        std::array<std::int64_t, 3> row{};
        long long a, b, c;
        if (g.size() != 3 || !try_parse_int(g[0], a) || !try_parse_int(g[1], b) ||
            !try_parse_int(g[2], c) || a <= 0 || b <= 0 || c <= 0)
          bad("bad action group");
        row = {a, b, c};
        groups.push_back(row);
      }
    } else if (f[0] == "rows" && f.size() == 2) {
      if (!try_parse_int(f[1], n_rows) || n_rows < 0) bad("bad rows line");
      break;
    } else {
      bad("unrecognized header line '" + line + "'");
    }
  }

  if (n_states <= 0 || terminal < 0) bad("missing states line");
  k.n_states = static_cast<int>(n_states);
  k.terminal = static_cast<int>(terminal);
  k.grid = grid;

  std::int64_t declared = 0;
  for (const auto& g : groups) declared += g[0];
  if (declared != n_states) bad("action groups do not cover the state space");
  std::int64_t row_cursor = 0;
  for (const auto& g : groups)
    for (std::int64_t i = 0; i < g[0]; ++i) {
      k.n_runner_actions.push_back(static_cast<std::int32_t>(g[1]));
      k.n_pitcher_actions.push_back(static_cast<std::int32_t>(g[2]));
      k.state_row.push_back(row_cursor);
      row_cursor += g[1] * g[2];
    }
  if (row_cursor != n_rows) bad("row count does not match action table");

  k.row_begin.reserve(n_rows + 1);
  k.row_begin.push_back(0);
  for (std::int64_t r = 0; r < n_rows; ++r) {
    auto f = detail::split_ws(next_line());
    long long n_entries;
    if (f.empty() || !try_parse_int(f[0], n_entries) || n_entries < 0 ||
        static_cast<long long>(f.size()) != n_entries + 1)
      bad("bad row at index " + std::to_string(r));
    double er = 0;
    for (long long e = 1; e <= n_entries; ++e) {
      std::string_view tok = f[e];
      std::size_t c1 = tok.find(':');
      std::size_t c2 = c1 == std::string_view::npos ? c1 : tok.find(':', c1 + 1);
      long long colv;
      double p, rv;
      if (c2 == std::string_view::npos || !try_parse_int(tok.substr(0, c1), colv) ||
          !try_parse_double(tok.substr(c1 + 1, c2 - c1 - 1), p) ||
          !try_parse_double(tok.substr(c2 + 1), rv))
        bad("bad entry in row " + std::to_string(r));
      k.col.push_back(static_cast<std::int32_t>(colv));
      k.prob.push_back(p);
      k.rew.push_back(rv);
      er += p * rv;
    }
    k.row_reward.push_back(er);
    k.row_begin.push_back(static_cast<std::int64_t>(k.col.size()));
  }
  if (next_line() != "end") bad("missing end marker");
  return k;
}

inline TransitionKernel load_kernel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open kernel file: " + path);
  return load_kernel(in);
}

}  // namespace leadoff
