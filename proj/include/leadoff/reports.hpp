#pragma once

// Policy presentation: lead-by-situation tables and the per-disengagement
// lead-increment summary, with aligned-text and comma-separated renderers.
// Leads print to 0.1 ft (the grid resolution), values to 4 decimals.

#include <array>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "leadoff/errors.hpp"
#include "leadoff/game_state.hpp"

namespace leadoff {

inline std::string format_ft(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << x;
  return os.str();
}

inline std::string format_value(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << x;
  return os.str();
}

inline std::string count_label(Count c) {
  return std::to_string(c.balls) + "-" + std::to_string(c.strikes);
}

// Lead chosen by a runner policy at the runner-on-first agency state.
inline double lead_at(const std::vector<int>& runner, const LeadGrid& grid, Count c, int d,
                      int outs) {
  const int idx = state_index(GameState::make_play(BaseState{true, false, false}, c, d, outs));
  if (idx < 0 || idx >= static_cast<int>(runner.size()))
    throw contract_error("lead_at: policy does not cover the canonical state space");
  const int a = runner[idx];
  if (a < 0 || a >= grid.size())
    throw contract_error("lead_at: runner action outside the lead grid");
  return grid.lead(a);
}

// ---------------------------------------------------------------------------
// Per-disengagement lead increments over every (count, outs) cell.

struct TwoFootCell {
  Count count;
  int outs = 0;
  std::array<double, 3> lead_ft{};  // indexed by disengagements
};

struct TwoFootRuleReport {
  std::vector<TwoFootCell> cells;  // count-major, then outs; 36 cells
  std::array<double, 3> mean_lead_ft{};
  double mean_increment_01 = 0;  // d=0 -> d=1, feet
  double mean_increment_12 = 0;  // d=1 -> d=2, feet
  bool monotone = true;          // lead non-decreasing in d in every cell
};

inline TwoFootRuleReport two_foot_rule_report(const std::vector<int>& runner,
                                              const LeadGrid& grid) {
  TwoFootRuleReport rep;
  std::array<double, 3> sums{};
  for (int ci = 0; ci < kNumCounts; ++ci) {
    for (int outs = 0; outs < 3; ++outs) {
      TwoFootCell cell;
      cell.count = count_at(ci);
      cell.outs = outs;
      for (int d = 0; d < 3; ++d) {
        cell.lead_ft[d] = lead_at(runner, grid, cell.count, d, outs);
        sums[d] += cell.lead_ft[d];
      }
      if (cell.lead_ft[1] < cell.lead_ft[0] || cell.lead_ft[2] < cell.lead_ft[1])
        rep.monotone = false;
      rep.cells.push_back(cell);
    }
  }
  const double n = static_cast<double>(rep.cells.size());
  for (int d = 0; d < 3; ++d) rep.mean_lead_ft[d] = sums[d] / n;
  rep.mean_increment_01 = rep.mean_lead_ft[1] - rep.mean_lead_ft[0];
  rep.mean_increment_12 = rep.mean_lead_ft[2] - rep.mean_lead_ft[1];
  return rep;
}

// ---------------------------------------------------------------------------
// Generic lead grid: labeled rows, one column per disengagement count.

struct LeadRow {
  std::string label;
  std::array<double, 3> leads{};
};

struct LeadTable {
  std::string title;
  std::string row_header;
  std::vector<LeadRow> rows;
};

// Rows = the 12 counts, at a fixed number of outs.
inline LeadTable table_by_count(const std::vector<int>& runner, const LeadGrid& grid,
                                int outs = 0) {
  LeadTable t;
  t.title = "optimal lead (ft) by count and disengagements, outs=" + std::to_string(outs);
  t.row_header = "count";
  for (int ci = 0; ci < kNumCounts; ++ci) {
    LeadRow row;
    Count c = count_at(ci);
    row.label = count_label(c);
    for (int d = 0; d < 3; ++d) row.leads[d] = lead_at(runner, grid, c, d, outs);
    t.rows.push_back(row);
  }
  return t;
}

// Rows = outs 0..2, at a fixed count.
inline LeadTable table_by_outs(const std::vector<int>& runner, const LeadGrid& grid,
                               Count c = Count{0, 0}) {
  LeadTable t;
  t.title = "optimal lead (ft) by outs and disengagements, count=" + count_label(c);
  t.row_header = "outs";
  for (int outs = 0; outs < 3; ++outs) {
    LeadRow row;
    row.label = std::to_string(outs);
    for (int d = 0; d < 3; ++d) row.leads[d] = lead_at(runner, grid, c, d, outs);
    t.rows.push_back(row);
  }
  return t;
}

// One row of a skill table: the leads a given policy picks at a fixed cell.
inline LeadRow lead_row(const std::string& label, const std::vector<int>& runner,
                        const LeadGrid& grid, Count c = Count{0, 0}, int outs = 0) {
  LeadRow row;
  row.label = label;
  for (int d = 0; d < 3; ++d) row.leads[d] = lead_at(runner, grid, c, d, outs);
  return row;
}

// ---------------------------------------------------------------------------
// Renderers.

namespace detail {

inline std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}
inline std::string pad_right(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

}  // namespace detail

inline std::string render_text(const LeadTable& t) {
  std::size_t label_w = t.row_header.size();
  for (const LeadRow& r : t.rows) label_w = std::max(label_w, r.label.size());
  const std::array<std::string, 3> heads = {"d=0", "d=1", "d=2"};
  std::size_t col_w = 6;
  std::ostringstream os;
  os << t.title << '\n';
  os << detail::pad_right(t.row_header, label_w);
  for (const auto& h : heads) os << "  " << detail::pad_left(h, col_w);
  os << '\n';
  for (const LeadRow& r : t.rows) {
    os << detail::pad_right(r.label, label_w);
    for (double x : r.leads) os << "  " << detail::pad_left(format_ft(x), col_w);
    os << '\n';
  }
  return os.str();
}

inline std::string render_csv(const LeadTable& t) {
  std::ostringstream os;
  os << t.row_header << ",d0,d1,d2\n";
  for (const LeadRow& r : t.rows) {
    os << r.label;
    for (double x : r.leads) os << ',' << format_ft(x);
    os << '\n';
  }
  return os.str();
}

inline std::string render_text(const TwoFootRuleReport& rep) {
  std::ostringstream os;
  os << "lead by disengagements for every (count, outs) cell\n";
  os << "count  outs     d=0     d=1     d=2   d0->d1  d1->d2\n";
  for (const TwoFootCell& c : rep.cells) {
    os << detail::pad_right(count_label(c.count), 5) << "  " << c.outs << "   ";
    for (double x : c.lead_ft) os << "  " << detail::pad_left(format_ft(x), 6);
    os << "  " << detail::pad_left(format_ft(c.lead_ft[1] - c.lead_ft[0]), 6) << "  "
       << detail::pad_left(format_ft(c.lead_ft[2] - c.lead_ft[1]), 6);
    os << '\n';
  }
  os << "mean lead (ft): d=0 " << format_ft(rep.mean_lead_ft[0]) << ", d=1 "
     << format_ft(rep.mean_lead_ft[1]) << ", d=2 " << format_ft(rep.mean_lead_ft[2]) << '\n';
  os << "mean increment d0->d1: " << format_ft(rep.mean_increment_01) << " ft\n";
  os << "mean increment d1->d2: " << format_ft(rep.mean_increment_12) << " ft\n";
  os << "monotone in d across all cells: " << (rep.monotone ? "yes" : "no") << '\n';
  return os.str();
}

inline std::string render_csv(const TwoFootRuleReport& rep) {
  std::ostringstream os;
  os << "count,outs,d0,d1,d2,inc01,inc12\n";
  for (const TwoFootCell& c : rep.cells) {
    os << count_label(c.count) << ',' << c.outs;
    for (double x : c.lead_ft) os << ',' << format_ft(x);
    os << ',' << format_ft(c.lead_ft[1] - c.lead_ft[0]) << ','
       << format_ft(c.lead_ft[2] - c.lead_ft[1]) << '\n';
  }
  return os.str();
}

}  // namespace leadoff
