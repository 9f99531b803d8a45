#pragma once

// Play-by-play corpus format: comma-separated text, one play per row, fixed
// header. A play either lands in a new live state (post_* columns) or ends
// the inning (inning_end=1, runs_on_play set, post_* all NA). Lead, outcome
// and pickoff_attempt are defined exactly for plays starting with a lone
// runner on first; everywhere else they must be NA.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leadoff/errors.hpp"
#include "leadoff/game_state.hpp"
#include "leadoff/util.hpp"

namespace leadoff {

struct PlayRecord {
  PlayState pre;
  bool inning_end = false;
  PlayState post{};      // meaningful iff !inning_end
  int runs_on_play = 0;  // meaningful iff inning_end, 0..3
  std::optional<RunnerOutcome> outcome;
  std::optional<double> lead_ft;
  std::optional<bool> pickoff_attempt;
  std::string runner_id, pitcher_id, catcher_id;
  std::optional<double> sprint_speed, arm_strength;

  GameState pre_state() const { return GameState::make_play(pre); }
  GameState post_state() const {
    return inning_end ? GameState::make_penultimate(runs_on_play)
                      : GameState::make_play(post);
  }
  bool agency() const { return pre.bases == BaseState{true, false, false}; }
};

inline constexpr const char* kPlayHeader =
    "pre_b1,pre_b2,pre_b3,pre_balls,pre_strikes,pre_diseng,pre_outs,"
    "post_b1,post_b2,post_b3,post_balls,post_strikes,post_diseng,post_outs,"
    "inning_end,runs_on_play,runner_outcome,lead_ft,pickoff_attempt,"
    "runner_id,pitcher_id,catcher_id,sprint_speed,arm_strength";

inline constexpr int kPlayColumns = 24;

enum class MissingLeadPolicy { drop, impute_league_mean };

struct IngestOptions {
  MissingLeadPolicy missing_lead = MissingLeadPolicy::drop;
};

struct IngestReport {
  long long rows_read = 0;
  long long rows_kept = 0;
  long long missing_lead_dropped = 0;
  long long missing_lead_imputed = 0;
  double league_mean_lead = 0.0;  // mean of observed leads, 0 if none observed
};

namespace detail {

inline std::string na_or(const std::optional<double>& v) {
  return v ? fmt_double(*v) : "NA";
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

struct RowError {
  long long line;
  std::string msg;
  [[noreturn]] void raise() const {
    throw data_error("play-by-play line " + std::to_string(line) + ": " + msg);
  }
};

inline int parse_small_int(std::string_view f, int lo, int hi, const char* name,
                           long long line) {
  long long v;
  if (!try_parse_int(f, v) || v < lo || v > hi)
    RowError{line, std::string(name) + " must be an integer in [" + std::to_string(lo) +
                       "," + std::to_string(hi) + "], got '" + std::string(f) + "'"}
        .raise();
  return static_cast<int>(v);
}

inline std::optional<RunnerOutcome> parse_outcome(std::string_view f, long long line) {
  if (f == "NA") return std::nullopt;
  if (f == "PO_SUCCESS") return RunnerOutcome::pickoff_success;
  if (f == "PO_FAIL") return RunnerOutcome::pickoff_fail;
  if (f == "SB_SUCCESS") return RunnerOutcome::steal_success;
  if (f == "SB_FAIL") return RunnerOutcome::steal_fail;
  if (f == "NONE") return RunnerOutcome::none;
  RowError{line, "unknown runner_outcome '" + std::string(f) + "'"}.raise();
}

inline std::string field_str(std::string_view f) {
  return f == "NA" ? std::string() : std::string(f);
}

}  // namespace detail

inline std::string format_play_record(const PlayRecord& r) {
  std::string s;
  s.reserve(128);
  auto add_int = [&](int v) {
    s += std::to_string(v);
    s += ',';
  };
  add_int(r.pre.bases.first);
  add_int(r.pre.bases.second);
  add_int(r.pre.bases.third);
  add_int(r.pre.count.balls);
  add_int(r.pre.count.strikes);
  add_int(r.pre.disengagements);
  add_int(r.pre.outs);
  if (r.inning_end) {
    s += "NA,NA,NA,NA,NA,NA,NA,1,";
    s += std::to_string(r.runs_on_play);
    s += ',';
  } else {
    add_int(r.post.bases.first);
    add_int(r.post.bases.second);
    add_int(r.post.bases.third);
    add_int(r.post.count.balls);
    add_int(r.post.count.strikes);
    add_int(r.post.disengagements);
    add_int(r.post.outs);
    s += "0,NA,";
  }
  s += r.outcome ? to_string(*r.outcome) : "NA";
  s += ',';
  s += detail::na_or(r.lead_ft);
  s += ',';
  s += r.pickoff_attempt ? (*r.pickoff_attempt ? "1" : "0") : "NA";
  s += ',';
  s += r.runner_id.empty() ? "NA" : r.runner_id;
  s += ',';
  s += r.pitcher_id.empty() ? "NA" : r.pitcher_id;
  s += ',';
  s += r.catcher_id.empty() ? "NA" : r.catcher_id;
  s += ',';
  s += detail::na_or(r.sprint_speed);
  s += ',';
  s += detail::na_or(r.arm_strength);
  return s;
}

inline void write_play_records(std::ostream& out, const std::vector<PlayRecord>& records) {
  out << kPlayHeader << '\n';
  for (const auto& r : records) out << format_play_record(r) << '\n';
}

inline void write_play_records(const std::string& path,
                               const std::vector<PlayRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write play-by-play file: " + path);
  write_play_records(out, records);
}

// Parse and validate one data row. Structural rules enforced here so the
// estimator downstream can trust every record:
//   - fields in range, post state or inning_end but not both
//   - lead/outcome/pickoff_attempt present iff the pre state has runner agency
//     (a missing lead on an agency row is legal; the ingest policy decides)
//   - outs never decrease and the implied runs on the play land in [0,4]
inline PlayRecord parse_play_record(std::string_view line, long long line_no) {
  auto f = detail::split_csv(line);
  if (static_cast<int>(f.size()) != kPlayColumns)
    detail::RowError{line_no, "expected " + std::to_string(kPlayColumns) +
                                  " columns, got " + std::to_string(f.size())}
        .raise();
  using detail::parse_small_int;
  PlayRecord r;
  r.pre.bases = BaseState{parse_small_int(f[0], 0, 1, "pre_b1", line_no) != 0,
                          parse_small_int(f[1], 0, 1, "pre_b2", line_no) != 0,
                          parse_small_int(f[2], 0, 1, "pre_b3", line_no) != 0};
  r.pre.count = Count{parse_small_int(f[3], 0, 3, "pre_balls", line_no),
                      parse_small_int(f[4], 0, 2, "pre_strikes", line_no)};
  r.pre.disengagements = parse_small_int(f[5], 0, 2, "pre_diseng", line_no);
  r.pre.outs = parse_small_int(f[6], 0, 2, "pre_outs", line_no);

  r.inning_end = parse_small_int(f[14], 0, 1, "inning_end", line_no) != 0;
  if (r.inning_end) {
    for (int i = 7; i < 14; ++i)
      if (f[i] != "NA")
        detail::RowError{line_no, "post_* columns must be NA when inning_end=1"}.raise();
    if (f[15] == "NA")
      detail::RowError{line_no, "runs_on_play required when inning_end=1"}.raise();
    r.runs_on_play = parse_small_int(f[15], 0, 3, "runs_on_play", line_no);
  } else {
    if (f[15] != "NA")
      detail::RowError{line_no, "runs_on_play must be NA when inning_end=0"}.raise();
    r.post.bases = BaseState{parse_small_int(f[7], 0, 1, "post_b1", line_no) != 0,
                             parse_small_int(f[8], 0, 1, "post_b2", line_no) != 0,
                             parse_small_int(f[9], 0, 1, "post_b3", line_no) != 0};
    r.post.count = Count{parse_small_int(f[10], 0, 3, "post_balls", line_no),
                         parse_small_int(f[11], 0, 2, "post_strikes", line_no)};
    r.post.disengagements = parse_small_int(f[12], 0, 2, "post_diseng", line_no);
    r.post.outs = parse_small_int(f[13], 0, 2, "post_outs", line_no);
    if (r.post.outs < r.pre.outs)
      detail::RowError{line_no, "outs decreased within an inning"}.raise();
  }

  r.outcome = detail::parse_outcome(f[16], line_no);
  if (f[17] != "NA") {
    double lead;
    if (!try_parse_double(f[17], lead))
      detail::RowError{line_no, "bad lead_ft '" + std::string(f[17]) + "'"}.raise();
    if (lead < 0.0 || lead > 20.0)
      detail::RowError{line_no, "lead_ft outside [0,20]"}.raise();
    r.lead_ft = lead;
  }
  if (f[18] != "NA")
    r.pickoff_attempt = parse_small_int(f[18], 0, 1, "pickoff_attempt", line_no) != 0;

  r.runner_id = detail::field_str(f[19]);
  r.pitcher_id = detail::field_str(f[20]);
  r.catcher_id = detail::field_str(f[21]);
  for (int i = 22; i < 24; ++i) {
    if (f[i] == "NA") continue;
    double v;
    if (!try_parse_double(f[i], v) || v < 0)
      detail::RowError{line_no, "bad covariate '" + std::string(f[i]) + "'"}.raise();
    (i == 22 ? r.sprint_speed : r.arm_strength) = v;
  }

  // agency consistency
  bool agency = r.agency();
  if (agency && !r.outcome)
    detail::RowError{line_no, "runner_outcome required with a lone runner on first"}.raise();
  if (!agency && r.outcome)
    detail::RowError{line_no, "runner_outcome given but pre state has no runner agency"}
        .raise();
  if (!agency && r.lead_ft)
    detail::RowError{line_no, "lead_ft given but pre state has no runner agency"}.raise();
  if (agency && !r.pickoff_attempt)
    detail::RowError{line_no, "pickoff_attempt required with a lone runner on first"}.raise();
  if (!agency && r.pickoff_attempt)
    detail::RowError{line_no, "pickoff_attempt given but pre state has no runner agency"}
        .raise();
  if (r.outcome) {
    bool po = *r.outcome == RunnerOutcome::pickoff_success ||
              *r.outcome == RunnerOutcome::pickoff_fail;
    if (po != *r.pickoff_attempt)
      detail::RowError{line_no, "pickoff_attempt inconsistent with runner_outcome"}.raise();
  }

  // implied runs must be a legal reward; reuse the reward contract
  try {
    (void)reward(r.pre_state(), r.post_state());
  } catch (const contract_error& e) {
    detail::RowError{line_no, e.what()}.raise();
  }
  return r;
}

// Read a corpus. Malformed rows abort with their line number; agency rows
// with a missing lead are dropped or imputed with the league mean per the
// configured policy.
inline std::vector<PlayRecord> ingest_play_records(std::istream& in,
                                                   const IngestOptions& opt = {},
                                                   IngestReport* report = nullptr) {
  std::string line;
  if (!std::getline(in, line)) throw data_error("play-by-play file: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kPlayHeader)
    throw data_error("play-by-play file: header does not match the expected schema");

  std::vector<PlayRecord> rows;
  IngestReport rep;
  double lead_sum = 0.0;
  long long lead_n = 0;
  std::vector<std::size_t> needs_lead;
  for (long long line_no = 2; std::getline(in, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++rep.rows_read;
    PlayRecord r = parse_play_record(line, line_no);
    if (r.agency()) {
      if (r.lead_ft) {
        lead_sum += *r.lead_ft;
        ++lead_n;
      } else {
        if (opt.missing_lead == MissingLeadPolicy::drop) {
          ++rep.missing_lead_dropped;
          continue;
        }
        needs_lead.push_back(rows.size());
      }
    }
    rows.push_back(std::move(r));
  }
  rep.league_mean_lead = lead_n ? lead_sum / lead_n : 0.0;
  if (!needs_lead.empty()) {
    if (lead_n == 0)
      throw data_error(
          "play-by-play file: cannot impute leads, no observed leads in corpus");
    for (std::size_t i : needs_lead) rows[i].lead_ft = rep.league_mean_lead;
    rep.missing_lead_imputed = static_cast<long long>(needs_lead.size());
  }
  rep.rows_kept = static_cast<long long>(rows.size());
  if (report) *report = rep;
  return rows;
}

inline std::vector<PlayRecord> ingest_play_records(const std::string& path,
                                                   const IngestOptions& opt = {},
                                                   IngestReport* report = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open play-by-play file: " + path);
  return ingest_play_records(in, opt, report);
}

}  // namespace leadoff
