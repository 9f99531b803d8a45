#pragma once

// Empirical transition frequencies estimated from a play-by-play corpus.
//
// Plays from states with runner agency are pooled over the disengagement
// count: conditional on the runner outcome, the next reduced state (bases,
// count, outs) plus the disengagement delta e = d' - d is taken to be
// independent of d. Plays without runner agency keep their full state key.
// Coarser aggregates (over count, then over outs) are kept alongside so the
// kernel assembler has somewhere to go when an exact cell was never observed.
//
// One exception to the pooling: failed pickoffs at d = 2 trigger the
// third-disengagement penalty and change the reduced state itself (runner
// advances), so those plays are excluded here and the assembler hard-codes
// that transition instead.

#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "leadoff/errors.hpp"
#include "leadoff/game_state.hpp"
#include "leadoff/play_records.hpp"

namespace leadoff {

// Next state in pooled coordinates: either a reduced live state plus the
// disengagement delta, or the inning ends with some runs on the play.
struct ReducedTarget {
  bool inning_end = false;
  int runs = 0;       // when inning_end
  int reduced = 0;    // reduced_index(bases', count', outs') otherwise
  int delta = 0;      // d' - d observed on the source play
  int outs_delta = 0; // o' - o observed; lets outs-pooled cells replay safely

  friend auto operator<=>(const ReducedTarget&, const ReducedTarget&) = default;
};

inline ReducedTarget reduced_target_of(const PlayRecord& r) {
  if (r.inning_end) return ReducedTarget{true, r.runs_on_play, 0, 0, 0};
  return ReducedTarget{false, 0, reduced_index(r.post),
                       r.post.disengagements - r.pre.disengagements,
                       r.post.outs - r.pre.outs};
}

struct PooledCell {
  long long count = 0;
  std::vector<std::pair<ReducedTarget, double>> dist;  // normalized over targets
};

struct FullCell {
  long long count = 0;
  std::vector<std::pair<int, double>> dist;  // full state index -> probability
};

struct PooledFrequencyTable {
  // agency plays, keyed by (reduced pre state, outcome); exact cells plus the
  // two pooling levels and the league-wide N distribution
  std::map<std::pair<int, int>, PooledCell> agency;
  std::map<std::pair<int, int>, PooledCell> agency_by_bases_outs;  // key (bases*3+outs, r)
  std::map<std::pair<int, int>, PooledCell> agency_by_bases;       // key (bases, r)
  PooledCell agency_league_none;

  // no-agency plays: exact full-state rows plus pooled fallbacks
  std::unordered_map<int, FullCell> no_agency;
  std::map<int, PooledCell> no_agency_by_reduced;     // pooled over d
  std::map<int, PooledCell> no_agency_by_bases_outs;  // pooled over d, count
  std::map<int, PooledCell> no_agency_by_bases;       // pooled over d, count, outs

  long long agency_rows = 0;
  long long no_agency_rows = 0;
  long long third_disengagement_rows = 0;  // excluded from the pooled cells

  const PooledCell* find_agency(int reduced_pre, RunnerOutcome r) const {
    auto it = agency.find({reduced_pre, static_cast<int>(r)});
    return it == agency.end() ? nullptr : &it->second;
  }
  const FullCell* find_no_agency(int full_state) const {
    auto it = no_agency.find(full_state);
    return it == no_agency.end() ? nullptr : &it->second;
  }
};

namespace detail {

template <typename Key>
struct CountMap {
  std::map<Key, std::map<ReducedTarget, long long>> counts;
  void add(const Key& k, const ReducedTarget& t) { ++counts[k][t]; }
};

inline PooledCell normalize_cell(const std::map<ReducedTarget, long long>& counts) {
  PooledCell cell;
  long long total = 0;
  for (const auto& [t, n] : counts) total += n;
  cell.count = total;
  cell.dist.reserve(counts.size());
  for (const auto& [t, n] : counts)
    cell.dist.emplace_back(t, static_cast<double>(n) / static_cast<double>(total));
  return cell;
}

}  // namespace detail

// Tally a validated corpus into conditional frequency tables. Every stored
// distribution is normalized; empty cells are simply absent.
inline PooledFrequencyTable estimate_pooled_frequencies(
    const std::vector<PlayRecord>& records) {
  using detail::CountMap;
  CountMap<std::pair<int, int>> agency, by_bo, by_b;
  std::map<ReducedTarget, long long> league_none;
  std::unordered_map<int, std::map<int, long long>> no_agency;
  CountMap<int> na_reduced, na_bo, na_b;

  PooledFrequencyTable tab;
  for (const auto& rec : records) {
    if (rec.agency()) {
      ++tab.agency_rows;
      RunnerOutcome r = *rec.outcome;
      if (r == RunnerOutcome::pickoff_fail && rec.pre.disengagements == 2) {
        // third-disengagement penalty; governed by the hard-coded rule
        ++tab.third_disengagement_rows;
        continue;
      }
      ReducedTarget t = reduced_target_of(rec);
      int ri = reduced_index(rec.pre);
      int bases = base_state_index(rec.pre.bases);
      int rcode = static_cast<int>(r);
      agency.add({ri, rcode}, t);
      by_bo.add({bases * 3 + rec.pre.outs, rcode}, t);
      by_b.add({bases, rcode}, t);
      if (r == RunnerOutcome::none) ++league_none[t];
    } else {
      ++tab.no_agency_rows;
      int si = state_index(rec.pre_state());
      int post = state_index(rec.post_state());
      ++no_agency[si][post];
      ReducedTarget t = reduced_target_of(rec);
      int bases = base_state_index(rec.pre.bases);
      na_reduced.add(reduced_index(rec.pre), t);
      na_bo.add(bases * 3 + rec.pre.outs, t);
      na_b.add(bases, t);
    }
  }

  for (const auto& [k, c] : agency.counts) tab.agency[k] = detail::normalize_cell(c);
  for (const auto& [k, c] : by_bo.counts)
    tab.agency_by_bases_outs[k] = detail::normalize_cell(c);
  for (const auto& [k, c] : by_b.counts) tab.agency_by_bases[k] = detail::normalize_cell(c);
  if (!league_none.empty()) tab.agency_league_none = detail::normalize_cell(league_none);

  for (const auto& [si, counts] : no_agency) {
    FullCell cell;
    long long total = 0;
    for (const auto& [post, n] : counts) total += n;
    cell.count = total;
    for (const auto& [post, n] : counts)
      cell.dist.emplace_back(post, static_cast<double>(n) / static_cast<double>(total));
    tab.no_agency[si] = std::move(cell);
  }
  for (const auto& [k, c] : na_reduced.counts)
    tab.no_agency_by_reduced[k] = detail::normalize_cell(c);
  for (const auto& [k, c] : na_bo.counts)
    tab.no_agency_by_bases_outs[k] = detail::normalize_cell(c);
  for (const auto& [k, c] : na_b.counts)
    tab.no_agency_by_bases[k] = detail::normalize_cell(c);
  return tab;
}

}  // namespace leadoff
