#include "mtadvice/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace mtadvice {

TransitionCounts::TransitionCounts(StateActionLayout layout)
    : layout_(std::move(layout)),
      triples_(layout_.num_pairs() * layout_.num_states(), 0),
      pairs_(layout_.num_pairs(), 0),
      support_(layout_.num_pairs()) {}

void TransitionCounts::record(State s, Action a, State next) {
  const std::size_t p = layout_.pair(s, a);
  if (next >= layout_.num_states()) throw std::out_of_range("record: successor out of range");
  auto& cell = triples_[p * layout_.num_states() + next];
  if (cell == 0) support_[p].push_back(next);
  ++cell;
  ++pairs_[p];
  ++total_;
}

std::uint64_t TransitionCounts::count(State s, Action a, State next) const {
  return count_at(layout_.pair(s, a), next);
}

std::uint64_t TransitionCounts::count_at(std::size_t pair, State next) const {
  if (next >= layout_.num_states()) throw std::out_of_range("count: successor out of range");
  return triples_[pair * layout_.num_states() + next];
}

void TransitionCounts::begin_iteration() { snapshots_.push_back(pairs_); }

std::vector<std::uint64_t> TransitionCounts::visits_in_iteration(std::size_t i) const {
  const auto& start = snapshots_.at(i);
  const auto& end = i + 1 < snapshots_.size() ? snapshots_[i + 1] : pairs_;
  std::vector<std::uint64_t> v(start.size());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = end[p] - start[p];
  return v;
}

TransitionCounts TransitionCounts::from_triples(
    StateActionLayout layout, const std::vector<std::vector<std::vector<std::uint64_t>>>& triples) {
  TransitionCounts counts(std::move(layout));
  const auto& l = counts.layout_;
  if (triples.size() != l.num_states()) throw std::invalid_argument("counts: |S| mismatch");
  for (State s = 0; s < l.num_states(); ++s) {
    if (triples[s].size() != l.num_actions(s)) throw std::invalid_argument("counts: |A(s)| mismatch");
    for (Action a = 0; a < l.num_actions(s); ++a) {
      if (triples[s][a].size() != l.num_states()) throw std::invalid_argument("counts: row length mismatch");
      const std::size_t p = l.pair(s, a);
      for (State next = 0; next < l.num_states(); ++next) {
        const std::uint64_t c = triples[s][a][next];
        if (c == 0) continue;
        counts.triples_[p * l.num_states() + next] = c;
        counts.support_[p].push_back(next);
        counts.pairs_[p] += c;
        counts.total_ += c;
      }
    }
  }
  return counts;
}

std::vector<std::vector<std::vector<std::uint64_t>>> TransitionCounts::dense_triples() const {
  const std::size_t n = layout_.num_states();
  std::vector<std::vector<std::vector<std::uint64_t>>> out(n);
  for (State s = 0; s < n; ++s)
    for (Action a = 0; a < layout_.num_actions(s); ++a) {
      const std::size_t p = layout_.pair(s, a);
      out[s].emplace_back(triples_.begin() + p * n, triples_.begin() + (p + 1) * n);
    }
  return out;
}

double empirical_transition(const TransitionCounts& counts, State s, Action a, State next) {
  const std::uint64_t n = counts.pair_count(s, a);
  return static_cast<double>(counts.count(s, a, next)) / static_cast<double>(std::max<std::uint64_t>(n, 1));
}

double confidence_radius(std::size_t num_states, std::size_t num_actions, std::uint64_t n,
                         std::uint64_t t, double delta) {
  if (t < 1) throw std::invalid_argument("confidence_radius: t must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("confidence_radius: delta must lie in (0, 1)");
  const double numerator = 12.0 * static_cast<double>(num_states) *
                           std::log(2.0 * static_cast<double>(num_actions) * static_cast<double>(t) / delta);
  return std::sqrt(numerator / static_cast<double>(std::max<std::uint64_t>(n, 1)));
}

double confidence_radius(const TransitionCounts& counts, State s, Action a, std::uint64_t t,
                         double delta) {
  return confidence_radius(counts.num_states(), counts.layout().max_actions(), counts.pair_count(s, a), t,
                           delta);
}

ConfidenceSet ConfidenceSet::build(const TransitionCounts& counts, std::uint64_t t, double delta) {
  ConfidenceSet cs;
  cs.layout_ = counts.layout();
  cs.t_ = t;
  cs.delta_ = delta;
  const std::size_t pairs = cs.layout_.num_pairs();
  cs.rows_.resize(pairs);
  cs.radii_.resize(pairs);
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::uint64_t n = counts.pair_count_at(p);
    cs.radii_[p] = confidence_radius(cs.layout_.num_states(), cs.layout_.max_actions(), n, t, delta);
    if (n == 0) continue;
    std::vector<State> support(counts.support_at(p).begin(), counts.support_at(p).end());
    std::sort(support.begin(), support.end());
    for (State next : support)
      cs.rows_[p].push_back({next, static_cast<double>(counts.count_at(p, next)) / static_cast<double>(n)});
  }
  return cs;
}

ConfidenceSet ConfidenceSet::around(const TabularMDP& centre, std::vector<double> radii, std::uint64_t t,
                                    double delta) {
  ConfidenceSet cs;
  cs.layout_ = centre.layout();
  if (radii.size() != cs.layout_.num_pairs()) throw std::invalid_argument("around: one radius per pair");
  for (double r : radii)
    if (!(r >= 0.0)) throw std::invalid_argument("around: radii must be non-negative");
  cs.radii_ = std::move(radii);
  cs.t_ = t;
  cs.delta_ = delta;
  for (std::size_t p = 0; p < cs.layout_.num_pairs(); ++p) {
    auto row = centre.row_at(p);
    cs.rows_.emplace_back(row.begin(), row.end());
  }
  return cs;
}

double ConfidenceSet::l1_distance(std::size_t pair, std::span<const Transition> row) const {
  std::map<State, double> diff;
  for (const Transition& t : rows_[pair]) diff[t.next] += t.prob;
  for (const Transition& t : row) diff[t.next] -= t.prob;
  double d = 0.0;
  for (const auto& [next, value] : diff) d += std::abs(value);
  return d;
}

bool ConfidenceSet::contains(const TabularMDP& candidate, double slack) const {
  if (!(candidate.layout() == layout_)) throw std::invalid_argument("contains: shape mismatch");
  for (std::size_t p = 0; p < layout_.num_pairs(); ++p)
    if (l1_distance(p, candidate.row_at(p)) > radii_[p] + slack) return false;
  return true;
}

}  // namespace mtadvice
