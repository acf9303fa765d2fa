#include "chorus/pipeline.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace chorus {

ChorusLocator::ChorusLocator(int n_targets, std::vector<Point2D> receivers, LocatorConfig locate,
                             FilterConfig filter)
    : receivers_(std::move(receivers)), locate_(locate), filter_(filter) {
  if (n_targets < 1) throw std::invalid_argument("n_targets: must be > 0");
  locate_.validate();
  filter_.validate();
  targets_.resize(static_cast<std::size_t>(n_targets));
}

std::vector<SlotEstimate> ChorusLocator::process_slot(int slot, std::span<const int> scheduled,
                                                      std::span<const AnonymousDistanceSet> sets) {
  std::vector<TargetPrior> priors;
  for (int id : scheduled) {
    if (id < 0 || id >= static_cast<int>(targets_.size())) {
      throw std::out_of_range("process_slot: unknown target id " + std::to_string(id));
    }
    const TargetState& st = targets_[static_cast<std::size_t>(id)];
    TargetPrior prior{id, std::nullopt, std::numeric_limits<double>::infinity()};
    if (st.tracks) {
      prior.position = st.last_fix;
      prior.reach = locate_.v_e * static_cast<double>(std::max(1, slot - st.last_fix_slot));
    }
    priors.push_back(prior);
  }

  const auto labeled = label_distances(sets, priors, receivers_);

  std::vector<SlotEstimate> out;
  for (const auto& prior : priors) {
    TargetState& st = targets_[static_cast<std::size_t>(prior.target_id)];
    const auto candidates = generate_candidates(labeled, prior, receivers_, locate_);

    if (!st.tracks) {
      if (candidates.empty()) continue;
      const Point2D fix = candidates.front().position;
      st.tracks = bootstrap_tracks(fix, slot, filter_);
      st.pdfs = initial_pdfs(locate_.v_e, filter_);
      st.last_fix = fix;
      st.last_fix_slot = slot;
      out.push_back({slot, prior.target_id, fix, true});
      continue;
    }

    filter_step(*st.tracks, candidates, st.pdfs, slot, filter_);
    const TrackSet& ts = *st.tracks;
    out.push_back({slot, prior.target_id, ts.estimate, !ts.predicted});
    if (!ts.predicted) {
      st.last_fix = ts.estimate;
      st.last_fix_slot = slot;
    } else if (ts.coasting > filter_.coast_limit) {
      st.tracks.reset();
      ++loss_events_;
    }
  }
  return out;
}

std::vector<TargetPosition> ChorusLocator::known_positions() const {
  std::vector<TargetPosition> out;
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    if (targets_[i].tracks) out.push_back({static_cast<int>(i), targets_[i].tracks->estimate});
  }
  return out;
}

std::vector<int> ChorusLocator::unknown_targets() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    if (!targets_[i].tracks) out.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace chorus
