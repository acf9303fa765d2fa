#include "chorus/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace chorus {

double MotionPdf::density(double x) const {
  const double z = (x - mean) / std;
  return std::exp(-0.5 * z * z) / (std * std::sqrt(2.0 * std::numbers::pi));
}

double MotionPdf::log_density(double x) const {
  const double z = (x - mean) / std;
  return -0.5 * z * z - std::log(std * std::sqrt(2.0 * std::numbers::pi));
}

MotionPdf update_pdf(const MotionPdf& pdf, std::span<const double> observations, double alpha) {
  MotionPdf out = pdf;
  double var = pdf.std * pdf.std;
  for (double x : observations) {
    const double diff = x - out.mean;
    const double incr = alpha * diff;
    out.mean += incr;
    var = (1.0 - alpha) * (var + diff * incr);
    ++out.count;
  }
  out.std = std::max(std::sqrt(var), out.floor_std);
  return out;
}

double evaluate_likelihood(const MotionPdfs& pdfs, double v, double a) {
  return pdfs.speed.density(v) * pdfs.accel.density(a);
}

void FilterConfig::validate() const {
  if (tracks < 1) throw std::invalid_argument("tracks: must be >= 1");
  if (!(ema_weight > 0.0 && ema_weight <= 1.0)) throw std::invalid_argument("ema_weight: must be in (0, 1]");
  if (!(floor_std > 0.0)) throw std::invalid_argument("floor_std: must be > 0");
  if (coast_limit < 0) throw std::invalid_argument("coast_limit: must be >= 0");
}

MotionPdfs initial_pdfs(double v_e, const FilterConfig& config) {
  MotionPdfs pdfs;
  pdfs.speed = {v_e / 2.0, std::max(v_e / 2.0, config.floor_std), 0, config.floor_std};
  pdfs.accel = {0.0, std::max(v_e / 2.0, config.floor_std), 0, config.floor_std};
  return pdfs;
}

TrackSet bootstrap_tracks(Point2D fix, int slot, const FilterConfig& config) {
  TrackSet set;
  Track t;
  t.positions.push_back(fix);
  set.tracks.assign(static_cast<std::size_t>(config.tracks), t);
  set.last_slot = slot;
  set.estimate = fix;
  return set;
}

void filter_step(TrackSet& set, std::span<const CandidatePosition> candidates,
                 MotionPdfs& pdfs, int slot, const FilterConfig& config, FilterOps* ops) {
  if (set.tracks.empty()) throw std::invalid_argument("filter_step: empty track set");
  const int elapsed = std::max(1, slot - set.last_slot);
  const double dt = static_cast<double>(elapsed);

  if (candidates.empty()) {
    for (auto& t : set.tracks) t.positions.push_back(t.positions.back() + t.velocity * dt);
    set.estimate = set.tracks.front().positions.back();
    set.predicted = true;
    ++set.coasting;
    set.last_slot = slot;
    return;
  }

  std::vector<Particle> particles;
  particles.reserve(set.tracks.size() * candidates.size());
  for (std::size_t ti = 0; ti < set.tracks.size(); ++ti) {
    const Track& t = set.tracks[ti];
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
      Particle p;
      p.parent_track = static_cast<int>(ti);
      p.candidate = static_cast<int>(ci);
      p.speed = distance(candidates[ci].position, t.positions.back()) / dt;
      p.accel = p.speed - t.last_speed;
      p.likelihood = evaluate_likelihood(pdfs, p.speed, p.accel);
      p.log_likelihood = pdfs.speed.log_density(p.speed) + pdfs.accel.log_density(p.accel);
      particles.push_back(p);
      if (ops) ++ops->evaluations;
    }
  }

  std::uint64_t comparisons = 0;
  std::stable_sort(particles.begin(), particles.end(), [&](const Particle& a, const Particle& b) {
    ++comparisons;
    if (a.log_likelihood != b.log_likelihood) return a.log_likelihood > b.log_likelihood;
    return candidates[static_cast<std::size_t>(a.candidate)].residue <
           candidates[static_cast<std::size_t>(b.candidate)].residue;
  });
  if (ops) ops->comparisons += comparisons;

  const std::size_t keep = std::min(particles.size(), static_cast<std::size_t>(config.tracks));
  std::vector<Track> next;
  next.reserve(keep);
  std::vector<double> speeds;
  std::vector<double> accels;
  for (std::size_t i = 0; i < keep; ++i) {
    const Particle& p = particles[i];
    const Track& parent = set.tracks[static_cast<std::size_t>(p.parent_track)];
    const Point2D fix = candidates[static_cast<std::size_t>(p.candidate)].position;
    Track t;
    t.positions.reserve(parent.positions.size() + 1);
    t.positions = parent.positions;
    t.positions.push_back(fix);
    t.velocity = (fix - parent.positions.back()) * (1.0 / dt);
    t.last_speed = p.speed;
    next.push_back(std::move(t));
    speeds.push_back(p.speed);
    accels.push_back(p.accel);
  }
  set.tracks = std::move(next);
  set.estimate = set.tracks.front().positions.back();
  set.predicted = false;
  set.coasting = 0;
  set.last_slot = slot;

  pdfs.speed = update_pdf(pdfs.speed, speeds, config.ema_weight);
  pdfs.accel = update_pdf(pdfs.accel, accels, config.ema_weight);
}

}  // namespace chorus
