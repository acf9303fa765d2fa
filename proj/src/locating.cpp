#include "chorus/locating.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace chorus {

namespace {

constexpr int kGaussNewtonIterations = 10;

struct Sym2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;
};

// Solves [xx xy; xy yy] z = rhs. Returns false when the system is singular
// relative to its own scale.
bool solve2(const Sym2& m, Point2D rhs, Point2D& z, double rel_tol) {
  const double det = m.xx * m.yy - m.xy * m.xy;
  const double scale = m.xx + m.yy;
  if (!(scale > 0.0) || !(det > rel_tol * scale * scale)) return false;
  z = {(m.yy * rhs.x - m.xy * rhs.y) / det, (m.xx * rhs.y - m.xy * rhs.x) / det};
  return true;
}

// Fixes for a triple whose receivers are (nearly) collinear: the two mirror
// images across the receiver line, from the circles of the farthest pair.
std::vector<Point2D> mirror_fixes(const RangeSupport (&t)[3]) {
  std::size_t a = 0, b = 1;
  double widest = distance(t[0].receiver, t[1].receiver);
  for (auto [i, j] : {std::pair<std::size_t, std::size_t>{0, 2}, {1, 2}}) {
    const double s = distance(t[i].receiver, t[j].receiver);
    if (s > widest) {
      widest = s;
      a = i;
      b = j;
    }
  }
  if (!(widest > 0.0)) return {};
  const Point2D u = (t[b].receiver - t[a].receiver) * (1.0 / widest);
  const Point2D n{-u.y, u.x};
  const double da = t[a].distance;
  const double db = t[b].distance;
  const double along = (da * da - db * db + widest * widest) / (2.0 * widest);
  const double h = std::sqrt(std::max(0.0, da * da - along * along));
  const Point2D foot = t[a].receiver + u * along;
  if (h == 0.0) return {foot};
  return {foot + n * h, foot - n * h};
}

}  // namespace

void LocatorConfig::validate() const {
  if (!(v_e > 0.0)) throw std::invalid_argument("v_e: must be > 0");
  if (n_candidates < 1) throw std::invalid_argument("n_candidates: must be >= 1");
  if (max_combinations < 1) throw std::invalid_argument("max_combinations: must be >= 1");
  if (arena_margin < 0.0) throw std::invalid_argument("arena_margin: must be >= 0");
  if (merge_radius < 0.0) throw std::invalid_argument("merge_radius: must be >= 0");
  if (!(consistency_tolerance > 0.0)) {
    throw std::invalid_argument("consistency_tolerance: must be > 0");
  }
  if (!(residue_gate >= 0.0)) throw std::invalid_argument("residue_gate: must be >= 0");
  if (!(max_residue > 0.0)) throw std::invalid_argument("max_residue: must be > 0");
}

std::vector<LabeledDistance> label_distances(std::span<const AnonymousDistanceSet> sets,
                                             std::span<const TargetPrior> priors,
                                             std::span<const Point2D> receivers) {
  std::vector<LabeledDistance> out;
  for (const auto& set : sets) {
    const Point2D rcv = receivers[static_cast<std::size_t>(set.receiver_id)];
    for (double d : set.distances) {
      LabeledDistance ld{set.receiver_id, d, {}};
      for (const auto& prior : priors) {
        if (!prior.position || std::abs(d - distance(rcv, *prior.position)) <= prior.reach) {
          ld.candidate_sources.push_back(prior.target_id);
        }
      }
      out.push_back(std::move(ld));
    }
  }
  return out;
}

Point2D trilaterate(std::span<const RangeSupport> supports) {
  if (supports.size() < 3) throw DegenerateGeometry("trilaterate: need at least 3 ranges");

  // Circle i minus circle 0, relative to receiver 0:
  //   2 s_i . q = |s_i|^2 - D_i^2 + D_0^2,  s_i = r_i - r_0,  q = p - r_0.
  const Point2D r0 = supports[0].receiver;
  const double d0 = supports[0].distance;
  Sym2 normal;
  Point2D rhs;
  for (std::size_t i = 1; i < supports.size(); ++i) {
    const Point2D s = supports[i].receiver - r0;
    const double b = s.x * s.x + s.y * s.y - supports[i].distance * supports[i].distance + d0 * d0;
    const Point2D a{2.0 * s.x, 2.0 * s.y};
    normal.xx += a.x * a.x;
    normal.xy += a.x * a.y;
    normal.yy += a.y * a.y;
    rhs.x += a.x * b;
    rhs.y += a.y * b;
  }
  Point2D q;
  if (!solve2(normal, rhs, q, 1e-6)) {
    throw DegenerateGeometry("trilaterate: receivers are collinear or ill-conditioned");
  }
  Point2D p = r0 + q;

  // Gauss-Newton on the range residuals until the step falls below 1e-12 m.
  for (int iter = 0; iter < kGaussNewtonIterations; ++iter) {
    Sym2 jtj;
    Point2D jtf;
    for (const auto& s : supports) {
      const Point2D diff = p - s.receiver;
      const double rho = diff.norm();
      if (rho == 0.0) return p;
      const Point2D j{diff.x / rho, diff.y / rho};
      const double f = rho - s.distance;
      jtj.xx += j.x * j.x;
      jtj.xy += j.x * j.y;
      jtj.yy += j.y * j.y;
      jtf.x += j.x * f;
      jtf.y += j.y * f;
    }
    Point2D delta;
    if (!solve2(jtj, jtf, delta, 1e-12)) break;
    p = p - delta;
    if (delta.norm() < 1e-12) break;
  }
  if (!p.finite()) throw DegenerateGeometry("trilaterate: non-finite solution");
  return p;
}

double self_consistency(Point2D x, std::span<const RangeSupport> supports) {
  if (supports.empty()) throw std::invalid_argument("self_consistency: empty support");
  double sum = 0.0;
  for (const auto& s : supports) {
    const double e = s.distance - distance(x, s.receiver);
    sum += e * e;
  }
  return sum / static_cast<double>(supports.size());
}

std::vector<CandidatePosition> generate_candidates(std::span<const LabeledDistance> labeled,
                                                   const TargetPrior& prior,
                                                   std::span<const Point2D> receivers,
                                                   const LocatorConfig& config) {
  struct Item {
    RangeSupport range;
    double deviation;
  };
  std::vector<Item> items;
  for (const auto& ld : labeled) {
    if (std::find(ld.candidate_sources.begin(), ld.candidate_sources.end(), prior.target_id) ==
        ld.candidate_sources.end()) {
      continue;
    }
    const Point2D rcv = receivers[static_cast<std::size_t>(ld.receiver_id)];
    const double dev = prior.position ? std::abs(ld.distance - distance(rcv, *prior.position)) : 0.0;
    items.push_back({{ld.receiver_id, rcv, ld.distance}, dev});
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& a, const Item& b) { return a.deviation < b.deviation; });

  // Receivers holding at least one labeled range, for residue evaluation.
  std::vector<int> receiver_ids;
  for (const auto& it : items) receiver_ids.push_back(it.range.receiver_id);
  std::sort(receiver_ids.begin(), receiver_ids.end());
  receiver_ids.erase(std::unique(receiver_ids.begin(), receiver_ids.end()), receiver_ids.end());
  if (receiver_ids.size() < 3) return {};

  auto residue_at = [&](Point2D x) {
    double sum = 0.0;
    for (int rid : receiver_ids) {
      const Point2D rcv = receivers[static_cast<std::size_t>(rid)];
      const double predicted = distance(x, rcv);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& it : items) {
        if (it.range.receiver_id != rid) continue;
        best = std::min(best, std::abs(it.range.distance - predicted));
      }
      best = std::min(best, config.consistency_tolerance);
      sum += best * best;
    }
    return sum / static_cast<double>(receiver_ids.size());
  };

  // Per receiver, the range closest to x if it misfits by at most the tolerance.
  auto inliers_at = [&](Point2D x) {
    std::vector<RangeSupport> out;
    for (int rid : receiver_ids) {
      const Point2D rcv = receivers[static_cast<std::size_t>(rid)];
      const double predicted = distance(x, rcv);
      const RangeSupport* best = nullptr;
      for (const auto& it : items) {
        if (it.range.receiver_id != rid) continue;
        if (!best || std::abs(it.range.distance - predicted) < std::abs(best->distance - predicted)) {
          best = &it.range;
        }
      }
      if (best && std::abs(best->distance - predicted) <= config.consistency_tolerance) {
        out.push_back(*best);
      }
    }
    return out;
  };

  std::vector<CandidatePosition> found;
  int tried = 0;
  const std::size_t n = items.size();
  for (std::size_t i = 0; i < n && tried < config.max_combinations; ++i) {
    for (std::size_t j = i + 1; j < n && tried < config.max_combinations; ++j) {
      if (items[j].range.receiver_id == items[i].range.receiver_id) continue;
      for (std::size_t k = j + 1; k < n && tried < config.max_combinations; ++k) {
        if (items[k].range.receiver_id == items[i].range.receiver_id ||
            items[k].range.receiver_id == items[j].range.receiver_id) {
          continue;
        }
        ++tried;
        const RangeSupport triple[3] = {items[i].range, items[j].range, items[k].range};
        std::vector<Point2D> fixes;
        try {
          fixes.push_back(trilaterate(triple));
        } catch (const DegenerateGeometry&) {
          fixes = mirror_fixes(triple);
        }
        for (Point2D fix : fixes) {
          if (!fix.finite()) continue;
          std::vector<RangeSupport> support(triple, triple + 3);
          double residue = residue_at(fix);
          if (config.refine_with_inliers) {
            auto inliers = inliers_at(fix);
            if (inliers.size() > 3) {
              try {
                const Point2D refined = trilaterate(inliers);
                const double refined_residue = residue_at(refined);
                if (refined.finite() && refined_residue <= residue) {
                  fix = refined;
                  residue = refined_residue;
                  support = std::move(inliers);
                }
              } catch (const DegenerateGeometry&) {
              }
            }
          }
          if (!config.arena.contains(fix, config.arena_margin)) continue;
          if (prior.position && distance(fix, *prior.position) > prior.reach) continue;
          found.push_back({prior.target_id, fix, residue, std::move(support)});
        }
      }
    }
  }

  std::stable_sort(found.begin(), found.end(),
                   [](const CandidatePosition& a, const CandidatePosition& b) {
                     return a.residue < b.residue;
                   });
  std::vector<CandidatePosition> out;
  const double tol2 = config.consistency_tolerance * config.consistency_tolerance;
  const double best_residue = found.empty() ? 0.0 : found.front().residue;
  for (auto& c : found) {
    if (static_cast<int>(out.size()) >= config.n_candidates) break;
    if (c.residue > best_residue + config.residue_gate * tol2 || c.residue > config.max_residue * tol2) {
      break;
    }
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const CandidatePosition& kept) {
      return distance(kept.position, c.position) <= config.merge_radius;
    });
    if (!duplicate) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace chorus
