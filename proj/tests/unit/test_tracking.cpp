#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "chorus/tracking.hpp"

using namespace chorus;

namespace {

CandidatePosition cand(Point2D p, double residue = 0.0) { return {0, p, residue, {}}; }

MotionPdfs pdfs_at(double v_mean, double v_std, double a_std) {
  MotionPdfs p;
  p.speed = {v_mean, v_std, 0, 0.01};
  p.accel = {0.0, a_std, 0, 0.01};
  return p;
}

}  // namespace

TEST_CASE("pdf update reaches its fixed point") {
  MotionPdf pdf{0.5, 0.4, 0, 0.05};
  const std::vector<double> obs(5, 0.1);
  for (int i = 0; i < 400; ++i) pdf = update_pdf(pdf, obs, 0.05);
  CHECK(pdf.mean == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(pdf.std == doctest::Approx(0.05));
  CHECK(pdf.count == 2000);
}

TEST_CASE("empty batch leaves the pdf unchanged") {
  const MotionPdf pdf{0.3, 0.2, 7, 0.05};
  const MotionPdf out = update_pdf(pdf, {}, 0.05);
  CHECK(out.mean == pdf.mean);
  CHECK(out.std == pdf.std);
  CHECK(out.count == pdf.count);
}

TEST_CASE("pdf density is a normalized unimodal density") {
  const MotionPdf pdf{0.2, 0.3, 0, 0.05};
  CHECK(pdf.density(0.2) >= pdf.density(0.5));
  CHECK(pdf.density(0.2) >= pdf.density(-0.1));
  double integral = 0.0;
  const double h = 1e-4;
  for (double x = -3.0; x < 3.4; x += h) integral += pdf.density(x) * h;
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(std::log(pdf.density(0.7)) == doctest::Approx(pdf.log_density(0.7)));
}

TEST_CASE("likelihood peaks at the means and is symmetric") {
  const auto p = pdfs_at(0.1, 0.05, 0.08);
  const double peak = evaluate_likelihood(p, 0.1, 0.0);
  for (double dv : {0.01, 0.03, 0.2}) {
    CHECK(evaluate_likelihood(p, 0.1 + dv, 0.0) < peak);
    CHECK(evaluate_likelihood(p, 0.1 + dv, 0.02) == doctest::Approx(evaluate_likelihood(p, 0.1 - dv, 0.02)));
    CHECK(evaluate_likelihood(p, 0.12, dv) == doctest::Approx(evaluate_likelihood(p, 0.12, -dv)));
  }
}

TEST_CASE("likelihood ordering matches hand evaluation") {
  const auto p = pdfs_at(0.1, 0.05, 0.1);
  auto gauss = [](double x, double m, double s) {
    return std::exp(-0.5 * (x - m) * (x - m) / (s * s)) / (s * std::sqrt(2 * std::numbers::pi));
  };
  const double c1 = gauss(0.12, 0.1, 0.05) * gauss(0.02, 0.0, 0.1);
  const double c2 = gauss(0.05, 0.1, 0.05) * gauss(-0.05, 0.0, 0.1);
  CHECK(evaluate_likelihood(p, 0.12, 0.02) == doctest::Approx(c1));
  CHECK(evaluate_likelihood(p, 0.05, -0.05) == doctest::Approx(c2));
  CHECK(c1 > c2);
}

TEST_CASE("one track and one candidate pass straight through") {
  FilterConfig cfg;
  cfg.tracks = 1;
  auto set = bootstrap_tracks({1, 1}, 0, cfg);
  auto pdfs = initial_pdfs(0.14, cfg);
  const std::vector<CandidatePosition> c{cand({1.08, 1.0})};
  filter_step(set, c, pdfs, 1, cfg);
  REQUIRE(set.tracks.size() == 1);
  CHECK(set.tracks[0].positions.size() == 2);
  CHECK(set.tracks[0].positions.back() == Point2D{1.08, 1.0});
  CHECK(set.estimate == Point2D{1.08, 1.0});
  CHECK_FALSE(set.predicted);
}

TEST_CASE("constant velocity: the true continuation wins") {
  FilterConfig cfg;
  auto set = bootstrap_tracks({0, 0}, 0, cfg);
  for (auto& t : set.tracks) t.last_speed = 0.1;
  auto pdfs = pdfs_at(0.1, 0.03, 0.03);
  for (int s = 1; s <= 40; ++s) {
    const Point2D truth{0.1 * s, 0.0};
    const std::vector<CandidatePosition> c{cand(truth + Point2D{0.0, 0.06}), cand(truth),
                                           cand(truth + Point2D{-0.07, 0.0})};
    filter_step(set, c, pdfs, s, cfg);
    CHECK(distance(set.estimate, truth) <= 1e-12);
  }
  CHECK(pdfs.speed.mean == doctest::Approx(0.1).epsilon(0.1));
}

TEST_CASE("crossing targets keep their own speeds") {
  FilterConfig cfg;
  auto slow = bootstrap_tracks({0, 5}, 0, cfg);
  auto fast = bootstrap_tracks({0, 4}, 0, cfg);
  auto slow_pdfs = pdfs_at(0.05, 0.01, 0.01);
  auto fast_pdfs = pdfs_at(0.15, 0.01, 0.01);
  for (int s = 1; s <= 30; ++s) {
    const Point2D ps{0.05 * s, 5.0 - 0.0 * s};
    const Point2D pf{0.15 * s * std::cos(0.2), 4.0 + 0.15 * s * std::sin(0.2)};
    const std::vector<CandidatePosition> both{cand(ps), cand(pf)};
    filter_step(slow, both, slow_pdfs, s, cfg);
    filter_step(fast, both, fast_pdfs, s, cfg);
    CHECK(slow.estimate == ps);
    CHECK(fast.estimate == pf);
  }
}

TEST_CASE("empty candidates coast on the last velocity") {
  FilterConfig cfg;
  auto set = bootstrap_tracks({0, 0}, 0, cfg);
  auto pdfs = initial_pdfs(0.14, cfg);
  filter_step(set, std::vector<CandidatePosition>{cand({0.1, 0.0})}, pdfs, 1, cfg);
  const auto before = pdfs;
  filter_step(set, {}, pdfs, 2, cfg);
  CHECK(set.predicted);
  CHECK(set.coasting == 1);
  CHECK(set.estimate.x == doctest::Approx(0.2));
  CHECK(pdfs.speed.mean == before.speed.mean);
  CHECK(pdfs.speed.count == before.speed.count);
  filter_step(set, {}, pdfs, 3, cfg);
  CHECK(set.coasting == 2);
  CHECK(set.estimate.x == doctest::Approx(0.3));
  filter_step(set, std::vector<CandidatePosition>{cand({0.4, 0.0})}, pdfs, 4, cfg);
  CHECK_FALSE(set.predicted);
  CHECK(set.coasting == 0);
}

TEST_CASE("retained tracks are min(l, particles)") {
  FilterConfig cfg;
  cfg.tracks = 7;
  auto set = bootstrap_tracks({0, 0}, 0, cfg);
  auto pdfs = initial_pdfs(0.14, cfg);
  const std::vector<CandidatePosition> two{cand({0.1, 0}), cand({0, 0.1})};
  filter_step(set, two, pdfs, 1, cfg);
  CHECK(set.tracks.size() == 7);
  auto small = bootstrap_tracks({0, 0}, 0, cfg);
  small.tracks.resize(2);
  filter_step(small, two, pdfs, 1, cfg);
  CHECK(small.tracks.size() == 4);
}

TEST_CASE("ranking ignores a common scale on both densities") {
  // Scaling both pdfs by c shifts every log-likelihood by the same constant;
  // the ranking of particles must be identical.
  FilterConfig cfg;
  auto a = bootstrap_tracks({0, 0}, 0, cfg);
  auto pdfs = pdfs_at(0.1, 0.05, 0.05);
  const std::vector<CandidatePosition> c{cand({0.12, 0}), cand({0.03, 0.02}), cand({0.0, 0.1}),
                                         cand({0.2, 0.1})};
  std::vector<double> speeds;
  for (const auto& k : c) speeds.push_back(k.position.norm());
  auto ordering = [&](double scale) {
    std::vector<std::size_t> idx{0, 1, 2, 3};
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
      return scale * evaluate_likelihood(pdfs, speeds[i], speeds[i]) >
             scale * evaluate_likelihood(pdfs, speeds[j], speeds[j]);
    });
    return idx;
  };
  CHECK(ordering(1.0) == ordering(1e-3));
  CHECK(ordering(1.0) == ordering(250.0));
  filter_step(a, c, pdfs, 1, cfg);
  CHECK(a.tracks.front().positions.back() == c[ordering(1.0).front()].position);
}

TEST_CASE("operation counts") {
  FilterConfig cfg;
  cfg.tracks = 5;
  auto set = bootstrap_tracks({0, 0}, 0, cfg);
  auto pdfs = initial_pdfs(0.14, cfg);
  std::vector<CandidatePosition> c;
  for (int i = 0; i < 5; ++i) c.push_back(cand({0.02 * i, 0.01}));
  FilterOps ops;
  filter_step(set, c, pdfs, 1, cfg, &ops);
  CHECK(ops.evaluations == 25);
  CHECK(ops.comparisons > 0);
  CHECK(ops.comparisons <= 25 * 25);
}
