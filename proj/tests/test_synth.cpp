#include <doctest.h>

#include <cmath>

#include "skewlab/conventional.hpp"
#include "skewlab/error.hpp"
#include "skewlab/synth.hpp"

using namespace skewlab;

namespace {

constexpr double kPs = 1e-12;
const double kPiD = std::acos(-1.0);

}  // namespace

TEST_CASE("uncoupled pair") {
  const auto grid = linear_grid(1e9, 100e9, 1e9);
  LineSpec spec;
  spec.length = 0.3;
  const auto sym = to_mixed_mode(make_uncoupled_pair(spec, grid));
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(sym.scd21[k]) == 0.0);

  spec.p_excess_delay = 3 * kPs;
  const auto net = make_uncoupled_pair(spec, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(std::abs(std::abs(net.s(k, 2, 1)) - 1.0) < 1e-15);
    CHECK(net.s(k, 2, 3) == cplx{});
    CHECK(net.s(k, 1, 1) == cplx{});
  }
  const auto p = phase_skew(to_mixed_mode(net), Direction::LeftToRight);
  for (double s : p.skew) CHECK(s == doctest::Approx(3 * kPs).epsilon(1e-9));

  spec.loss_coeff = 2.0;
  const auto lossy = make_uncoupled_pair(spec, grid);
  CHECK(std::abs(lossy.s(24, 2, 1)) == doctest::Approx(std::pow(10.0, -2.0 * 0.3 * 5.0 / 20.0)));
}

TEST_CASE("line spec validation") {
  LineSpec bad;
  bad.length = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  LineSpec neg;
  neg.loss_coeff = -1.0;
  CHECK_THROWS_AS(neg.validate(), Error);
  CHECK_THROWS_AS(make_se_delay(-1e-12, 0.0, {1e9}), Error);
  CHECK_THROWS_AS(build_channel({{}, {1e9}}), Error);
}

TEST_CASE("coupled pair") {
  const auto grid = linear_grid(1e9, 60e9, 1e9);
  LineSpec eq;
  eq.length = 0.5;
  const auto degenerate = make_coupled_pair(eq, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(degenerate.s(k, 2, 3)) < 1e-15);

  LineSpec spec;
  spec.length = 0.5;
  spec.even_delay_per_m = spec.odd_delay_per_m - 40 * kPs / spec.length;
  const auto net = make_coupled_pair(spec, grid);
  const auto mm = to_mixed_mode(net);
  bool any_fext = false;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    any_fext = any_fext || std::abs(net.s(k, 2, 3)) > 1e-3;
    const double w = 2 * kPiD * grid[k];
    CHECK(std::abs(mm.sdd21[k] - std::polar(1.0, -w * 0.5 * spec.odd_delay_per_m)) < 1e-12);
    CHECK(std::abs(mm.scc21[k] - std::polar(1.0, -w * 0.5 * spec.even_delay_per_m)) < 1e-12);
    CHECK(std::abs(mm.scd21[k]) < 1e-15);
    // reciprocal and passive
    CHECK((net.s(k) - net.s(k).transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::JacobiSVD<SMatrix> svd(net.s(k));
    CHECK(svd.singularValues().maxCoeff() <= 1.0 + 1e-12);
  }
  CHECK(any_fext);
}

TEST_CASE("SE delay element") {
  const auto grid = linear_grid(1e9, 50e9, 1e9);
  const auto same = to_mixed_mode(make_se_delay(4 * kPs, 4 * kPs, grid));
  for (const auto& v : same.scd21) CHECK(std::abs(v) == 0.0);
  const auto net = make_se_delay(2 * kPs, 1 * kPs, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        const double m = std::abs(net.s(k)(i, j));
        CHECK((m == 0.0 || std::abs(m - 1.0) < 1e-15));
      }
    }
  }
  const auto p = phase_skew(to_mixed_mode(net), Direction::LeftToRight);
  for (double s : p.skew) CHECK(s == doctest::Approx(1 * kPs).epsilon(1e-9));
}

TEST_CASE("channel builder") {
  const auto grid = linear_grid(1e9, 50e9, 1e9);
  LineSpec spec;
  spec.length = 0.25;
  spec.loss_coeff = 1.0;
  const auto single = build_channel({{UncoupledSegment{spec}}, grid});
  const auto direct = make_uncoupled_pair(spec, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK((single.s(k) - direct.s(k)).cwiseAbs().maxCoeff() == 0.0);

  // delay before or after an uncoupled pair gives the same Sdd21
  const auto before = to_mixed_mode(build_channel({{SeDelaySegment{2 * kPs, 0.0}, UncoupledSegment{spec}}, grid}));
  const auto after = to_mixed_mode(build_channel({{UncoupledSegment{spec}, SeDelaySegment{2 * kPs, 0.0}}, grid}));
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(before.sdd21[k] - after.sdd21[k]) < 1e-12);

  // uncoupled elements only: |Sdd21| = H |cos(pi f dt_total)|
  LineSpec skewed = spec;
  skewed.p_excess_delay = 1.5 * kPs;
  const auto chain = to_mixed_mode(
      build_channel({{SeDelaySegment{1 * kPs, 0.0}, UncoupledSegment{skewed}, SeDelaySegment{0.0, 0.5 * kPs}}, grid}));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double h = line_loss_magnitude(1.0, 0.25, grid[k]);
    CHECK(std::abs(chain.sdd21[k]) == doctest::Approx(h * std::abs(std::cos(kPiD * grid[k] * 2 * kPs))).epsilon(1e-12));
  }
}

TEST_CASE("generated networks are reciprocal") {
  const auto grid = linear_grid(1e9, 50e9, 1e9);
  LineSpec spec;
  spec.even_delay_per_m = 4.2e-9;
  spec.loss_coeff = 1.0;
  spec.common_loss_coeff = 2.0;
  spec.p_excess_delay = 1 * kPs;
  spec.n_excess_delay = 0.2 * kPs;
  const auto net = build_channel({{SeDelaySegment{1 * kPs, 0}, CoupledSegment{spec}, UncoupledSegment{spec}}, grid});
  CHECK(reciprocity_metric(net).max_abs_asymmetry < 1e-12);
}
