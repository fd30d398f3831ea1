#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "slngbm/estimators.hpp"
#include "slngbm/integrators.hpp"

using namespace slngbm;

namespace {

NoiseIncrement zero_increment(int n, double dt) {
  NoiseIncrement inc(n);
  inc.dt = dt;
  return inc;
}

}  // namespace

TEST_CASE("config validation: empty horizon and friends") {
  TrajectoryConfig config;
  config.tau_end = 0.0;
  try {
    config.validate();
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("empty horizon") != std::string::npos);
  }
  config.tau_end = 1.0;
  config.dt = 0.0;
  CHECK_THROWS(config.validate());
  config.dt = 1e-10;
  CHECK_THROWS(config.validate());  // tau_end/dt > 1e8
  config.dt = 1e-3;
  config.p_max = 9;
  CHECK_THROWS(config.validate());
  config.p_max = 2;
  config.checkpoints = {0.5, 0.2};
  CHECK_THROWS(config.validate());
  config.checkpoints = {0.0, 0.2, 1.0};
  config.validate();  // tau = 0 checkpoint records the initial state
}

TEST_CASE("euler step: identity cases and the algebraic identity") {
  SquareMatrix id = SquareMatrix::identity(3);
  CHECK(step_euler(id, zero_increment(3, 0.1)) == id);

  NoiseIncrement diag(2);
  diag.d_sym(0, 0) = 0.25;
  diag.d_sym(1, 1) = -0.25;
  diag.dt = 0.1;
  SquareMatrix stepped = step_euler(SquareMatrix::identity(2), diag);
  CHECK(stepped(0, 0) == 1.25);
  CHECK(stepped(1, 1) == 0.75);
  CHECK(stepped(0, 1) == 0.0);

  // exact identity F (I + dB) for a generic pair
  RngStream rng(3, 0);
  const NoiseCoefficients coeffs = noise_coefficients(3);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> e(9);
    for (double& v : e) v = rng.next_normal();
    SquareMatrix f(3, e);
    NoiseIncrement inc = sample_increment(coeffs, 0.01, rng);
    SquareMatrix via_step = step_euler(f, inc);
    SquareMatrix sum = SquareMatrix::identity(3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) sum(i, j) += inc.d_sym(i, j) + inc.d_skew(i, j);
    SquareMatrix prod = SquareMatrix::zero(3);
    mat_mul(f.data(), sum.data(), prod.data(), 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(via_step(i, j) == doctest::Approx(prod(i, j)).epsilon(1e-15));
  }
}

TEST_CASE("exponential step: identity, diagonal case, determinant drift") {
  SquareMatrix id = SquareMatrix::identity(3);
  CHECK(step_exponential(id, zero_increment(3, 0.1), 1e-12) == id);

  NoiseIncrement diag(2);
  diag.d_sym(0, 0) = 0.1;
  diag.d_sym(1, 1) = -0.1;
  diag.dt = 0.1;
  SquareMatrix stepped = step_exponential(SquareMatrix::identity(2), diag, 1e-12);
  CHECK(stepped(0, 0) == doctest::Approx(std::exp(0.1)).epsilon(1e-11));
  CHECK(stepped(1, 1) == doctest::Approx(std::exp(-0.1)).epsilon(1e-11));
  CHECK(std::abs(log_det(stepped)) <= 1e-11);

  // 1e4 sampled steps at dt = 1e-3 accumulate |log det| well below 1e-8
  TrajectoryConfig config;
  config.n = 3;
  config.tau_end = 10.0;
  config.dt = 1e-3;
  config.scheme = Scheme::exponential;
  config.master_seed = 99;
  PathSimulator sim(config);
  for (int k = 0; k < 10000; ++k) sim.step();
  SquareMatrix f(3, std::vector<double>(sim.f(), sim.f() + 9));
  CHECK(std::abs(log_det(f)) <= 1e-8);
}

TEST_CASE("zero-noise trajectory stays at the identity") {
  TrajectoryConfig config;
  config.n = 4;
  config.tau_end = 1.0;
  config.dt = 0.25;
  config.noise = NoiseKind::zero;
  config.p_max = 3;
  config.checkpoints = {0.0, 0.5, 1.0};
  const TrajectoryRecord record = run_trajectory(config);
  REQUIRE(record.checkpoints.size() == 3);
  for (const GramSummary& gs : record.checkpoints) {
    CHECK(gs.trace_powers[0] == doctest::Approx(4.0));
    CHECK(gs.trace_powers[2] == doctest::Approx(4.0));
    CHECK(gs.log_det == doctest::Approx(0.0));
  }
  CHECK(record.final_log_det == doctest::Approx(0.0));
  CHECK_FALSE(record.diverged);
}

TEST_CASE("checkpoints snap to step boundaries with error at most dt/2") {
  TrajectoryConfig config;
  config.n = 2;
  config.tau_end = 1.0;
  config.dt = 0.3;
  config.noise = NoiseKind::zero;
  config.checkpoints = {0.4, 1.0};
  const TrajectoryRecord record = run_trajectory(config);
  REQUIRE(record.checkpoints.size() == 2);
  CHECK(record.checkpoints[0].tau == doctest::Approx(0.3));
  CHECK(record.checkpoints[1].tau == doctest::Approx(0.9));
  for (double err : record.snap_errors) CHECK(err <= 0.15 + 1e-12);
}

TEST_CASE("n = 2 exponential trajectories satisfy tr^2 G - tr G^2 = 2") {
  TrajectoryConfig config;
  config.n = 2;
  config.tau_end = 1.0;
  config.dt = 1e-3;
  config.scheme = Scheme::exponential;
  config.p_max = 2;
  for (int k = 1; k <= 10; ++k) config.checkpoints.push_back(0.1 * k);
  config.master_seed = 314159;
  for (std::uint64_t path = 0; path < 50; ++path) {
    config.stream_index = path;
    const TrajectoryRecord record = run_trajectory(config);
    REQUIRE_FALSE(record.diverged);
    for (const GramSummary& gs : record.checkpoints) {
      const double identity = gs.trace_powers[0] * gs.trace_powers[0] - gs.trace_powers[1];
      CHECK(std::abs(identity - 2.0) <= 1e-6 * 2.0);
    }
  }
}

TEST_CASE("trajectories are deterministic in (seed, stream, config)") {
  TrajectoryConfig config;
  config.n = 3;
  config.tau_end = 0.5;
  config.dt = 1e-2;
  config.p_max = 2;
  config.master_seed = 7;
  config.stream_index = 3;
  const TrajectoryRecord a = run_trajectory(config);
  const TrajectoryRecord b = run_trajectory(config);
  REQUIRE(a.checkpoints.size() == b.checkpoints.size());
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
    CHECK(a.checkpoints[i].trace_powers[0] == b.checkpoints[i].trace_powers[0]);
    CHECK(a.checkpoints[i].trace_powers[1] == b.checkpoints[i].trace_powers[1]);
  }
  CHECK(a.final_log_det == b.final_log_det);

  config.stream_index = 4;
  const TrajectoryRecord c = run_trajectory(config);
  CHECK(a.checkpoints[0].trace_powers[0] != c.checkpoints[0].trace_powers[0]);
}

TEST_CASE("overflow flags the trajectory as diverged") {
  // dt large enough that the exponential of a sampled increment overflows
  // the 1e300 entry budget within a few hundred steps
  TrajectoryConfig config;
  config.n = 2;
  config.tau_end = 200000.0;
  config.dt = 500.0;
  config.scheme = Scheme::exponential;
  config.master_seed = 11;
  const TrajectoryRecord record = run_trajectory(config);
  CHECK(record.diverged);
  CHECK(record.diverged_at > 0.0);
}

TEST_CASE("euler log-det: RMS scales like sqrt(dt tau), drift vanishes") {
  // The exponential scheme pins det F = 1; the Euler scheme leaks a
  // root-dt random walk in log det. Order check at tau = 1.
  const double dts[4] = {4e-3, 2e-3, 1e-3, 5e-4};
  double log_rms[4];
  for (int level = 0; level < 4; ++level) {
    TrajectoryConfig config;
    config.n = 3;
    config.tau_end = 1.0;
    config.dt = dts[level];
    config.scheme = Scheme::euler;
    config.p_max = 1;
    config.master_seed = 808;
    double sum_sq = 0.0, sum = 0.0;
    const int paths = 2000;
    for (int path = 0; path < paths; ++path) {
      config.stream_index = static_cast<std::uint64_t>(path);
      const TrajectoryRecord record = run_trajectory(config);
      REQUIRE_FALSE(record.diverged);
      sum += record.final_log_det;
      sum_sq += record.final_log_det * record.final_log_det;
    }
    const double rms = std::sqrt(sum_sq / paths);
    log_rms[level] = std::log(rms);
    // drift is an order of magnitude below the spread
    CHECK(std::abs(sum / paths) <= 0.35 * rms);
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int level = 0; level < 4; ++level) {
    const double x = std::log(dts[level]);
    sx += x;
    sy += log_rms[level];
    sxx += x * x;
    sxy += x * log_rms[level];
  }
  const double slope = (4.0 * sxy - sx * sy) / (4.0 * sxx - sx * sx);
  CHECK(slope >= 0.35);
  CHECK(slope <= 0.65);
}

TEST_CASE("weak-order estimator smoke: finite differences, sensible slope field") {
  const WeakOrderEstimate est = weak_order_slope(Scheme::euler, 2, 0.25, 0.05, 3, 4000, 555, 1);
  REQUIRE(est.diff_means.size() == 2);
  for (double d : est.diff_means) CHECK(std::isfinite(d));
  for (double s : est.diff_stderrs) CHECK(s > 0.0);
  CHECK(std::isfinite(est.slope));
  CHECK(est.n_diverged == 0);
}
