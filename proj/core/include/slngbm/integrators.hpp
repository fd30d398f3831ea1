#pragma once

#include <cstdint>
#include <vector>

#include "slngbm/linalg.hpp"
#include "slngbm/noise.hpp"

namespace slngbm {

enum class Scheme { euler, exponential };
enum class NoiseKind { isotropic, zero };  // zero is the deterministic stub

constexpr double kDefaultExpTol = 1e-12;
constexpr double kDivergenceLimit = 1e300;

/// Everything needed to reproduce one trajectory of dF = F dB from F = id.
struct TrajectoryConfig {
  int n = 3;
  double tau_end = 1.0;
  double dt = 1e-3;
  Scheme scheme = Scheme::exponential;
  NoiseKind noise = NoiseKind::isotropic;
  int p_max = 2;
  std::vector<double> checkpoints;  // times in [0, tau_end]; empty = {tau_end}
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
  double exp_tol = kDefaultExpTol;

  /// Throws on invalid settings; "empty horizon" when tau_end <= 0.
  void validate() const;

  std::int64_t n_steps() const;
  /// Step index each checkpoint snaps to (nearest boundary, error <= dt/2).
  std::vector<std::int64_t> checkpoint_steps() const;
};

struct TrajectoryRecord {
  std::vector<GramSummary> checkpoints;     // at snapped times, in order
  std::vector<double> requested_times;      // what the config asked for
  std::vector<double> snap_errors;          // |snapped - requested|, <= dt/2
  double final_log_det = 0.0;
  bool diverged = false;
  double diverged_at = -1.0;                // tau of first overflow, if any
  TrajectoryConfig config;
};

/// One explicit Euler step F + F (d_sym + d_skew); the Ito and Stratonovich
/// drifts coincide for this equation, so no correction term appears.
SquareMatrix step_euler(const SquareMatrix& f, const NoiseIncrement& db);

/// Group-preserving step F exp(d_sym + d_skew); keeps det F = 1 up to the
/// matrix-exponential tolerance because the increment is trace-free.
SquareMatrix step_exponential(const SquareMatrix& f, const NoiseIncrement& db, double tol);

TrajectoryRecord run_trajectory(const TrajectoryConfig& config);

/// Reusable stepping engine for estimator hot loops: preallocates all
/// scratch once and advances F = id with fresh increments from the stream.
class PathSimulator {
 public:
  explicit PathSimulator(const TrajectoryConfig& config);

  /// Rewinds to F = id at tau = 0 with the given trajectory stream.
  void reset(std::uint64_t stream_index);
  void step();
  bool diverged() const { return diverged_; }
  double tau() const { return static_cast<double>(step_count_) * config_.dt; }
  const double* f() const { return f_.data(); }
  int dim() const { return config_.n; }
  double log_tr_gram() const;

 private:
  TrajectoryConfig config_;
  NoiseCoefficients coeffs_;
  RngStream rng_;
  NoiseIncrement inc_;
  std::vector<double> f_;
  std::vector<double> db_;
  std::vector<double> t1_;
  std::vector<double> t2_;
  std::vector<double> t3_;
  std::int64_t step_count_ = 0;
  bool diverged_ = false;
};

}  // namespace slngbm
