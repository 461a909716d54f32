#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "attnav/human_operator.hpp"
#include "attnav/session_log.hpp"

namespace attnav {

struct IdentificationConfig {
  double resample_rate = 10.0;  // samples/s after decimation
  bool trim_dead_time = true;
  int max_iterations = 200;
  int restarts = 8;
  double tolerance = 1e-10;  // relative cost decrease that ends a restart
  std::uint64_t seed = 0;
  int threads = 0;  // 0: hardware concurrency
};

/// A contiguous stretch of uniformly sampled (e, u_h) pairs.
struct Segment {
  int trial_id = 0;
  Eigen::MatrixX2d e;
  Eigen::MatrixX2d u;
};

struct IdentificationData {
  double rate_hz = 0.0;
  /// Tick rate of the loop that recorded the data (an integer multiple of
  /// rate_hz). The candidate model runs zero-order-hold on that grid; 0
  /// means the data were recorded at rate_hz.
  double source_rate_hz = 0.0;
  std::vector<Segment> segments;
  Eigen::Index samples() const;
};

struct PreprocessResult {
  IdentificationData id;
  IdentificationData val;
};

/// Leading rows of each trial before start_pressed are dropped, trials are
/// cut at gap markers, each piece passes a causal 4th-order Butterworth
/// low-pass (cutoff 0.4 x resample_rate, started at rest like the model
/// simulation it is compared against) and is
/// decimated by rate_hz / resample_rate (which must be an integer). The
/// first ceil(n/2) trials identify and the rest validate; a single trial is
/// split in half by samples.
/// Throws EmptyAfterTrim, InvalidArgument.
PreprocessResult preprocess(const SessionLog& log, const IdentificationConfig& cfg);

struct ChannelFits {
  std::array<double, 2> channel{0.0, 0.0};
  double mean = 0.0;
};

struct FitResult {
  TransferMatrix2x2 model;
  double rate_hz = kDefaultRateHz;  // rate written into the model file
  ChannelFits fit_id;
  ChannelFits fit_val;
  double residual_norm = 0.0;
  bool converged = false;
  bool degenerate = false;  // an output channel was constant; fits are NaN
  int restarts_used = 0;
  int iterations = 0;
};

/// 100 (1 - |y - ŷ| / |y - mean(y)|). Throws DegenerateReference for a
/// constant y, InvalidArgument for mismatched or too-short series.
double fit_percent(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);

/// Zero-initial-state response of `model` on each segment, concatenated.
/// The input is interpolated by cubics onto the source grid, where the
/// model is stepped with a zero-order hold, and the output is read back at
/// the data instants.
Eigen::MatrixX2d simulate_segments(const TransferMatrix2x2& model, const IdentificationData& data);

/// Per-channel fits of `model` on `data`. Throws UnstableModel before
/// simulating a non-Hurwitz model; channels with constant output give NaN.
ChannelFits validate(const TransferMatrix2x2& model, const IdentificationData& data);

/// Prediction-error fit of the structured model. The cost splits into one
/// independent term per output channel (channel i depends only on H_ii and
/// the off-diagonal gain feeding it), so each channel is fitted on its own
/// with Levenberg-Marquardt over (b1, b0, log a1, log a0, h) from
/// `restarts` starting points. Throws InsufficientData with fewer than 10
/// samples per parameter.
FitResult identify(const IdentificationData& id_set, const IdentificationConfig& cfg);

/// preprocess, identify, then validate on the held-out trials.
FitResult identify_session(const SessionLog& log, const IdentificationConfig& cfg);

/// {"v":1, "params": <operator model>, "fit_id": {...}, "fit_val": {...},
///  "residual_norm", "converged", "degenerate", "restarts_used"}; NaN fits
/// are written as null. load_operator_model accepts this document.
std::string fit_result_to_json(const FitResult& result);

/// Largest relative error between matched denominator roots of the two
/// models' diagonal entries.
double pole_error(const TransferMatrix2x2& truth, const TransferMatrix2x2& estimate);

/// Butterworth low-pass as two biquads, for reuse and testing.
class Butterworth4 {
 public:
  Butterworth4(double cutoff_hz, double rate_hz);
  /// Causal filtering of a column with zero initial state.
  Eigen::VectorXd filter(const Eigen::VectorXd& x) const;
  /// |H(e^{jωT})| at a frequency in Hz.
  double gain(double freq_hz) const;

 private:
  struct Biquad {
    double b0, b1, b2, a1, a2;
  };
  std::array<Biquad, 2> sections_{};
  double rate_hz_;
};

}  // namespace attnav
