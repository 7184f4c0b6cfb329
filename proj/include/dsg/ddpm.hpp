#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "dsg/raster_codec.hpp"

namespace dsg {

/// Variance schedule of the diffusion process. Vectors are indexed by t − 1
/// for steps t = 1..T.
struct NoiseSchedule {
  int T = 0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;

  double beta_at(int t) const { return beta[static_cast<std::size_t>(t - 1)]; }
  double alpha_at(int t) const { return alpha[static_cast<std::size_t>(t - 1)]; }
  double alpha_bar_at(int t) const { return alpha_bar[static_cast<std::size_t>(t - 1)]; }
};

inline constexpr int kDefaultSteps = 1000;
inline constexpr double kDefaultBetaStart = 1e-4;
inline constexpr double kDefaultBetaEnd = 0.02;

/// Linear β from beta_start to beta_end over T steps. InvalidSchedule unless
/// 0 < beta_start <= beta_end < 1 and T >= 1.
NoiseSchedule make_schedule(int T = kDefaultSteps, double beta_start = kDefaultBetaStart,
                            double beta_end = kDefaultBetaEnd);

using Rng = std::mt19937_64;

/// Predicts the noise in F_t at step t; output has the shape of F_t.
using Denoiser = std::function<FeatureMap(const FeatureMap& ft, int t)>;

/// Map of the same geometry as `like` with i.i.d. N(0, 1) values.
FeatureMap gaussian_like(const FeatureMap& like, Rng& rng);

/// √ᾱ_t·F0 + √(1 − ᾱ_t)·ε. t = 0 returns F0. ShapeMismatch when ε differs
/// in shape, OutOfRange for t outside [0, T].
FeatureMap forward_noise(const FeatureMap& f0, int t, const FeatureMap& eps, const NoiseSchedule& ns);

/// One training draw: step uniform in [1, T], then ε ~ N(0, I).
struct TrainingDraw {
  int t = 1;
  FeatureMap eps;
};

TrainingDraw draw_training_noise(const FeatureMap& f0, const NoiseSchedule& ns, Rng& rng);

/// Mean over elements of (ε − ε̂(F_t, t))² for a given draw.
double training_loss(const FeatureMap& f0, const Denoiser& denoiser, const NoiseSchedule& ns,
                     const TrainingDraw& draw);

/// Same, with the draw taken from `rng` via draw_training_noise.
double training_loss(const FeatureMap& f0, const Denoiser& denoiser, const NoiseSchedule& ns, Rng& rng);

struct SampleShape {
  int width = kDefaultResolution;
  int height = kDefaultResolution;
  double meters_per_pixel = kDefaultRange / kDefaultResolution;
};

/// Ancestral sampling from F_T ~ N(0, I) down to F_0. No noise is added on
/// the last step. The result is clamped to [0, 1] unless `clamp` is false.
FeatureMap sample(const Denoiser& denoiser, const NoiseSchedule& ns, const SampleShape& shape, Rng& rng,
                  bool clamp = true);

/// Recovers the noise of F_t exactly from a known F0 by inverting the
/// forward process.
Denoiser oracle_denoiser(FeatureMap f0, const NoiseSchedule& ns);

/// Predicts zero noise everywhere.
Denoiser zero_denoiser();

/// Treats the high-frequency part of F_t (F_t minus its Gaussian blur) as
/// noise. Produces smooth fields; for demonstration only.
Denoiser blur_denoiser(double sigma_px = 2.0);

}  // namespace dsg
