#include "dsg/ddpm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsg/error.hpp"

namespace dsg {
namespace {

void require_same_shape(const FeatureMap& a, const FeatureMap& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height() || a.data().size() != b.data().size())
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": expected " + std::to_string(a.width()) + "x" +
                                              std::to_string(a.height()) + ", got " + std::to_string(b.width()) +
                                              "x" + std::to_string(b.height()));
}

void require_step(const NoiseSchedule& ns, int t, int lo) {
  if (t < lo || t > ns.T)
    throw Error(ErrorCode::OutOfRange, "step " + std::to_string(t) + " outside [" + std::to_string(lo) + ", " +
                                           std::to_string(ns.T) + "]");
}

std::vector<float> gaussian_kernel(double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = static_cast<float>(std::exp(-0.5 * i * i / (sigma * sigma)));
  for (auto& v : k) v = static_cast<float>(v / sum);
  return k;
}

// Separable blur with clamped borders, applied per channel.
FeatureMap blur(const FeatureMap& in, const std::vector<float>& k) {
  const int r = static_cast<int>(k.size() / 2);
  const int W = in.width();
  const int H = in.height();
  FeatureMap tmp = in;
  FeatureMap out = in;
  for (int c = 0; c < kChannels; ++c) {
    for (int j = 0; j < H; ++j) {
      for (int i = 0; i < W; ++i) {
        float acc = 0.0f;
        for (int d = -r; d <= r; ++d) acc += k[d + r] * in.at(c, {std::clamp(i + d, 0, W - 1), j});
        tmp.at(c, {i, j}) = acc;
      }
    }
    for (int j = 0; j < H; ++j) {
      for (int i = 0; i < W; ++i) {
        float acc = 0.0f;
        for (int d = -r; d <= r; ++d) acc += k[d + r] * tmp.at(c, {i, std::clamp(j + d, 0, H - 1)});
        out.at(c, {i, j}) = acc;
      }
    }
  }
  return out;
}

}  // namespace

NoiseSchedule make_schedule(int T, double beta_start, double beta_end) {
  if (T < 1) throw Error(ErrorCode::InvalidSchedule, "T must be at least 1");
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
    throw Error(ErrorCode::InvalidSchedule, "need 0 < beta_start <= beta_end < 1");
  NoiseSchedule ns;
  ns.T = T;
  double prod = 1.0;
  for (int t = 1; t <= T; ++t) {
    const double b = T == 1 ? beta_start : beta_start + (beta_end - beta_start) * (t - 1) / (T - 1);
    ns.beta.push_back(b);
    ns.alpha.push_back(1.0 - b);
    prod *= 1.0 - b;
    ns.alpha_bar.push_back(prod);
  }
  return ns;
}

FeatureMap gaussian_like(const FeatureMap& like, Rng& rng) {
  FeatureMap out = like;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : out.data()) v = static_cast<float>(normal(rng));
  return out;
}

FeatureMap forward_noise(const FeatureMap& f0, int t, const FeatureMap& eps, const NoiseSchedule& ns) {
  require_same_shape(f0, eps, "noise");
  require_step(ns, t, 0);
  if (t == 0) return f0;
  const double a = std::sqrt(ns.alpha_bar_at(t));
  const double s = std::sqrt(1.0 - ns.alpha_bar_at(t));
  FeatureMap out = f0;
  auto& d = out.data();
  const auto& e = eps.data();
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = static_cast<float>(a * d[k] + s * e[k]);
  return out;
}

TrainingDraw draw_training_noise(const FeatureMap& f0, const NoiseSchedule& ns, Rng& rng) {
  TrainingDraw draw;
  draw.t = std::uniform_int_distribution<int>(1, ns.T)(rng);
  draw.eps = gaussian_like(f0, rng);
  return draw;
}

double training_loss(const FeatureMap& f0, const Denoiser& denoiser, const NoiseSchedule& ns,
                     const TrainingDraw& draw) {
  const FeatureMap ft = forward_noise(f0, draw.t, draw.eps, ns);
  const FeatureMap pred = denoiser(ft, draw.t);
  require_same_shape(f0, pred, "denoiser output");
  const auto& e = draw.eps.data();
  const auto& p = pred.data();
  double sum = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double d = static_cast<double>(e[k]) - static_cast<double>(p[k]);
    sum += d * d;
  }
  return e.empty() ? 0.0 : sum / static_cast<double>(e.size());
}

double training_loss(const FeatureMap& f0, const Denoiser& denoiser, const NoiseSchedule& ns, Rng& rng) {
  return training_loss(f0, denoiser, ns, draw_training_noise(f0, ns, rng));
}

FeatureMap sample(const Denoiser& denoiser, const NoiseSchedule& ns, const SampleShape& shape, Rng& rng, bool clamp) {
  FeatureMap ft = gaussian_like(FeatureMap(shape.width, shape.height, shape.meters_per_pixel), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = ns.T; t >= 1; --t) {
    const FeatureMap eps = denoiser(ft, t);
    require_same_shape(ft, eps, "denoiser output");
    const double inv_sqrt_alpha = 1.0 / std::sqrt(ns.alpha_at(t));
    const double coef = ns.beta_at(t) / std::sqrt(1.0 - ns.alpha_bar_at(t));
    const double sigma = t > 1 ? std::sqrt(ns.beta_at(t)) : 0.0;
    auto& d = ft.data();
    const auto& e = eps.data();
    for (std::size_t k = 0; k < d.size(); ++k) {
      double v = inv_sqrt_alpha * (d[k] - coef * e[k]);
      if (t > 1) v += sigma * normal(rng);
      d[k] = static_cast<float>(v);
    }
  }
  if (clamp)
    for (auto& v : ft.data()) v = std::clamp(v, 0.0f, 1.0f);
  return ft;
}

Denoiser oracle_denoiser(FeatureMap f0, const NoiseSchedule& ns) {
  return [f0 = std::move(f0), ns](const FeatureMap& ft, int t) {
    require_same_shape(f0, ft, "oracle input");
    const double a = std::sqrt(ns.alpha_bar_at(t));
    const double s = std::sqrt(1.0 - ns.alpha_bar_at(t));
    FeatureMap out = ft;
    auto& d = out.data();
    const auto& x0 = f0.data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = static_cast<float>((d[k] - a * x0[k]) / s);
    return out;
  };
}

Denoiser zero_denoiser() {
  return [](const FeatureMap& ft, int) {
    FeatureMap out = ft;
    std::fill(out.data().begin(), out.data().end(), 0.0f);
    return out;
  };
}

Denoiser blur_denoiser(double sigma_px) {
  return [k = gaussian_kernel(sigma_px)](const FeatureMap& ft, int) {
    const FeatureMap smooth = blur(ft, k);
    FeatureMap out = ft;
    auto& d = out.data();
    const auto& s = smooth.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= s[i];
    return out;
  };
}

}  // namespace dsg
