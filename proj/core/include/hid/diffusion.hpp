#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "hid/imaging.hpp"
#include "hid/synthgen.hpp"

namespace hid {

/// Cumulative signal levels alpha_bar[t] for t = 0..T.
class NoiseSchedule {
public:
    explicit NoiseSchedule(std::vector<double> alpha_bar);

    int steps() const noexcept { return static_cast<int>(alpha_bar_.size()) - 1; }
    double alpha_bar(int t) const;
    const std::vector<double>& alpha_bars() const noexcept { return alpha_bar_; }

private:
    std::vector<double> alpha_bar_;
};

/// Cosine schedule with offset s = 0.008, normalized so alpha_bar[0] = 1 and
/// clamped to [1e-4, 1]. Throws InvalidParameterError for T < 2.
NoiseSchedule make_schedule(int steps);

struct GuidanceConfig {
    double w = 1.0;
};

/// eps_uncond + w * (eps_cond - eps_uncond), evaluated as (1 - w) * u + w * c so
/// that w = 1 yields eps_cond and w = 0 yields eps_uncond bit-exactly.
PixelGrid cfg_combine(const PixelGrid& eps_uncond, const PixelGrid& eps_cond,
                      const GuidanceConfig& g);

/// Deterministic DDIM update z_t -> z_{t-1}; requires 1 <= t <= T.
PixelGrid ddim_sample_step(const PixelGrid& z, const PixelGrid& eps, int t,
                           const NoiseSchedule& sched);

/// Inverse DDIM update z_t -> z_{t+1}; requires 0 <= t <= T - 1.
PixelGrid ddim_invert_step(const PixelGrid& z, const PixelGrid& eps, int t,
                           const NoiseSchedule& sched);

struct DatasetEntry {
    PixelGrid image;
    AttributeSpec attrs;
};

/// Posterior over the conditional subset for a noisy latent.
struct Posterior {
    std::vector<std::size_t> indices;  // dataset indices of the conditional subset
    std::vector<double> weights;       // softmax weights, same order as indices
    PixelGrid x0;                      // weighted mean image
};

/// Exact minimum-MSE noise predictor for a finite dataset under the forward
/// process z_t = sqrt(a) x + sqrt(1 - a) n. The dataset is shared and immutable.
class NoisePredictor {
public:
    explicit NoisePredictor(std::vector<DatasetEntry> dataset);

    static NoisePredictor from_renders(const std::vector<AvatarRender>& renders);

    std::size_t size() const noexcept { return data_->size(); }
    const DatasetEntry& entry(std::size_t i) const { return (*data_)[i]; }

    Posterior posterior(const PixelGrid& z, int t, const Condition& cond,
                        const NoiseSchedule& sched) const;

    PixelGrid evaluate(const PixelGrid& z, int t, const Condition& cond,
                       const NoiseSchedule& sched) const;

private:
    std::shared_ptr<const std::vector<DatasetEntry>> data_;
};

/// Free-function form of NoisePredictor::evaluate.
PixelGrid empirical_eps(const PixelGrid& z, int t, const Condition& cond,
                        const NoisePredictor& pred, const NoiseSchedule& sched);

struct InversionTrajectory {
    std::vector<PixelGrid> latents;  // index t = 0..T

    int steps() const noexcept { return static_cast<int>(latents.size()) - 1; }
};

/// DDIM inversion with the conditional prediction (guidance w = 1). The first
/// step evaluates the predictor at t = 1.
InversionTrajectory invert_trajectory(const PixelGrid& image, const Condition& cond,
                                      const NoiseSchedule& sched, const NoisePredictor& pred);

/// Guided DDIM sampling from z at step `from` down to 0 with
/// eps = cfg_combine(eps(null), eps(cond), g).
PixelGrid sample_from(const PixelGrid& z, int from, const Condition& cond,
                      const GuidanceConfig& g, const NoiseSchedule& sched,
                      const NoisePredictor& pred);

}  // namespace hid
