#include "hid/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hid/errors.hpp"

namespace hid {

namespace {

constexpr double kCosineOffset = 0.008;
constexpr double kMinAlphaBar = 1e-4;

void require_same_shape(const PixelGrid& a, const PixelGrid& b, const char* what) {
    if (!a.same_shape(b)) throw ShapeMismatchError(std::string(what) + ": shape mismatch");
}

}  // namespace

NoiseSchedule::NoiseSchedule(std::vector<double> alpha_bar) : alpha_bar_(std::move(alpha_bar)) {
    if (alpha_bar_.size() < 3) {
        throw InvalidParameterError("noise schedule needs at least 2 steps");
    }
    for (std::size_t t = 0; t < alpha_bar_.size(); ++t) {
        const double a = alpha_bar_[t];
        if (!(a > 0.0 && a <= 1.0)) {
            throw InvalidParameterError("alpha_bar[" + std::to_string(t) + "] outside (0, 1]");
        }
        if (t > 0 && !(a < alpha_bar_[t - 1])) {
            throw InvalidParameterError("alpha_bar must be strictly decreasing");
        }
    }
}

double NoiseSchedule::alpha_bar(int t) const {
    if (t < 0 || t > steps()) {
        throw InvalidParameterError("timestep " + std::to_string(t) + " outside [0, " +
                                    std::to_string(steps()) + "]");
    }
    return alpha_bar_[static_cast<std::size_t>(t)];
}

NoiseSchedule make_schedule(int steps) {
    if (steps < 2) {
        throw InvalidParameterError("schedule needs T >= 2, got " + std::to_string(steps));
    }
    const auto f = [](double u) {
        const double c = std::cos((u + kCosineOffset) / (1.0 + kCosineOffset) * std::numbers::pi / 2);
        return c * c;
    };
    const double f0 = f(0.0);
    std::vector<double> ab(static_cast<std::size_t>(steps) + 1);
    ab[0] = 1.0;
    int first_clamped = steps + 1;
    for (int t = 1; t <= steps; ++t) {
        const double v = f(static_cast<double>(t) / steps) / f0;
        if (v < kMinAlphaBar && first_clamped > steps) first_clamped = t;
        ab[t] = std::clamp(v, kMinAlphaBar, 1.0);
    }
    // Clamping can flatten a tail of entries onto the floor (T >= ~150). Replace
    // such a tail by a geometric ramp ending at the floor to keep strict decrease.
    if (first_clamped < steps) {
        const double start = ab[first_clamped - 1];
        const int n = steps - first_clamped + 1;
        const double ratio = std::pow(kMinAlphaBar / start, 1.0 / n);
        for (int k = 1; k <= n; ++k) ab[first_clamped - 1 + k] = start * std::pow(ratio, k);
        ab[steps] = kMinAlphaBar;
    }
    return NoiseSchedule(std::move(ab));
}

PixelGrid cfg_combine(const PixelGrid& eps_uncond, const PixelGrid& eps_cond,
                      const GuidanceConfig& g) {
    require_same_shape(eps_uncond, eps_cond, "cfg_combine");
    if (!(g.w >= 0.0)) throw InvalidParameterError("guidance scale must be non-negative");
    const double wu = 1.0 - g.w;
    PixelGrid out = eps_cond;
    auto o = out.values();
    auto u = eps_uncond.values();
    auto c = eps_cond.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = wu * u[i] + g.w * c[i];
    return out;
}

PixelGrid ddim_sample_step(const PixelGrid& z, const PixelGrid& eps, int t,
                           const NoiseSchedule& sched) {
    require_same_shape(z, eps, "ddim_sample_step");
    if (t < 1 || t > sched.steps()) {
        throw InvalidParameterError("ddim_sample_step: t = " + std::to_string(t) +
                                    " outside [1, T]");
    }
    const double a_t = sched.alpha_bar(t);
    const double a_prev = sched.alpha_bar(t - 1);
    const double s_t = std::sqrt(1.0 - a_t);
    const double inv_sqrt_a_t = 1.0 / std::sqrt(a_t);
    const double sqrt_a_prev = std::sqrt(a_prev);
    const double s_prev = std::sqrt(1.0 - a_prev);

    PixelGrid out = z;
    auto o = out.values();
    auto zv = z.values();
    auto ev = eps.values();
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double x0 = (zv[i] - s_t * ev[i]) * inv_sqrt_a_t;
        o[i] = sqrt_a_prev * x0 + s_prev * ev[i];
    }
    return out;
}

PixelGrid ddim_invert_step(const PixelGrid& z, const PixelGrid& eps, int t,
                           const NoiseSchedule& sched) {
    require_same_shape(z, eps, "ddim_invert_step");
    if (t < 0 || t > sched.steps() - 1) {
        throw InvalidParameterError("ddim_invert_step: t = " + std::to_string(t) +
                                    " outside [0, T - 1]");
    }
    const double a_t = sched.alpha_bar(t);
    const double a_next = sched.alpha_bar(t + 1);
    const double z_scale = std::sqrt(a_next / a_t);
    const double eps_scale =
        (std::sqrt(1.0 / a_next - 1.0) - std::sqrt(1.0 / a_t - 1.0)) * std::sqrt(a_next);

    PixelGrid out = z;
    auto o = out.values();
    auto zv = z.values();
    auto ev = eps.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = z_scale * zv[i] + eps_scale * ev[i];
    return out;
}

NoisePredictor::NoisePredictor(std::vector<DatasetEntry> dataset)
    : data_(std::make_shared<const std::vector<DatasetEntry>>(std::move(dataset))) {
    if (data_->empty()) throw InvalidParameterError("NoisePredictor: empty dataset");
    const PixelGrid& first = data_->front().image;
    for (const auto& e : *data_) {
        if (!e.image.same_shape(first)) {
            throw ShapeMismatchError("NoisePredictor: dataset images differ in shape");
        }
    }
}

NoisePredictor NoisePredictor::from_renders(const std::vector<AvatarRender>& renders) {
    std::vector<DatasetEntry> entries;
    entries.reserve(renders.size());
    for (const auto& r : renders) entries.push_back({r.image, r.attrs});
    return NoisePredictor(std::move(entries));
}

Posterior NoisePredictor::posterior(const PixelGrid& z, int t, const Condition& cond,
                                    const NoiseSchedule& sched) const {
    if (t < 1 || t > sched.steps()) {
        throw InvalidParameterError("empirical_eps: t = " + std::to_string(t) +
                                    " outside [1, T]");
    }
    require_same_shape(z, data_->front().image, "empirical_eps");
    const double a = sched.alpha_bar(t);
    const double sqrt_a = std::sqrt(a);
    const double inv_two_var = 1.0 / (2.0 * (1.0 - a));

    Posterior post;
    std::vector<double> logits;
    auto zv = z.values();
    for (std::size_t i = 0; i < data_->size(); ++i) {
        const DatasetEntry& e = (*data_)[i];
        if (!condition_match(cond, e.attrs)) continue;
        auto xv = e.image.values();
        double d2 = 0.0;
        for (std::size_t k = 0; k < zv.size(); ++k) {
            const double d = zv[k] - sqrt_a * xv[k];
            d2 += d * d;
        }
        post.indices.push_back(i);
        logits.push_back(-d2 * inv_two_var);
    }
    if (post.indices.empty()) {
        throw NoMatchingConditionError("empirical_eps: no dataset image matches the condition");
    }

    const double peak = *std::max_element(logits.begin(), logits.end());
    post.weights.resize(logits.size());
    double total = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        post.weights[j] = std::exp(logits[j] - peak);
        total += post.weights[j];
    }
    for (double& w : post.weights) w /= total;

    post.x0 = PixelGrid(z.height(), z.width(), z.channels(), 0.0);
    auto x0 = post.x0.values();
    for (std::size_t j = 0; j < post.indices.size(); ++j) {
        const double w = post.weights[j];
        if (w == 0.0) continue;
        auto xv = (*data_)[post.indices[j]].image.values();
        for (std::size_t k = 0; k < x0.size(); ++k) x0[k] += w * xv[k];
    }
    return post;
}

PixelGrid NoisePredictor::evaluate(const PixelGrid& z, int t, const Condition& cond,
                                   const NoiseSchedule& sched) const {
    const Posterior post = posterior(z, t, cond, sched);
    const double a = sched.alpha_bar(t);
    const double sqrt_a = std::sqrt(a);
    const double inv_sigma = 1.0 / std::sqrt(1.0 - a);
    PixelGrid eps = z;
    auto ev = eps.values();
    auto x0 = post.x0.values();
    for (std::size_t k = 0; k < ev.size(); ++k) ev[k] = (ev[k] - sqrt_a * x0[k]) * inv_sigma;
    return eps;
}

PixelGrid empirical_eps(const PixelGrid& z, int t, const Condition& cond,
                        const NoisePredictor& pred, const NoiseSchedule& sched) {
    return pred.evaluate(z, t, cond, sched);
}

InversionTrajectory invert_trajectory(const PixelGrid& image, const Condition& cond,
                                      const NoiseSchedule& sched, const NoisePredictor& pred) {
    for (double v : image.values()) {
        if (!std::isfinite(v)) throw InvalidParameterError("invert_trajectory: non-finite input");
    }
    InversionTrajectory traj;
    traj.latents.reserve(static_cast<std::size_t>(sched.steps()) + 1);
    traj.latents.push_back(image);
    for (int t = 0; t < sched.steps(); ++t) {
        const PixelGrid& z = traj.latents.back();
        const PixelGrid eps = pred.evaluate(z, std::max(t, 1), cond, sched);
        traj.latents.push_back(ddim_invert_step(z, eps, t, sched));
    }
    return traj;
}

PixelGrid sample_from(const PixelGrid& z, int from, const Condition& cond,
                      const GuidanceConfig& g, const NoiseSchedule& sched,
                      const NoisePredictor& pred) {
    if (from < 0 || from > sched.steps()) {
        throw InvalidParameterError("sample_from: start step outside [0, T]");
    }
    PixelGrid cur = z;
    for (int t = from; t >= 1; --t) {
        PixelGrid eps = pred.evaluate(cur, t, cond, sched);
        if (g.w != 1.0) eps = cfg_combine(pred.evaluate(cur, t, Condition{}, sched), eps, g);
        cur = ddim_sample_step(cur, eps, t, sched);
    }
    return cur;
}

}  // namespace hid
