#include "hid/iomask.hpp"

#include <cmath>

#include "hid/errors.hpp"

namespace hid {

std::string to_string(MaskVariant v) {
    switch (v) {
        case MaskVariant::Naive: return "naive";
        case MaskVariant::NoOrth: return "no_orth";
        case MaskVariant::Full: return "full";
    }
    return "?";
}

std::optional<MaskVariant> parse_variant(std::string_view name) {
    if (name == "naive") return MaskVariant::Naive;
    if (name == "no_orth") return MaskVariant::NoOrth;
    if (name == "full") return MaskVariant::Full;
    return std::nullopt;
}

void IOMaskConfig::validate() const {
    if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidParameterError("tau must lie in [0, 1]");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidParameterError("sigma must be positive");
    }
    if (!(w >= 0.0) || !std::isfinite(w)) {
        throw InvalidParameterError("guidance scale w must be non-negative");
    }
}

PixelGrid orthogonal_component(const PixelGrid& eps_h, const PixelGrid& eps_b) {
    if (!eps_h.same_shape(eps_b)) throw ShapeMismatchError("orthogonal_component: shape mismatch");
    auto h = eps_h.values();
    auto b = eps_b.values();
    double dot = 0.0;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        dot += b[i] * h[i];
        norm2 += b[i] * b[i];
    }
    if (norm2 == 0.0) {
        throw DegenerateReferenceError("orthogonal_component: reference prediction is all zeros");
    }
    const double coef = dot / norm2;
    PixelGrid out = eps_h;
    auto o = out.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = h[i] - coef * b[i];
    return out;
}

PixelGrid orthogonal_component_per_pixel(const PixelGrid& eps_h, const PixelGrid& eps_b) {
    if (!eps_h.same_shape(eps_b)) throw ShapeMismatchError("orthogonal_component: shape mismatch");
    PixelGrid out = eps_h;
    for (int r = 0; r < eps_h.height(); ++r) {
        for (int c = 0; c < eps_h.width(); ++c) {
            double dot = 0.0;
            double norm2 = 0.0;
            for (int ch = 0; ch < eps_h.channels(); ++ch) {
                dot += eps_b.at(r, c, ch) * eps_h.at(r, c, ch);
                norm2 += eps_b.at(r, c, ch) * eps_b.at(r, c, ch);
            }
            if (norm2 == 0.0) continue;
            const double coef = dot / norm2;
            for (int ch = 0; ch < eps_h.channels(); ++ch) {
                out.at(r, c, ch) = eps_h.at(r, c, ch) - coef * eps_b.at(r, c, ch);
            }
        }
    }
    return out;
}

PixelGrid io_difference(const PixelGrid& latent, int t, const Condition& head_cond,
                        const Condition& body_cond, const IOMaskConfig& cfg,
                        const NoiseSchedule& sched, const NoisePredictor& pred) {
    cfg.validate();
    const GuidanceConfig guidance{cfg.w};
    const PixelGrid eps_null = pred.evaluate(latent, t, Condition{}, sched);
    const PixelGrid eps_body = pred.evaluate(latent, t, body_cond, sched);
    const PixelGrid eps_head =
        cfg_combine(eps_null, pred.evaluate(latent, t, head_cond, sched), guidance);

    switch (cfg.variant) {
        case MaskVariant::Full:
            return cfg.projection == Projection::Global
                       ? orthogonal_component(eps_head, eps_body)
                       : orthogonal_component_per_pixel(eps_head, eps_body);
        case MaskVariant::NoOrth: {
            PixelGrid d = eps_head;
            auto dv = d.values();
            auto bv = eps_body.values();
            for (std::size_t i = 0; i < dv.size(); ++i) dv[i] -= bv[i];
            return d;
        }
        case MaskVariant::Naive: {
            const PixelGrid guided_body = cfg_combine(eps_null, eps_body, guidance);
            PixelGrid d = eps_head;
            auto dv = d.values();
            auto bv = guided_body.values();
            for (std::size_t i = 0; i < dv.size(); ++i) dv[i] -= bv[i];
            return d;
        }
    }
    throw InvalidParameterError("unknown mask variant");
}

ScalarField io_map(const InversionTrajectory& traj, int t, const Condition& head_cond,
                   const Condition& body_cond, const IOMaskConfig& cfg,
                   const NoiseSchedule& sched, const NoisePredictor& pred) {
    if (t < 1 || t >= static_cast<int>(traj.latents.size())) {
        throw InvalidParameterError("io_map: timestep outside the stored trajectory");
    }
    const PixelGrid d = io_difference(traj.latents[static_cast<std::size_t>(t)], t, head_cond,
                                      body_cond, cfg, sched, pred);
    ScalarField map(d.height(), d.width());
    const double inv_c = 1.0 / d.channels();
    for (int r = 0; r < d.height(); ++r) {
        for (int c = 0; c < d.width(); ++c) {
            double acc = 0.0;
            for (int ch = 0; ch < d.channels(); ++ch) acc += std::abs(d.at(r, c, ch));
            map.at(r, c) = acc * inv_c;
        }
    }
    return map;
}

BinaryMask build_iomask(const ScalarField& map, const IOMaskConfig& cfg) {
    cfg.validate();
    ScalarField filtered = gaussian_filter(minmax_normalize(map), cfg.sigma);
    if (cfg.renormalize_filtered) filtered = minmax_normalize(filtered);
    return threshold(filtered, cfg.tau);
}

}  // namespace hid
