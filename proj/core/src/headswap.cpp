#include "hid/headswap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hid/errors.hpp"

namespace hid {

void SwapConfig::validate() const {
    if (T < 2) throw InvalidParameterError("T must be at least 2");
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidParameterError("w must be non-negative");
    if (!(edit_fraction > 0.0 && edit_fraction <= 1.0)) {
        throw InvalidParameterError("edit_fraction must lie in (0, 1]");
    }
    mask_cfg.validate();
}

int SwapConfig::edit_step() const {
    return std::max(1, static_cast<int>(std::lround(edit_fraction * T)));
}

Condition compose_head_condition(const AttributeSpec& head, const AttributeSpec& body) {
    Condition c;
    c.skin_tone = head.skin_tone;
    c.hair_style = head.hair_style;
    c.hair_color = head.hair_color;
    c.head_tilt = body.head_tilt;
    return c;
}

Condition body_condition(const AttributeSpec& body) {
    return Condition{body.skin_tone, body.hair_style, body.hair_color, body.clothing_color,
                     body.head_tilt};
}

Condition edit_condition(const AttributeSpec& head, const AttributeSpec& body) {
    Condition c = compose_head_condition(head, body);
    c.clothing_color = body.clothing_color;
    return c;
}

SwapResult run_headswap(const AttributeSpec& body, const AttributeSpec& head,
                        const SwapConfig& cfg, const NoiseSchedule& sched,
                        const NoisePredictor& pred) {
    cfg.validate();
    if (sched.steps() != cfg.T) {
        throw InvalidParameterError("run_headswap: schedule has " + std::to_string(sched.steps()) +
                                    " steps, config expects " + std::to_string(cfg.T));
    }
    const PixelGrid body_image = render_avatar(body).image;
    const Condition c_body = body_condition(body);
    const Condition c_head = edit_condition(head, body);

    SwapResult res;
    res.trajectory = invert_trajectory(body_image, c_body, sched, pred);
    res.edit_step = cfg.edit_step();
    res.io_map = io_map(res.trajectory, res.edit_step, c_head, c_body, cfg.mask_cfg, sched, pred);
    res.mask = build_iomask(res.io_map, cfg.mask_cfg);
    res.degenerate_mask = res.mask.none() || res.mask.count() == res.mask.size();

    const GuidanceConfig guidance{cfg.w};
    const int h = body_image.height();
    const int w = body_image.width();
    const int channels = body_image.channels();

    PixelGrid z = res.trajectory.latents[static_cast<std::size_t>(res.edit_step)];
    for (int t = res.edit_step; t >= 1; --t) {
        const PixelGrid eps = cfg_combine(pred.evaluate(z, t, Condition{}, sched),
                                          pred.evaluate(z, t, c_head, sched), guidance);
        const PixelGrid denoised = ddim_sample_step(z, eps, t, sched);
        const PixelGrid& kept = res.trajectory.latents[static_cast<std::size_t>(t - 1)];
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                const PixelGrid& src = res.mask.at(r, c) ? denoised : kept;
                for (int ch = 0; ch < channels; ++ch) z.at(r, c, ch) = src.at(r, c, ch);
            }
        }
        if (cfg.keep_step_latents) res.step_latents.push_back(z);
    }
    res.output = std::move(z);
    return res;
}

}  // namespace hid
