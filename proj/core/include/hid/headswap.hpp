#pragma once

#include <vector>

#include "hid/diffusion.hpp"
#include "hid/iomask.hpp"
#include "hid/synthgen.hpp"

namespace hid {

struct SwapConfig {
    int T = 50;
    /// Guidance scale of the head-conditioned denoising loop.
    double w = 3.0;
    /// Fraction of the schedule at which editing starts; 1.0 starts from z_T.
    double edit_fraction = 0.8;
    IOMaskConfig mask_cfg{};
    bool keep_step_latents = false;

    void validate() const;
    int edit_step() const;
};

struct SwapResult {
    PixelGrid output;
    BinaryMask mask;
    ScalarField io_map;
    InversionTrajectory trajectory;
    std::vector<PixelGrid> step_latents;  // z_{t-1} after blending, only when requested
    int edit_step = 0;
    /// Set when the mask is empty or covers the whole image.
    bool degenerate_mask = false;
};

/// Skin, hair style and hair colour from head; head tilt from body; clothing free.
Condition compose_head_condition(const AttributeSpec& head, const AttributeSpec& body);

/// All five attributes fixed to body's.
Condition body_condition(const AttributeSpec& body);

/// Condition that drives the pipeline: compose_head_condition with clothing
/// pinned to body's. The edited image keeps the body's clothing, and head = body
/// yields exactly body_condition(body).
Condition edit_condition(const AttributeSpec& head, const AttributeSpec& body);

/// Inversion of the body render, IOMask extraction at the edit step, and the
/// masked guided denoising loop that restores unmasked pixels from the stored
/// inversion latents at every step.
SwapResult run_headswap(const AttributeSpec& body, const AttributeSpec& head,
                        const SwapConfig& cfg, const NoiseSchedule& sched,
                        const NoisePredictor& pred);

}  // namespace hid
