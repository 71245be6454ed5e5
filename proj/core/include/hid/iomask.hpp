#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "hid/diffusion.hpp"
#include "hid/imaging.hpp"
#include "hid/synthgen.hpp"

namespace hid {

/// Which difference field feeds the IO map.
///   naive:   e_h - cfg(null, C_b, w)
///   no_orth: e_h - eps(C_b)
///   full:    component of e_h orthogonal to eps(C_b)
enum class MaskVariant { Naive, NoOrth, Full };

/// Scope of the projection used by the full variant. PerPixel is experimental.
enum class Projection { Global, PerPixel };

std::string to_string(MaskVariant v);
std::optional<MaskVariant> parse_variant(std::string_view name);

struct IOMaskConfig {
    double tau = 0.6;
    double sigma = 2.0;
    MaskVariant variant = MaskVariant::Full;
    double w = 3.0;
    Projection projection = Projection::Global;
    /// Min-max normalize again after the Gaussian filter, so tau is relative
    /// to the filtered peak. When false tau applies to the filtered values directly.
    bool renormalize_filtered = true;

    /// Throws InvalidParameterError on out-of-range fields.
    void validate() const;
};

/// eps_h - (<eps_b, eps_h> / |eps_b|^2) eps_b over the flattened grids.
/// Throws DegenerateReferenceError when eps_b is all zeros.
PixelGrid orthogonal_component(const PixelGrid& eps_h, const PixelGrid& eps_b);

/// Same projection applied independently to each pixel's channel vector.
/// Pixels whose reference vector is zero keep eps_h unchanged.
PixelGrid orthogonal_component_per_pixel(const PixelGrid& eps_h, const PixelGrid& eps_b);

/// Difference field D before channel aggregation, for the configured variant.
PixelGrid io_difference(const PixelGrid& latent, int t, const Condition& head_cond,
                        const Condition& body_cond, const IOMaskConfig& cfg,
                        const NoiseSchedule& sched, const NoisePredictor& pred);

/// Per-pixel mean over channels of |D| evaluated at traj.latents[t].
ScalarField io_map(const InversionTrajectory& traj, int t, const Condition& head_cond,
                   const Condition& body_cond, const IOMaskConfig& cfg,
                   const NoiseSchedule& sched, const NoisePredictor& pred);

/// threshold(gaussian_filter(minmax_normalize(map), sigma), tau), with a second
/// min-max normalization before the threshold when cfg.renormalize_filtered is set.
BinaryMask build_iomask(const ScalarField& map, const IOMaskConfig& cfg);

}  // namespace hid
