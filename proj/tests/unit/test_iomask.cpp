#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hid/errors.hpp"
#include "hid/headswap.hpp"
#include "hid/iomask.hpp"
#include "test_util.hpp"

using namespace hid;

namespace {

double dot(const PixelGrid& a, const PixelGrid& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
    return s;
}

AttributeSpec spec(int skin, HairStyle style, int hair, int cloth, int tilt) {
    AttributeSpec a;
    a.skin_tone = skin;
    a.hair_style = style;
    a.hair_color = hair;
    a.clothing_color = cloth;
    a.head_tilt = tilt;
    return a;
}

struct Fixture {
    NoiseSchedule sched = make_schedule(50);
    const NoisePredictor& pred = test::full_predictor();

    InversionTrajectory invert(const AttributeSpec& body) const {
        return invert_trajectory(render_avatar(body).image, body_condition(body), sched, pred);
    }
};

}  // namespace

TEST(OrthogonalComponent, SelfProjectionIsZero) {
    std::mt19937_64 rng(1);
    const PixelGrid v = test::gaussian_grid(rng, 4, 4, 3);
    const PixelGrid o = orthogonal_component(v, v);
    for (double x : o.values()) EXPECT_NEAR(x, 0.0, 1e-15);
}

TEST(OrthogonalComponent, ThreeVectorArithmetic) {
    const PixelGrid b(1, 1, 3, std::vector<double>{2, 0, 0});
    const PixelGrid h(1, 1, 3, std::vector<double>{1, 2, 3});
    const PixelGrid o = orthogonal_component(h, b);
    EXPECT_EQ(o.at(0, 0, 0), 0.0);
    EXPECT_EQ(o.at(0, 0, 1), 2.0);
    EXPECT_EQ(o.at(0, 0, 2), 3.0);
}

TEST(OrthogonalComponent, RandomPairsAreOrthogonal) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const PixelGrid h = test::gaussian_grid(rng, 8, 8, 3);
        const PixelGrid b = test::gaussian_grid(rng, 8, 8, 3);
        const PixelGrid o = orthogonal_component(h, b);
        EXPECT_LT(std::abs(dot(o, b)) / std::sqrt(dot(o, o) * dot(b, b)), 1e-10);
    }
}

TEST(OrthogonalComponent, Errors) {
    EXPECT_THROW(orthogonal_component(PixelGrid(2, 2, 3, 1.0), PixelGrid(2, 2, 3, 0.0)),
                 DegenerateReferenceError);
    EXPECT_THROW(orthogonal_component(PixelGrid(2, 2, 3), PixelGrid(2, 2, 1)), ShapeMismatchError);
}

TEST(OrthogonalComponent, PerPixelIsOrthogonalPerPixel) {
    std::mt19937_64 rng(3);
    const PixelGrid h = test::gaussian_grid(rng, 5, 5, 3);
    PixelGrid b = test::gaussian_grid(rng, 5, 5, 3);
    for (int ch = 0; ch < 3; ++ch) b.at(0, 0, ch) = 0.0;
    const PixelGrid o = orthogonal_component_per_pixel(h, b);
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 5; ++c) {
            double d = 0.0;
            for (int ch = 0; ch < 3; ++ch) d += o.at(r, c, ch) * b.at(r, c, ch);
            EXPECT_NEAR(d, 0.0, 1e-12);
        }
    }
    for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(o.at(0, 0, ch), h.at(0, 0, ch));
}

TEST(IOMaskConfig, Validation) {
    IOMaskConfig c;
    EXPECT_NO_THROW(c.validate());
    c.tau = 1.5;
    EXPECT_THROW(c.validate(), InvalidParameterError);
    c = {};
    c.sigma = 0.0;
    EXPECT_THROW(c.validate(), InvalidParameterError);
    c = {};
    c.w = -1.0;
    EXPECT_THROW(c.validate(), InvalidParameterError);
    EXPECT_EQ(parse_variant("no_orth"), MaskVariant::NoOrth);
    EXPECT_EQ(parse_variant("orth"), std::nullopt);
    for (auto v : {MaskVariant::Naive, MaskVariant::NoOrth, MaskVariant::Full}) {
        EXPECT_EQ(parse_variant(to_string(v)), v);
    }
}

TEST(BuildIOMask, ZeroMapAndTauZero) {
    IOMaskConfig cfg;
    EXPECT_TRUE(build_iomask(ScalarField(32, 32, 0.0), cfg).none());
    cfg.tau = 0.0;
    std::mt19937_64 rng(4);
    EXPECT_EQ(build_iomask(test::random_field(rng, 32, 32), cfg).count(), 1024u);
}

TEST(BuildIOMask, SpikeWithoutRenormalizationIsEmpty) {
    ScalarField spike(32, 32);
    spike.at(16, 16) = 1.0;
    IOMaskConfig cfg;
    cfg.renormalize_filtered = false;
    const auto k = gaussian_kernel(2.0);
    const double peak = gaussian_filter(spike, 2.0).at(16, 16);
    EXPECT_NEAR(peak, k[6] * k[6], 1e-15);
    EXPECT_LT(peak, 0.6);
    EXPECT_TRUE(build_iomask(spike, cfg).none());
}

TEST(BuildIOMask, SpikeWithRenormalizationKeepsTheCore) {
    ScalarField spike(32, 32);
    spike.at(16, 16) = 1.0;
    const IOMaskConfig cfg;
    // Separable Gaussian: relative level at offset (dr, dc) is exp(-(dr^2 + dc^2) / (2 sigma^2)).
    BinaryMask want(32, 32);
    for (int r = 0; r < 32; ++r) {
        for (int c = 0; c < 32; ++c) {
            const double d2 = (r - 16) * (r - 16) + (c - 16) * (c - 16);
            want.set(r, c, std::exp(-d2 / 8.0) >= 0.6);
        }
    }
    EXPECT_EQ(build_iomask(spike, cfg), want);
    EXPECT_EQ(want.count(), 13u);
}

TEST(BuildIOMask, ScaleInvariant) {
    std::mt19937_64 rng(5);
    for (bool renorm : {false, true}) {
        IOMaskConfig cfg;
        cfg.renormalize_filtered = renorm;
        for (int trial = 0; trial < 10; ++trial) {
            const ScalarField m = test::random_field(rng, 32, 32);
            ScalarField scaled = m;
            for (double& v : scaled.values()) v *= 4.0;  // power of two keeps rounding identical
            EXPECT_EQ(build_iomask(m, cfg), build_iomask(scaled, cfg));
        }
    }
}

TEST(IoMap, EqualConditionsAtUnitGuidanceGiveZeroFullMap) {
    Fixture f;
    const AttributeSpec body = spec(1, HairStyle::Short, 2, 1, 0);
    const InversionTrajectory traj = f.invert(body);
    IOMaskConfig cfg;
    cfg.w = 1.0;
    const Condition cb = body_condition(body);
    for (auto variant : {MaskVariant::Full, MaskVariant::NoOrth, MaskVariant::Naive}) {
        cfg.variant = variant;
        const ScalarField map = io_map(traj, 40, cb, cb, cfg, f.sched, f.pred);
        for (double v : map.values()) EXPECT_NEAR(v, 0.0, 1e-12) << to_string(variant);
        for (double tau : {0.1, 0.6, 1.0}) {
            cfg.tau = tau;
            EXPECT_TRUE(build_iomask(map, cfg).none());
        }
        cfg.tau = 0.6;
    }
}

TEST(IoMap, NaiveWithEqualConditionsIsZeroForAnyGuidance) {
    Fixture f;
    const AttributeSpec body = spec(0, HairStyle::Long, 1, 2, -1);
    const InversionTrajectory traj = f.invert(body);
    IOMaskConfig cfg;
    cfg.variant = MaskVariant::Naive;
    for (double w : {0.0, 3.0, 7.5}) {
        cfg.w = w;
        const Condition cb = body_condition(body);
        const ScalarField map = io_map(traj, 40, cb, cb, cfg, f.sched, f.pred);
        for (double v : map.values()) EXPECT_EQ(v, 0.0);
    }
}

TEST(IoMap, FullDifferenceIsOrthogonalToBodyPrediction) {
    Fixture f;
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 5; ++trial) {
        const AttributeSpec body = AttributeSpec::from_ordinal(static_cast<int>(rng() % 324));
        const AttributeSpec head = AttributeSpec::from_ordinal(static_cast<int>(rng() % 324));
        const InversionTrajectory traj = f.invert(body);
        const Condition cb = body_condition(body);
        IOMaskConfig cfg;
        const PixelGrid d = io_difference(traj.latents[40], 40, edit_condition(head, body),
                                          cb, cfg, f.sched, f.pred);
        const PixelGrid eb = f.pred.evaluate(traj.latents[40], 40, cb, f.sched);
        EXPECT_LE(std::abs(dot(d, eb)), 1e-10 * std::sqrt(dot(d, d) * dot(eb, eb)) + 1e-300);
    }
}

TEST(IoMap, LongHairRemovalMapsConcentrateOnTheEditRegion) {
    // With exact conditions on both sides the naive difference is w * (e(C_h) - e(C_b)),
    // which vanishes bit-exactly wherever body and oracle agree. The full variant
    // also carries the null-condition spread, so its mass leaks outside.
    Fixture f;
    const AttributeSpec body = spec(0, HairStyle::Long, 0, 1, 0);
    const AttributeSpec head = spec(0, HairStyle::Bald, 0, 3, 0);
    const InversionTrajectory traj = f.invert(body);
    const BinaryMask gt = ground_truth_edit_mask(body, head);
    const auto mass_in_gt = [&](MaskVariant v) {
        IOMaskConfig cfg;
        cfg.variant = v;
        const ScalarField map = io_map(traj, 40, edit_condition(head, body),
                                       body_condition(body), cfg, f.sched, f.pred);
        double in = 0.0;
        double total = 0.0;
        for (int r = 0; r < 32; ++r) {
            for (int c = 0; c < 32; ++c) {
                total += map.at(r, c);
                if (gt.at(r, c)) in += map.at(r, c);
            }
        }
        return in / total;
    };
    EXPECT_EQ(mass_in_gt(MaskVariant::Naive), 1.0);
    const double full = mass_in_gt(MaskVariant::Full);
    EXPECT_GT(full, 0.5);
    EXPECT_LT(full, 1.0);

    IOMaskConfig cfg;
    const BinaryMask mask = build_iomask(
        io_map(traj, 40, edit_condition(head, body), body_condition(body), cfg, f.sched, f.pred), cfg);
    const BinaryMask hair = render_avatar(body).hair_mask;
    EXPECT_GE(2 * (mask & hair).count(), hair.count());
}

TEST(IoMap, TimestepRange) {
    Fixture f;
    const AttributeSpec body = spec(0, HairStyle::Bald, 0, 0, 0);
    const InversionTrajectory traj = f.invert(body);
    const Condition cb = body_condition(body);
    EXPECT_THROW(io_map(traj, 0, cb, cb, {}, f.sched, f.pred), InvalidParameterError);
    EXPECT_THROW(io_map(traj, 51, cb, cb, {}, f.sched, f.pred), InvalidParameterError);
}
