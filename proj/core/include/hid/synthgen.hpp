#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hid/imaging.hpp"

namespace hid {

enum class HairStyle : int { Bald = 0, Short = 1, Long = 2 };

inline constexpr int kSkinTones = 3;
inline constexpr int kHairStyles = 3;
inline constexpr int kHairColors = 3;
inline constexpr int kClothingColors = 4;
inline constexpr int kHeadTilts = 3;
inline constexpr int kAttributeCombinations =
    kSkinTones * kHairStyles * kHairColors * kClothingColors * kHeadTilts;

inline constexpr int kAvatarSize = 32;

/// Discrete avatar attributes. head_tilt is a horizontal head offset in {-1, 0, +1}.
struct AttributeSpec {
    int skin_tone = 0;
    HairStyle hair_style = HairStyle::Bald;
    int hair_color = 0;
    int clothing_color = 0;
    int head_tilt = -1;

    bool valid() const noexcept;

    /// The five attributes as integers, in the order used by dataset.tsv and the CLI.
    std::array<int, 5> to_tuple() const noexcept;
    /// Throws InvalidParameterError naming the offending field.
    static AttributeSpec from_tuple(const std::array<int, 5>& values);

    /// Position 0..323 in lexicographic (skin, hair style, hair color, clothing, tilt) order.
    int ordinal() const noexcept;
    static AttributeSpec from_ordinal(int ordinal);

    friend bool operator==(const AttributeSpec&, const AttributeSpec&) = default;
};

inline constexpr std::array<const char*, 5> kAttributeNames = {
    "skin_tone", "hair_style", "hair_color", "clothing_color", "head_tilt"};

std::string to_string(HairStyle style);
std::string to_string(const AttributeSpec& attrs);

/// Partial attribute constraints. An empty condition is the null condition and matches everything.
struct Condition {
    std::optional<int> skin_tone;
    std::optional<HairStyle> hair_style;
    std::optional<int> hair_color;
    std::optional<int> clothing_color;
    std::optional<int> head_tilt;

    bool is_null() const noexcept;
    /// Number of AttributeSpecs this condition matches.
    int match_count() const noexcept;

    friend bool operator==(const Condition&, const Condition&) = default;
};

bool condition_match(const Condition& cond, const AttributeSpec& attrs) noexcept;

struct AvatarRender {
    PixelGrid image;
    BinaryMask head_mask;
    BinaryMask hair_mask;
    AttributeSpec attrs;
};

using Rgb = std::array<double, 3>;

/// Fixed colour constants of the renderer.
struct Palette {
    static constexpr Rgb background = {0.97, 0.79, 0.24};
    static constexpr std::array<Rgb, kSkinTones> skin = {{
        {0.31, 0.41, 0.03},
        {0.73, 0.96, 0.16},
        {0.98, 0.51, 0.50},
    }};
    static constexpr std::array<Rgb, kHairColors> hair = {{
        {0.48, 0.64, 0.85},
        {0.60, 0.03, 0.38},
        {0.15, 0.82, 0.41},
    }};
    static constexpr std::array<Rgb, kClothingColors> clothing = {{
        {0.14, 0.16, 0.98},
        {0.02, 0.28, 0.68},
        {0.61, 0.72, 0.02},
        {0.80, 0.50, 0.11},
    }};
};

/// Integer-only geometry of the avatar, exposed for probes and tests.
struct AvatarGeometry {
    static constexpr int head_row = 11;
    static constexpr int head_radius = 6;
    static constexpr int cap_radius = 8;
    static constexpr int cap_bottom_row = 11;   // ring part of the cap stops at the head centre row
    static constexpr int fringe_bottom_row = 6;  // hair covers disc pixels at or above this row
    static constexpr int torso_top = 18;
    static constexpr int torso_left = 6;
    static constexpr int torso_right = 25;
    static constexpr int long_hair_top = 9;
    static constexpr int long_hair_extra_rows = 8;
    static constexpr int long_hair_inner = 5;  // side columns span |col - cx| in [inner, outer]
    static constexpr int long_hair_outer = 8;

    static constexpr int head_col(int tilt) noexcept { return 16 + 4 * tilt; }
    static constexpr int disc_bottom_row() noexcept { return head_row + head_radius; }

    static bool in_disc(int row, int col, int tilt) noexcept;
    static bool in_cap(int row, int col, int tilt) noexcept;
    /// Side columns of long hair (outside the disc).
    static bool in_long_sides(int row, int col, int tilt) noexcept;
    static bool in_torso(int row, int col) noexcept;
};

/// Deterministic 32x32 RGB render with exact head and hair masks.
AvatarRender render_avatar(const AttributeSpec& attrs);

/// All 324 attribute combinations in lexicographic order.
std::vector<AvatarRender> enumerate_dataset();

/// Head attributes (skin, hair style, hair colour) from head; clothing and tilt from body.
AttributeSpec swap_attributes(const AttributeSpec& body, const AttributeSpec& head) noexcept;

AvatarRender oracle_swap(const AttributeSpec& body, const AttributeSpec& head);

/// Union of head and hair masks of the body render and of the oracle swap.
BinaryMask ground_truth_edit_mask(const AttributeSpec& body, const AttributeSpec& head);

}  // namespace hid
