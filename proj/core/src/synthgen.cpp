#include "hid/synthgen.hpp"

#include "hid/errors.hpp"

namespace hid {

bool AttributeSpec::valid() const noexcept {
    const int style = static_cast<int>(hair_style);
    return skin_tone >= 0 && skin_tone < kSkinTones && style >= 0 && style < kHairStyles &&
           hair_color >= 0 && hair_color < kHairColors && clothing_color >= 0 &&
           clothing_color < kClothingColors && head_tilt >= -1 && head_tilt <= 1;
}

std::array<int, 5> AttributeSpec::to_tuple() const noexcept {
    return {skin_tone, static_cast<int>(hair_style), hair_color, clothing_color, head_tilt};
}

AttributeSpec AttributeSpec::from_tuple(const std::array<int, 5>& v) {
    const auto check = [](int value, int lo, int hi, const char* name) {
        if (value < lo || value > hi) {
            throw InvalidParameterError(std::string(name) + " must lie in [" + std::to_string(lo) +
                                        ", " + std::to_string(hi) + "], got " +
                                        std::to_string(value));
        }
    };
    check(v[0], 0, kSkinTones - 1, kAttributeNames[0]);
    check(v[1], 0, kHairStyles - 1, kAttributeNames[1]);
    check(v[2], 0, kHairColors - 1, kAttributeNames[2]);
    check(v[3], 0, kClothingColors - 1, kAttributeNames[3]);
    check(v[4], -1, 1, kAttributeNames[4]);
    return AttributeSpec{v[0], static_cast<HairStyle>(v[1]), v[2], v[3], v[4]};
}

int AttributeSpec::ordinal() const noexcept {
    int o = skin_tone;
    o = o * kHairStyles + static_cast<int>(hair_style);
    o = o * kHairColors + hair_color;
    o = o * kClothingColors + clothing_color;
    o = o * kHeadTilts + (head_tilt + 1);
    return o;
}

AttributeSpec AttributeSpec::from_ordinal(int ordinal) {
    if (ordinal < 0 || ordinal >= kAttributeCombinations) {
        throw InvalidParameterError("attribute ordinal out of range: " + std::to_string(ordinal));
    }
    AttributeSpec a;
    a.head_tilt = ordinal % kHeadTilts - 1;
    ordinal /= kHeadTilts;
    a.clothing_color = ordinal % kClothingColors;
    ordinal /= kClothingColors;
    a.hair_color = ordinal % kHairColors;
    ordinal /= kHairColors;
    a.hair_style = static_cast<HairStyle>(ordinal % kHairStyles);
    a.skin_tone = ordinal / kHairStyles;
    return a;
}

std::string to_string(HairStyle style) {
    switch (style) {
        case HairStyle::Bald: return "bald";
        case HairStyle::Short: return "short";
        case HairStyle::Long: return "long";
    }
    return "?";
}

std::string to_string(const AttributeSpec& a) {
    const auto t = a.to_tuple();
    return std::to_string(t[0]) + "," + std::to_string(t[1]) + "," + std::to_string(t[2]) + "," +
           std::to_string(t[3]) + "," + std::to_string(t[4]);
}

bool Condition::is_null() const noexcept {
    return !skin_tone && !hair_style && !hair_color && !clothing_color && !head_tilt;
}

int Condition::match_count() const noexcept {
    int n = kAttributeCombinations;
    if (skin_tone) n /= kSkinTones;
    if (hair_style) n /= kHairStyles;
    if (hair_color) n /= kHairColors;
    if (clothing_color) n /= kClothingColors;
    if (head_tilt) n /= kHeadTilts;
    return n;
}

bool condition_match(const Condition& c, const AttributeSpec& a) noexcept {
    return (!c.skin_tone || *c.skin_tone == a.skin_tone) &&
           (!c.hair_style || *c.hair_style == a.hair_style) &&
           (!c.hair_color || *c.hair_color == a.hair_color) &&
           (!c.clothing_color || *c.clothing_color == a.clothing_color) &&
           (!c.head_tilt || *c.head_tilt == a.head_tilt);
}

bool AvatarGeometry::in_disc(int row, int col, int tilt) noexcept {
    const int dr = row - head_row;
    const int dc = col - head_col(tilt);
    return dr * dr + dc * dc <= head_radius * head_radius;
}

bool AvatarGeometry::in_cap(int row, int col, int tilt) noexcept {
    const int dr = row - head_row;
    const int dc = col - head_col(tilt);
    const int d2 = dr * dr + dc * dc;
    if (d2 > cap_radius * cap_radius) return false;
    if (row <= fringe_bottom_row) return true;
    return d2 > head_radius * head_radius && row <= cap_bottom_row;
}

bool AvatarGeometry::in_long_sides(int row, int col, int tilt) noexcept {
    if (row < long_hair_top || row > disc_bottom_row() + long_hair_extra_rows) return false;
    const int adc = col > head_col(tilt) ? col - head_col(tilt) : head_col(tilt) - col;
    if (adc < long_hair_inner || adc > long_hair_outer) return false;
    return !in_disc(row, col, tilt);
}

bool AvatarGeometry::in_torso(int row, int col) noexcept {
    return row >= torso_top && col >= torso_left && col <= torso_right;
}

AvatarRender render_avatar(const AttributeSpec& attrs) {
    if (!attrs.valid()) {
        throw InvalidParameterError("render_avatar: invalid attributes " + to_string(attrs));
    }
    using G = AvatarGeometry;
    AvatarRender out{PixelGrid(kAvatarSize, kAvatarSize, 3),
                     BinaryMask(kAvatarSize, kAvatarSize),
                     BinaryMask(kAvatarSize, kAvatarSize),
                     attrs};
    const Rgb& skin = Palette::skin[attrs.skin_tone];
    const Rgb& hair = Palette::hair[attrs.hair_color];
    const Rgb& cloth = Palette::clothing[attrs.clothing_color];

    for (int r = 0; r < kAvatarSize; ++r) {
        for (int c = 0; c < kAvatarSize; ++c) {
            const Rgb* color = &Palette::background;
            if (G::in_torso(r, c)) color = &cloth;

            bool is_hair = false;
            if (attrs.hair_style != HairStyle::Bald) {
                is_hair = G::in_cap(r, c, attrs.head_tilt);
                if (attrs.hair_style == HairStyle::Long) {
                    is_hair = is_hair || G::in_long_sides(r, c, attrs.head_tilt);
                }
            }
            if (is_hair) {
                color = &hair;
                out.hair_mask.set(r, c, true);
            } else if (G::in_disc(r, c, attrs.head_tilt)) {
                color = &skin;
                out.head_mask.set(r, c, true);
            }
            for (int ch = 0; ch < 3; ++ch) out.image.at(r, c, ch) = (*color)[ch];
        }
    }
    return out;
}

std::vector<AvatarRender> enumerate_dataset() {
    std::vector<AvatarRender> out;
    out.reserve(kAttributeCombinations);
    for (int i = 0; i < kAttributeCombinations; ++i) {
        out.push_back(render_avatar(AttributeSpec::from_ordinal(i)));
    }
    return out;
}

AttributeSpec swap_attributes(const AttributeSpec& body, const AttributeSpec& head) noexcept {
    AttributeSpec s = body;
    s.skin_tone = head.skin_tone;
    s.hair_style = head.hair_style;
    s.hair_color = head.hair_color;
    return s;
}

AvatarRender oracle_swap(const AttributeSpec& body, const AttributeSpec& head) {
    return render_avatar(swap_attributes(body, head));
}

BinaryMask ground_truth_edit_mask(const AttributeSpec& body, const AttributeSpec& head) {
    const AvatarRender b = render_avatar(body);
    const AvatarRender o = oracle_swap(body, head);
    return b.head_mask | b.hair_mask | o.head_mask | o.hair_mask;
}

}  // namespace hid
