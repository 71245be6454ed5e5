#include "hid/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "hid/errors.hpp"

namespace hid {

namespace {

void require_positive_dims(int height, int width, int channels) {
    if (height <= 0 || width <= 0 || channels <= 0) {
        throw InvalidParameterError("grid dimensions must be positive, got " +
                                    std::to_string(height) + "x" + std::to_string(width) +
                                    "x" + std::to_string(channels));
    }
}

// Half-sample symmetric reflection: ... b a | a b c d | d c ...
int reflect_index(int i, int n) noexcept {
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

}  // namespace

PixelGrid::PixelGrid(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
    require_positive_dims(height, width, channels);
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

PixelGrid::PixelGrid(int height, int width, int channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    require_positive_dims(height, width, channels);
    if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
        throw ShapeMismatchError("PixelGrid data length " + std::to_string(data_.size()) +
                                 " does not match " + std::to_string(height) + "x" +
                                 std::to_string(width) + "x" + std::to_string(channels));
    }
}

ScalarField::ScalarField(int height, int width, double fill) : height_(height), width_(width) {
    require_positive_dims(height, width, 1);
    data_.assign(static_cast<std::size_t>(height) * width, fill);
}

ScalarField::ScalarField(int height, int width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
    require_positive_dims(height, width, 1);
    if (data_.size() != static_cast<std::size_t>(height) * width) {
        throw ShapeMismatchError("ScalarField data length does not match dimensions");
    }
}

BinaryMask::BinaryMask(int height, int width, bool fill) : height_(height), width_(width) {
    require_positive_dims(height, width, 1);
    data_.assign(static_cast<std::size_t>(height) * width, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::operator|(const BinaryMask& other) const {
    if (height_ != other.height_ || width_ != other.width_) {
        throw ShapeMismatchError("mask union: dimension mismatch");
    }
    BinaryMask out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] |= other.data_[i];
    return out;
}

BinaryMask BinaryMask::operator&(const BinaryMask& other) const {
    if (height_ != other.height_ || width_ != other.width_) {
        throw ShapeMismatchError("mask intersection: dimension mismatch");
    }
    BinaryMask out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] &= other.data_[i];
    return out;
}

std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidParameterError("gaussian sigma must be positive, got " +
                                    std::to_string(sigma));
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double v = std::exp(-0.5 * (k * k) / (sigma * sigma));
        taps[k + radius] = v;
        sum += v;
    }
    for (double& v : taps) v /= sum;
    return taps;
}

ScalarField gaussian_filter(const ScalarField& field, double sigma) {
    const std::vector<double> taps = gaussian_kernel(sigma);
    if (field.empty()) throw InvalidParameterError("gaussian_filter: empty field");
    const int radius = static_cast<int>(taps.size() / 2);
    const int h = field.height();
    const int w = field.width();

    ScalarField rows(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += taps[k + radius] * field.at(r, reflect_index(c + k, w));
            }
            rows.at(r, c) = acc;
        }
    }
    ScalarField out(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += taps[k + radius] * rows.at(reflect_index(r + k, h), c);
            }
            out.at(r, c) = acc;
        }
    }
    return out;
}

ScalarField minmax_normalize(const ScalarField& field) {
    if (field.empty()) return field;
    const auto [lo_it, hi_it] = std::minmax_element(field.values().begin(), field.values().end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    ScalarField out(field.height(), field.width(), 0.0);
    if (!(hi > lo)) return out;
    const double span = hi - lo;
    auto dst = out.values();
    auto src = field.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = (src[i] - lo) / span;
    }
    return out;
}

BinaryMask threshold(const ScalarField& field, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) {
        throw InvalidParameterError("threshold tau must lie in [0, 1], got " +
                                    std::to_string(tau));
    }
    BinaryMask mask(field.height(), field.width());
    for (int r = 0; r < field.height(); ++r) {
        for (int c = 0; c < field.width(); ++c) {
            mask.set(r, c, field.at(r, c) >= tau);
        }
    }
    return mask;
}

PixelGrid overlay_heatmap(const PixelGrid& base, const ScalarField& field) {
    if (base.channels() != 3) {
        throw ShapeMismatchError("overlay_heatmap: base must have 3 channels");
    }
    if (base.height() != field.height() || base.width() != field.width()) {
        throw ShapeMismatchError("overlay_heatmap: base and field dimensions differ");
    }
    constexpr double kOpacity = 0.6;
    constexpr double kRed[3] = {1.0, 0.0, 0.0};
    PixelGrid out = base;
    for (int r = 0; r < base.height(); ++r) {
        for (int c = 0; c < base.width(); ++c) {
            const double a = kOpacity * field.at(r, c);
            for (int ch = 0; ch < 3; ++ch) {
                out.at(r, c, ch) = (1.0 - a) * base.at(r, c, ch) + a * kRed[ch];
            }
        }
    }
    return out;
}

std::uint8_t quantize(double v) noexcept {
    if (!(v > 0.0)) return 0;  // also maps NaN to 0
    if (v >= 1.0) return 255;
    return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

namespace {

void write_netpbm(const std::filesystem::path& path, const char* magic, int width, int height,
                  const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << magic << '\n' << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

class HeaderParser {
public:
    HeaderParser(const std::vector<unsigned char>& bytes, const std::filesystem::path& path)
        : bytes_(bytes), path_(path) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw IoError(path_.string() + ": " + what + " at byte offset " + std::to_string(pos_));
    }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const unsigned char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    int read_uint() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) fail("expected integer");
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000) fail("integer too large");
            ++pos_;
        }
        return static_cast<int>(value);
    }

    std::size_t pos_ = 0;

private:
    const std::vector<unsigned char>& bytes_;
    const std::filesystem::path& path_;
};

}  // namespace

void write_image(const PixelGrid& grid, const std::filesystem::path& path) {
    if (grid.channels() != 3) {
        throw ShapeMismatchError("write_image: expected 3 channels, got " +
                                 std::to_string(grid.channels()));
    }
    std::vector<std::uint8_t> bytes(grid.size());
    std::transform(grid.values().begin(), grid.values().end(), bytes.begin(), quantize);
    write_netpbm(path, "P6", grid.width(), grid.height(), bytes);
}

void write_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes(mask.size());
    std::transform(mask.values().begin(), mask.values().end(), bytes.begin(),
                   [](std::uint8_t v) { return static_cast<std::uint8_t>(v ? 255 : 0); });
    write_netpbm(path, "P5", mask.width(), mask.height(), bytes);
}

void write_field(const ScalarField& field, const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes(field.size());
    std::transform(field.values().begin(), field.values().end(), bytes.begin(), quantize);
    write_netpbm(path, "P5", field.width(), field.height(), bytes);
}

PixelGrid read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                           std::istreambuf_iterator<char>());
    HeaderParser p(bytes, path);
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '5')) {
        p.fail("bad magic, expected P6 or P5");
    }
    const int channels = bytes[1] == '6' ? 3 : 1;
    p.pos_ = 2;
    const int width = p.read_uint();
    const int height = p.read_uint();
    const int maxval = p.read_uint();
    if (width <= 0 || height <= 0) p.fail("non-positive dimensions");
    if (maxval != 255) p.fail("unsupported maxval " + std::to_string(maxval));
    if (p.pos_ >= bytes.size() || !std::isspace(bytes[p.pos_])) {
        p.fail("expected single whitespace after maxval");
    }
    ++p.pos_;
    const std::size_t n = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() - p.pos_ < n) {
        p.fail("truncated pixel data, need " + std::to_string(n) + " bytes");
    }
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = bytes[p.pos_ + i] / 255.0;
    return PixelGrid(height, width, channels, std::move(data));
}

}  // namespace hid
