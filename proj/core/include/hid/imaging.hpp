#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace hid {

/// Dense H x W x C grid of doubles stored row-major as (row, col, channel).
/// Images, latents and noise predictions all share this carrier.
class PixelGrid {
public:
    PixelGrid() = default;
    PixelGrid(int height, int width, int channels, double fill = 0.0);
    PixelGrid(int height, int width, int channels, std::vector<double> data);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    int channels() const noexcept { return channels_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& at(int row, int col, int ch) noexcept {
        return data_[index(row, col, ch)];
    }
    double at(int row, int col, int ch) const noexcept {
        return data_[index(row, col, ch)];
    }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    bool same_shape(const PixelGrid& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_ &&
               channels_ == other.channels_;
    }

    friend bool operator==(const PixelGrid&, const PixelGrid&) = default;

private:
    std::size_t index(int row, int col, int ch) const noexcept {
        return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
    }

    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

/// One real value per pixel (IO maps, filtered maps).
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(int height, int width, double fill = 0.0);
    ScalarField(int height, int width, std::vector<double> data);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& at(int row, int col) noexcept {
        return data_[static_cast<std::size_t>(row) * width_ + col];
    }
    double at(int row, int col) const noexcept {
        return data_[static_cast<std::size_t>(row) * width_ + col];
    }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

/// Per-pixel {0, 1} mask.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int height, int width, bool fill = false);

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }

    bool at(int row, int col) const noexcept {
        return data_[static_cast<std::size_t>(row) * width_ + col] != 0;
    }
    void set(int row, int col, bool on) noexcept {
        data_[static_cast<std::size_t>(row) * width_ + col] = on ? 1 : 0;
    }

    std::span<const std::uint8_t> values() const noexcept { return data_; }

    std::size_t count() const noexcept;
    bool none() const noexcept { return count() == 0; }

    BinaryMask operator|(const BinaryMask& other) const;
    BinaryMask operator&(const BinaryMask& other) const;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Truncated (radius ceil(3 sigma)), unit-sum 1-D Gaussian taps, center at index radius.
std::vector<double> gaussian_kernel(double sigma);

/// Separable 2-D Gaussian convolution with half-sample symmetric (edge
/// repeating) reflection at the borders. Throws InvalidParameterError for
/// sigma <= 0 or an empty field.
ScalarField gaussian_filter(const ScalarField& field, double sigma);

/// Maps [min, max] onto [0, 1]. A constant field maps to all zeros.
ScalarField minmax_normalize(const ScalarField& field);

/// mask = field >= tau (inclusive). tau must lie in [0, 1].
BinaryMask threshold(const ScalarField& field, double tau);

/// Base blended toward pure red with opacity 0.6 * f. Base must have 3 channels.
PixelGrid overlay_heatmap(const PixelGrid& base, const ScalarField& field);

/// Quantization used by all writers: clamp to [0, 1], floor(v * 255 + 0.5).
std::uint8_t quantize(double v) noexcept;

/// Binary PPM (P6, maxval 255). The grid must have 3 channels.
void write_image(const PixelGrid& grid, const std::filesystem::path& path);
/// Binary PGM (P5, maxval 255), set pixels written as 255.
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);
/// Binary PGM (P5, maxval 255) of a field assumed to lie in [0, 1].
void write_field(const ScalarField& field, const std::filesystem::path& path);

/// Reads P6 (3 channels) or P5 (1 channel) files with maxval 255; values are byte / 255.
PixelGrid read_image(const std::filesystem::path& path);

}  // namespace hid
