/**
 * @file image.hpp
 * @brief Grayscale/RGB rasters and Netpbm (PGM/PPM) I/O.
 *
 * Continuous image coordinates: pixel (x, y) covers [x, x+1) x [y, y+1), so its
 * center is (x + 0.5, y + 0.5). Sub-pixel positions, contour models and ground
 * truth all live in this frame. Data is row-major.
 */

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace subedge {

/// Offset from a pixel index to its center in continuous coordinates.
inline constexpr double kPixelCenter = 0.5;

class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, double fill = 0.0);
    GrayImage(int width, int height, std::vector<double> data);

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] double at(int x, int y) const {
        return data_[static_cast<size_t>(y) * static_cast<size_t>(width_) + static_cast<size_t>(x)];
    }
    double& at(int x, int y) {
        return data_[static_cast<size_t>(y) * static_cast<size_t>(width_) + static_cast<size_t>(x)];
    }

    [[nodiscard]] const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

using Rgb = std::array<std::uint8_t, 3>;

class RgbImage {
public:
    RgbImage(int width, int height, Rgb fill = {0, 0, 0});

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] Rgb at(int x, int y) const {
        return data_[static_cast<size_t>(y) * static_cast<size_t>(width_) + static_cast<size_t>(x)];
    }
    Rgb& at(int x, int y) {
        return data_[static_cast<size_t>(y) * static_cast<size_t>(width_) + static_cast<size_t>(x)];
    }

private:
    int width_;
    int height_;
    std::vector<Rgb> data_;
};

/// Reads P2 or P5 PGM; intensities are divided by maxval (255 for 8-bit files).
GrayImage read_pgm(const std::filesystem::path& path);

/// Writes binary P5, clipping to [0, 1] and rounding to 8 bits.
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

/// Writes binary P6.
void write_ppm(const std::filesystem::path& path, const RgbImage& img);

/// Reads P6 (8-bit) PPM.
RgbImage read_ppm(const std::filesystem::path& path);

}  // namespace subedge
