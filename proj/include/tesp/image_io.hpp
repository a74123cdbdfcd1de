#pragma once

#include "tesp/tubal.hpp"

#include <string>

namespace tesp::image {

// RGB image as a height x width x 3 tensor with intensities in [0, 1].
TubalMatrix read_png(const std::string& path);
void write_png(const std::string& path, const TubalMatrix& img);

// Raw little-endian float32, three planes of height x width in row-major order.
TubalMatrix read_raw_planar(const std::string& path, Index height, Index width);
void write_raw_planar(const std::string& path, const TubalMatrix& img);

// Smooth deterministic test pattern.
TubalMatrix synthetic(Index height, Index width);

// Load by extension: .png, otherwise raw planar with the given size.
TubalMatrix load(const std::string& path, Index height = 0, Index width = 0);

}  // namespace tesp::image
