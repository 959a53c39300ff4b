// Copyright (c) 2026 flowsiren contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fsiren {

struct Image8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb; // row-major interleaved

    std::uint8_t at(int y, int x, int c) const
    {
        return rgb[3 * (static_cast<std::size_t>(y) * width + x) + c];
    }
};

/// Reads an 8-bit PNG or binary PPM (P6) by extension; grayscale, palette
/// and alpha PNG variants are converted to plain RGB.
Image8 read_image(const std::string& path);

/// Writes 8-bit RGB; format chosen by extension (.png or .ppm).
void write_image(const Image8& img, const std::string& path);

} // namespace fsiren
