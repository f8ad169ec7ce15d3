#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "smsfp/raster.hpp"
#include "smsfp/types.hpp"

namespace smsfp {

// PFM: text header ("Pf" gray / "PF" 3-channel), rows stored bottom-up,
// little-endian 32-bit floats (scale -1).
void write_pfm(const std::string& path, const RasterF& raster);
void write_pfm_rgb(const std::string& path, const RasterF& r, const RasterF& g, const RasterF& b);
RasterF read_pfm(const std::string& path);
std::array<RasterF, 3> read_pfm_rgb(const std::string& path);

// Grayscale PNG, linearized by the max code value on read.
RasterF read_png_gray(const std::string& path);
MaskRaster read_png_mask(const std::string& path);  // nonzero -> 1

void write_png_gray8(const std::string& path, const RasterF& raster);   // values in [0,1]
void write_png_gray16(const std::string& path, const Raster<std::uint16_t>& raster);
void write_png_mask(const std::string& path, const MaskRaster& mask);
void write_png_rgb8(const std::string& path, const Raster<std::uint8_t>& r,
                    const Raster<std::uint8_t>& g, const Raster<std::uint8_t>& b);

// (n+1)/2 RGB encoding of a normal map.
void write_normal_png(const std::string& path, const NormalMap& normals, const MaskRaster& mask);
void write_normal_pfm(const std::string& path, const NormalMap& normals);
NormalMap read_normal_pfm(const std::string& path);

// Angular-error visualization: 0..90 degrees mapped blue -> red, saturating
// above 90; non-mask pixels black.
void write_error_map_png(const std::string& path, const RasterF& error_deg, const MaskRaster& mask);

// All writers go through a temp file + rename so outputs appear atomically.
void write_text_atomic(const std::string& path, const std::string& contents);

}  // namespace smsfp
