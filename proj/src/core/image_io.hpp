#pragma once

#include <filesystem>
#include <string>

#include "grid.hpp"
#include "matching.hpp"
#include "probability.hpp"

namespace depthfuse {

/// Single-channel PFM ("Pf"), little-endian (scale -1.0), rows stored bottom-up
/// as the format prescribes. Values are narrowed to 32-bit float.
void write_pfm(const std::filesystem::path& path, const DepthImage& image);
DepthImage read_pfm(const std::filesystem::path& path);

/// Writes `<stem>_mu.pfm` and `<stem>_sigma.pfm` next to each other.
void write_depth_map(const std::filesystem::path& stem, const GaussianDepthMap& map);
GaussianDepthMap read_depth_map(const std::filesystem::path& stem);

/// Binary 8-bit PGM ("P5"), maxval 255.
void write_pgm(const std::filesystem::path& path, const Mask& mask);
Mask read_pgm(const std::filesystem::path& path);

/// Header of three little-endian uint32 (width, height, N_s), then all scores
/// as float32 and all view counts as uint16, both row-major, candidate-minor.
void write_cost_volume(const std::filesystem::path& path, const CostVolume& volume);
CostVolume read_cost_volume(const std::filesystem::path& path);

/// 8-bit RGB PNG of `image` through a perceptual colormap over [lo, hi].
void write_colormap_png(const std::filesystem::path& path, const DepthImage& image, double lo,
                        double hi);

/// Writes `contents` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace depthfuse
