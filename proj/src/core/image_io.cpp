#include "image_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

#include <png.h>

#include "errors.hpp"

namespace depthfuse {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary writers assume a little-endian host");

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) throw IoError("unexpected end of file");
  return value;
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  while (c != EOF && !std::isspace(c)) {
    token.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (token.empty()) throw IoError("truncated header");
  return token;
}

int header_int(std::istream& in) {
  const std::string t = header_token(in);
  try {
    return std::stoi(t);
  } catch (const std::exception&) {
    throw IoError("bad header field: " + t);
  }
}

// Matplotlib "viridis" anchors, linearly interpolated.
std::array<unsigned char, 3> viridis(double t) {
  static constexpr std::array<std::array<double, 3>, 9> anchors{{{0.267, 0.005, 0.329},
                                                                 {0.279, 0.175, 0.483},
                                                                 {0.230, 0.322, 0.546},
                                                                 {0.173, 0.449, 0.558},
                                                                 {0.128, 0.567, 0.551},
                                                                 {0.153, 0.680, 0.510},
                                                                 {0.360, 0.785, 0.388},
                                                                 {0.668, 0.862, 0.196},
                                                                 {0.993, 0.906, 0.144}}};
  if (!std::isfinite(t)) return {0, 0, 0};
  t = std::clamp(t, 0.0, 1.0) * (anchors.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(t), anchors.size() - 2);
  const double a = t - static_cast<double>(i);
  std::array<unsigned char, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    const double v = (1.0 - a) * anchors[i][c] + a * anchors[i + 1][c];
    rgb[c] = static_cast<unsigned char>(std::lround(255.0 * v));
  }
  return rgb;
}

}  // namespace

void write_pfm(const fs::path& path, const DepthImage& image) {
  std::ofstream out = open_out(path);
  out << "Pf\n" << image.width() << ' ' << image.height() << "\n-1.0\n";
  for (int y = image.height() - 1; y >= 0; --y) {
    for (int x = 0; x < image.width(); ++x) put(out, static_cast<float>(image(x, y)));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

DepthImage read_pfm(const fs::path& path) {
  std::ifstream in = open_in(path);
  if (header_token(in) != "Pf") throw IoError("not a single-channel PFM: " + path.string());
  const int w = header_int(in);
  const int h = header_int(in);
  const double scale = std::stod(header_token(in));
  if (w < 0 || h < 0) throw IoError("bad PFM dimensions");
  if (scale >= 0.0) throw IoError("big-endian PFM is not supported: " + path.string());
  DepthImage image(w, h);
  for (int y = h - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x) image(x, y) = get<float>(in);
  }
  return image;
}

void write_depth_map(const fs::path& stem, const GaussianDepthMap& map) {
  write_pfm(stem.string() + "_mu.pfm", map.mu);
  write_pfm(stem.string() + "_sigma.pfm", map.sigma);
}

GaussianDepthMap read_depth_map(const fs::path& stem) {
  return {read_pfm(stem.string() + "_mu.pfm"), read_pfm(stem.string() + "_sigma.pfm")};
}

void write_pgm(const fs::path& path, const Mask& mask) {
  std::ofstream out = open_out(path);
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  const auto v = mask.values();
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Mask read_pgm(const fs::path& path) {
  std::ifstream in = open_in(path);
  if (header_token(in) != "P5") throw IoError("not a binary PGM: " + path.string());
  const int w = header_int(in);
  const int h = header_int(in);
  if (header_int(in) != 255) throw IoError("only 8-bit PGM is supported");
  Mask mask(w, h);
  auto v = mask.values();
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size()));
  if (!in) throw IoError("truncated PGM: " + path.string());
  return mask;
}

void write_cost_volume(const fs::path& path, const CostVolume& volume) {
  std::ofstream out = open_out(path);
  put(out, static_cast<std::uint32_t>(volume.width()));
  put(out, static_cast<std::uint32_t>(volume.height()));
  put(out, static_cast<std::uint32_t>(volume.n_samples()));
  for (double s : volume.scores.values()) put(out, static_cast<float>(s));
  for (std::uint16_t c : volume.view_counts.values()) put(out, c);
  if (!out) throw IoError("write failed: " + path.string());
}

CostVolume read_cost_volume(const fs::path& path) {
  std::ifstream in = open_in(path);
  const auto w = static_cast<int>(get<std::uint32_t>(in));
  const auto h = static_cast<int>(get<std::uint32_t>(in));
  const auto n = static_cast<int>(get<std::uint32_t>(in));
  CostVolume volume{VectorGrid(w, h, n), BasicVectorGrid<std::uint16_t>(w, h, n)};
  for (double& s : volume.scores.values()) s = get<float>(in);
  for (std::uint16_t& c : volume.view_counts.values()) c = get<std::uint16_t>(in);
  return volume;
}

void write_colormap_png(const fs::path& path, const DepthImage& image, double lo, double hi) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (fp == nullptr) throw IoError("cannot open for writing: " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("PNG encoding failed: " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
               static_cast<png_uint_32>(image.height()), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<png_byte> row(static_cast<std::size_t>(image.width()) * 3);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const auto rgb = viridis((image(x, y) - lo) / span);
      std::memcpy(&row[static_cast<std::size_t>(x) * 3], rgb.data(), 3);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

void write_text_file(const fs::path& path, const std::string& contents) {
  std::ofstream out = open_out(path);
  out << contents;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace depthfuse
