#pragma once

// Image stacks in and out of tensors, and seeded observation masks.
//
// An image of height H and width W becomes an H x W x C tensor (C = 3 for
// RGB, 1 for grayscale) in [0, 1]; K grayscale frames become H x W x K.

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>
#include <vector>

#include "tcomplete/error.hpp"
#include "tcomplete/random.hpp"
#include "tcomplete/tensor.hpp"
#include "tcomplete/tensor_io.hpp"

namespace tcomplete {

namespace detail {

struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;  // 1 or 3
  std::vector<std::uint8_t> pixels;  // row-major, interleaved channels
};

inline std::string lower_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

inline Raster read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw IoError(path.string() + ": " + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw IoError(path.string() + ": 16-bit images are not supported");
  }
  Raster r;
  r.width = image.width;
  r.height = image.height;
  r.channels = (image.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  image.format = r.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  r.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, r.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError(path.string() + ": " + msg);
  }
  return r;
}

inline void write_png(const std::filesystem::path& path, const Raster& r) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(r.width);
  image.height = static_cast<png_uint_32>(r.height);
  image.format = r.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, r.pixels.data(), 0, nullptr)) {
    throw IoError(path.string() + ": " + image.message);
  }
}

// Netpbm header token, skipping whitespace and '#' comments.
inline std::string pnm_token(std::istream& is) {
  std::string tok;
  int c = is.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = is.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = is.get();
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = is.get();
  }
  return tok;
}

inline Raster read_pnm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  const std::string magic = pnm_token(is);
  if (magic != "P5" && magic != "P6") {
    throw IoError(path.string() + ": only binary PGM (P5) and PPM (P6) are supported");
  }
  Raster r;
  r.channels = magic == "P6" ? 3 : 1;
  try {
    r.width = std::stoul(pnm_token(is));
    r.height = std::stoul(pnm_token(is));
    const unsigned long maxval = std::stoul(pnm_token(is));
    if (maxval != 255) throw IoError(path.string() + ": only maxval 255 (8-bit) is supported");
  } catch (const std::logic_error&) {
    throw IoError(path.string() + ": malformed header");
  }
  if (r.width == 0 || r.height == 0) throw IoError(path.string() + ": empty image");
  r.pixels.resize(r.width * r.height * r.channels);
  is.read(reinterpret_cast<char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
  if (!is) throw IoError(path.string() + ": truncated pixel data");
  return r;
}

inline void write_pnm(const std::filesystem::path& path, const Raster& r) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << (r.channels == 3 ? "P6" : "P5") << '\n' << r.width << ' ' << r.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
  if (!os) throw IoError("failed writing " + path.string());
}

inline Raster read_raster(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return read_pnm(path);
  throw IoError(path.string() + ": unsupported image type (expected .png, .ppm or .pgm)");
}

inline std::uint8_t quantize(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

}  // namespace detail

/// One image (RGB -> n3 = 3, grayscale -> n3 = 1), a .tns3 tensor file, or a
/// list of equally sized grayscale frames stacked along mode 3.
inline Tensor3 load_stack(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) throw IoError("load_stack: no input files");
  if (paths.size() == 1 && detail::lower_extension(paths[0]) == ".tns3") return read_tensor(paths[0]);

  std::vector<detail::Raster> frames;
  frames.reserve(paths.size());
  for (const auto& p : paths) frames.push_back(detail::read_raster(p));

  const auto& first = frames.front();
  if (frames.size() > 1) {
    for (std::size_t f = 0; f < frames.size(); ++f) {
      if (frames[f].channels != 1) {
        throw IoError(paths[f].string() + ": multi-frame input must be grayscale");
      }
      if (frames[f].width != first.width || frames[f].height != first.height) {
        throw IoError(paths[f].string() + ": frame size differs from " + paths[0].string());
      }
    }
  }
  const std::size_t n3 = frames.size() > 1 ? frames.size() : first.channels;
  Tensor3 t(Dims{first.height, first.width, n3});
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& r = frames[f];
    for (std::size_t row = 0; row < r.height; ++row) {
      for (std::size_t col = 0; col < r.width; ++col) {
        for (std::size_t ch = 0; ch < r.channels; ++ch) {
          const std::uint8_t px = r.pixels[(row * r.width + col) * r.channels + ch];
          t(row, col, f + ch) = static_cast<double>(px) / 255.0;
        }
      }
    }
  }
  return t;
}

inline Tensor3 load_stack(const std::filesystem::path& path) {
  return load_stack(std::vector<std::filesystem::path>{path});
}

/// Writes t clamped to [0, 1] and quantized by round(v * 255). The extension
/// picks the format (.png, .ppm/.pgm, .tns3 for the exact values). n3 = 3
/// gives one RGB image and n3 = 1 one grayscale image; any other n3 gives one
/// grayscale file per frontal slice named <stem>_0000<ext>, <stem>_0001<ext>,
/// ... Returns the paths written.
inline std::vector<std::filesystem::path> save_stack(const Tensor3& t, const std::filesystem::path& path) {
  const std::string ext = detail::lower_extension(path);
  if (ext == ".tns3") {
    write_tensor(path, t);
    return {path};
  }
  const bool png = ext == ".png";
  if (!png && ext != ".ppm" && ext != ".pgm") {
    throw IoError(path.string() + ": unsupported output type (expected .png, .ppm, .pgm or .tns3)");
  }
  const Dims d = t.dims();
  auto raster_of = [&](std::size_t first_slice, std::size_t channels) {
    detail::Raster r;
    r.width = d.n2;
    r.height = d.n1;
    r.channels = channels;
    r.pixels.resize(d.n1 * d.n2 * channels);
    for (std::size_t row = 0; row < d.n1; ++row) {
      for (std::size_t col = 0; col < d.n2; ++col) {
        for (std::size_t ch = 0; ch < channels; ++ch) {
          r.pixels[(row * d.n2 + col) * channels + ch] = detail::quantize(t(row, col, first_slice + ch));
        }
      }
    }
    return r;
  };
  auto write = [&](const std::filesystem::path& p, const detail::Raster& r) {
    if (png) {
      detail::write_png(p, r);
    } else {
      detail::write_pnm(p, r);
    }
  };

  if (d.n3 == 3 && ext != ".pgm") {
    write(path, raster_of(0, 3));
    return {path};
  }
  if (d.n3 == 1) {
    auto p = path;
    if (ext == ".ppm") p.replace_extension(".pgm");
    write(p, raster_of(0, 1));
    return {p};
  }
  std::vector<std::filesystem::path> written;
  const std::string frame_ext = png ? ".png" : ".pgm";
  for (std::size_t k = 0; k < d.n3; ++k) {
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "_%04zu", k);
    auto p = path.parent_path() / (path.stem().string() + suffix + frame_ext);
    write(p, raster_of(k, 1));
    written.push_back(std::move(p));
  }
  return written;
}

/// Exactly round(sr * N) observed entries, drawn uniformly without
/// replacement: a partial Fisher-Yates shuffle of 0..N-1 driven by
/// Rng(seed) (mt19937_64 with rejection-sampled bounded draws), so the mask
/// depends only on (dims, sr, seed) on every platform.
inline ObservationMask generate_mask(const Dims& dims, double sr, std::uint64_t seed) {
  if (!(sr > 0.0 && sr <= 1.0)) {
    throw ParameterError("sampling ratio must lie in (0, 1], got " + std::to_string(sr));
  }
  ObservationMask mask(dims);
  const std::size_t total = dims.size();
  const auto count = static_cast<std::size_t>(std::llround(sr * static_cast<double>(total)));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
    std::swap(order[i], order[j]);
    mask.set(order[i], true);
  }
  return mask;
}

}  // namespace tcomplete
