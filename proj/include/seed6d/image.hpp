#pragma once

// Minimal dense image container, PGM I/O and the few filters the contact
// estimator needs (binary morphology, Gaussian blur, bilinear sampling).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "seed6d/errors.hpp"

namespace seed6d {

template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {
    if (width < 0 || height < 0) throw Error("image dimensions must be non-negative");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  bool same_size(int w, int h) const { return width_ == w && height_ == h; }
  template <typename U>
  bool same_size(const Image<U>& o) const {
    return width_ == o.width() && height_ == o.height();
  }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  T& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Image& o) const {
    return width_ == o.width_ && height_ == o.height_ && data_ == o.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using ImageF = Image<double>;
using Mask = Image<std::uint8_t>;

/// Bilinear sample with clamp-to-edge addressing.
inline double sample_bilinear(const ImageF& img, double x, double y) {
  const double cx = std::clamp(x, 0.0, img.width() - 1.0);
  const double cy = std::clamp(y, 0.0, img.height() - 1.0);
  const int x0 = std::min(static_cast<int>(cx), img.width() - 2 < 0 ? 0 : img.width() - 2);
  const int y0 = std::min(static_cast<int>(cy), img.height() - 2 < 0 ? 0 : img.height() - 2);
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = cx - x0, fy = cy - y0;
  return (1 - fy) * ((1 - fx) * img(x0, y0) + fx * img(x1, y0)) +
         fy * ((1 - fx) * img(x0, y1) + fx * img(x1, y1));
}

/// Separable Gaussian blur, clamp-to-edge borders.
inline ImageF gaussian_blur(const ImageF& in, double sigma) {
  if (sigma <= 0.0) return in;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= sum;
  const int w = in.width(), h = in.height();
  ImageF tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * in(std::clamp(x + i, 0, w - 1), y);
      tmp(x, y) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp(x, std::clamp(y + i, 0, h - 1));
      out(x, y) = acc;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary morphology

/// Elliptical structuring element inscribed in a width x height box.
inline Mask elliptical_kernel(int width, int height) {
  if (width <= 0 || height <= 0) throw ConfigError("kernel size must be positive");
  Mask k(width, height, 0);
  const int r = height / 2, c = width / 2;
  const double inv_r2 = r > 0 ? 1.0 / (static_cast<double>(r) * r) : 0.0;
  for (int i = 0; i < height; ++i) {
    const int dy = i - r;
    int j1 = 0, j2 = 0;
    if (std::abs(dy) <= r) {
      const int dx = static_cast<int>(std::lround(c * std::sqrt((r * r - dy * dy) * inv_r2)));
      j1 = std::max(c - dx, 0);
      j2 = std::min(c + dx + 1, width);
    }
    for (int j = j1; j < j2; ++j) k(j, i) = 1;
  }
  return k;
}

namespace detail {

// Pixels outside the image count as background for erosion and dilation
// alike, so erosion shrinks masks touching the border.
inline Mask morph(const Mask& in, const Mask& kernel, bool erode) {
  const int w = in.width(), h = in.height();
  const int ax = kernel.width() / 2, ay = kernel.height() / 2;
  Mask out(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool hit = erode;
      for (int j = 0; j < kernel.height() && hit == erode; ++j) {
        for (int i = 0; i < kernel.width(); ++i) {
          if (!kernel(i, j)) continue;
          const int xx = x + i - ax, yy = y + j - ay;
          const bool v = in.contains(xx, yy) && in(xx, yy);
          if (erode && !v) {
            hit = false;
            break;
          }
          if (!erode && v) {
            hit = true;
            break;
          }
        }
      }
      out(x, y) = hit ? 1 : 0;
    }
  }
  return out;
}

}  // namespace detail

inline Mask erode(const Mask& in, const Mask& kernel) { return detail::morph(in, kernel, true); }
inline Mask dilate(const Mask& in, const Mask& kernel) { return detail::morph(in, kernel, false); }
inline Mask morphological_open(const Mask& in, const Mask& kernel) {
  return dilate(erode(in, kernel), kernel);
}

inline std::size_t count_nonzero(const Mask& m) {
  return static_cast<std::size_t>(std::count_if(m.data().begin(), m.data().end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

// ---------------------------------------------------------------------------
// PGM (binary, P5). 16-bit samples are stored little-endian.

namespace detail {

inline std::string read_pgm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      tok += c;
      break;
    }
  }
  while (in.get(c) && !std::isspace(static_cast<unsigned char>(c))) tok += c;
  return tok;
}

inline void read_pgm_header(std::istream& in, const std::string& path, int& w, int& h, int& maxval) {
  if (read_pgm_token(in) != "P5") throw IoError(path + ": not a binary PGM (P5)");
  try {
    w = std::stoi(read_pgm_token(in));
    h = std::stoi(read_pgm_token(in));
    maxval = std::stoi(read_pgm_token(in));
  } catch (const std::exception&) {
    throw IoError(path + ": malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw IoError(path + ": bad PGM header");
}

}  // namespace detail

inline void write_pgm8(const std::string& path, const Image<std::uint8_t>& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data().data()),
            static_cast<std::streamsize>(img.data().size()));
  if (!out) throw IoError("short write to '" + path + "'");
}

inline void write_pgm16le(const std::string& path, const Image<std::uint16_t>& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "P5\n" << img.width() << ' ' << img.height() << "\n65535\n";
  std::vector<char> buf(img.data().size() * 2);
  for (std::size_t i = 0; i < img.data().size(); ++i) {
    buf[2 * i] = static_cast<char>(img.data()[i] & 0xff);
    buf[2 * i + 1] = static_cast<char>(img.data()[i] >> 8);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("short write to '" + path + "'");
}

inline Image<std::uint8_t> read_pgm8(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  int w, h, maxval;
  detail::read_pgm_header(in, path, w, h, maxval);
  if (maxval > 255) throw IoError(path + ": expected an 8-bit PGM");
  Image<std::uint8_t> img(w, h);
  in.read(reinterpret_cast<char*>(img.data().data()), static_cast<std::streamsize>(img.data().size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data().size())) {
    throw IoError(path + ": truncated pixel data");
  }
  return img;
}

inline Image<std::uint16_t> read_pgm16le(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  int w, h, maxval;
  detail::read_pgm_header(in, path, w, h, maxval);
  if (maxval < 256) throw IoError(path + ": expected a 16-bit PGM");
  Image<std::uint16_t> img(w, h);
  std::vector<unsigned char> buf(img.data().size() * 2);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw IoError(path + ": truncated pixel data");
  }
  for (std::size_t i = 0; i < img.data().size(); ++i) {
    img.data()[i] = static_cast<std::uint16_t>(buf[2 * i] | (buf[2 * i + 1] << 8));
  }
  return img;
}

}  // namespace seed6d
