#include "finer/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "finer/errors.hpp"

namespace finer {

ImageTarget::ImageTarget(std::size_t w, std::size_t h, std::size_t c, double fill)
    : width(w), height(h), channels(c), pixels(w * h * c, fill) {
  validate();
}

ImageTarget::ImageTarget(std::size_t w, std::size_t h, std::size_t c, std::vector<double> data)
    : width(w), height(h), channels(c), pixels(std::move(data)) {
  validate();
}

void ImageTarget::validate() const {
  FINER_REQUIRE(width > 0 && height > 0, "image: empty image");
  FINER_REQUIRE(channels == 1 || channels == 3, "image: channels must be 1 or 3");
  FINER_REQUIRE(pixels.size() == width * height * channels, "image: pixel buffer length mismatch");
  for (double v : pixels) FINER_REQUIRE(v >= 0.0 && v <= 1.0, "image: value outside [0, 1]");
}

Matrix ImageTarget::coordinates() const {
  Matrix coords(pixel_count(), 2);
  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t r = y * width + x;
      coords(r, 0) = (2.0 * static_cast<double>(x) + 1.0) / w - 1.0;
      coords(r, 1) = (2.0 * static_cast<double>(y) + 1.0) / h - 1.0;
    }
  }
  return coords;
}

Matrix ImageTarget::as_matrix() const { return Matrix(pixel_count(), channels, pixels); }

ImageTarget ImageTarget::from_matrix(const Matrix& m, std::size_t width, std::size_t height) {
  FINER_REQUIRE(m.rows() == width * height, "image: matrix row count does not match width*height");
  std::vector<double> data(m.span().begin(), m.span().end());
  for (double& v : data) v = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
  return ImageTarget(width, height, m.cols(), std::move(data));
}

ImageTarget ImageTarget::grayscale() const {
  if (channels == 1) return *this;
  ImageTarget g(width, height, 1);
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    const double* p = &pixels[i * 3];
    g.pixels[i] = std::clamp(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2], 0.0, 1.0);
  }
  return g;
}

ImageTarget ImageTarget::crop(std::size_t x0, std::size_t y0, std::size_t w, std::size_t h) const {
  FINER_REQUIRE(x0 + w <= width && y0 + h <= height, "image: crop outside the image");
  ImageTarget out(w, h, channels);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < channels; ++c) out.at(x, y, c) = at(x0 + x, y0 + y, c);
  return out;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_png_signature(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  unsigned char sig[8] = {};
  f.read(reinterpret_cast<char*>(sig), 8);
  return f.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

void png_error_fn(png_structp png, png_const_charp msg) {
  (void)png;
  throw IoError(std::string("libpng: ") + msg);
}

void png_warning_fn(png_structp, png_const_charp) {}

ImageTarget load_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  if (!png) throw IoError("libpng: cannot allocate read struct");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const std::size_t w = png_get_image_width(png, info);
  const std::size_t h = png_get_image_height(png, info);
  const std::size_t c = png_get_channels(png, info);
  if (c != 1 && c != 3) throw IoError(path + ": unsupported PNG channel count " + std::to_string(c));

  std::vector<unsigned char> raw(w * h * c);
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = raw.data() + y * w * c;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  std::vector<double> data(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) data[i] = raw[i] / 255.0;
  return ImageTarget(w, h, c, std::move(data));
}

std::size_t read_pnm_int(std::istream& in) {
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (!std::isspace(ch)) {
      break;
    }
    ch = in.get();
  }
  if (ch == EOF || !std::isdigit(ch)) throw IoError("PNM: malformed header");
  std::size_t value = 0;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + static_cast<std::size_t>(ch - '0');
    ch = in.get();
  }
  return value;  // the single whitespace after the number has been consumed
}

ImageTarget load_pnm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  char magic[2] = {};
  f.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
    throw IoError(path + ": not a PNG, P5 or P6 file");
  const std::size_t c = magic[1] == '6' ? 3 : 1;
  const std::size_t w = read_pnm_int(f);
  const std::size_t h = read_pnm_int(f);
  const std::size_t maxval = read_pnm_int(f);
  if (w == 0 || h == 0 || maxval == 0 || maxval > 255) throw IoError(path + ": unsupported PNM header");
  std::vector<unsigned char> raw(w * h * c);
  f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(f.gcount()) != raw.size()) throw IoError(path + ": truncated pixel data");
  std::vector<double> data(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) data[i] = std::min(1.0, raw[i] / static_cast<double>(maxval));
  return ImageTarget(w, h, c, std::move(data));
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void write_png_bytes(const std::string& path, std::size_t w, std::size_t h, std::size_t c,
                     const std::vector<unsigned char>& raw) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  if (!png) throw IoError("libpng: cannot allocate write struct");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               c == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < h; ++y)
    png_write_row(png, const_cast<png_bytep>(raw.data() + y * w * c));
  png_write_end(png, nullptr);
}

}  // namespace

ImageTarget load_image(const std::string& path) {
  if (has_png_signature(path)) return load_png(path);
  return load_pnm(path);
}

void save_png(const ImageTarget& img, const std::string& path) {
  std::vector<unsigned char> raw(img.pixels.size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = to_byte(img.pixels[i]);
  write_png_bytes(path, img.width, img.height, img.channels, raw);
}

void save_pnm(const ImageTarget& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << (img.channels == 3 ? "P6" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
  for (double v : img.pixels) f.put(static_cast<char>(to_byte(v)));
}

void save_heatmap_png(const Matrix& m, const std::string& path) {
  FINER_REQUIRE(!m.empty(), "heatmap: empty matrix");
  const auto [lo_it, hi_it] = std::minmax_element(m.span().begin(), m.span().end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  std::vector<unsigned char> raw(m.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    raw[i] = to_byte(range > 0.0 ? (m.data()[i] - lo) / range : 0.0);
  write_png_bytes(path, m.cols(), m.rows(), 1, raw);
}

}  // namespace finer
