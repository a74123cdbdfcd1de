#include "tesp/image_io.hpp"

#include "tesp/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <vector>

namespace tesp::image {

namespace {
struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<FILE, FileCloser>;

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(),
                                                 [](char a, char b) { return std::tolower(a) == b; });
}
}  // namespace

TubalMatrix read_png(const std::string& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw std::runtime_error("cannot read png '" + path + "': " + img.message);
  img.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw std::runtime_error("cannot decode png '" + path + "': " + img.message);
  }
  const Index h = img.height, w = img.width;
  TubalMatrix t(h, w, 3);
  for (Index i = 0; i < h; ++i)
    for (Index j = 0; j < w; ++j)
      for (Index c = 0; c < 3; ++c) t(i, j, c) = buf[(i * w + j) * 3 + c] / 255.0;
  return t;
}

void write_png(const std::string& path, const TubalMatrix& img) {
  if (img.tubes() != 3) throw shape_error("write_png: expected three channels");
  png_image out{};
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(img.cols());
  out.height = static_cast<png_uint_32>(img.rows());
  out.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(out));
  for (Index i = 0; i < img.rows(); ++i)
    for (Index j = 0; j < img.cols(); ++j)
      for (Index c = 0; c < 3; ++c) {
        double v = std::clamp(img(i, j, c), 0.0, 1.0);
        buf[(i * img.cols() + j) * 3 + c] = static_cast<png_byte>(std::lround(v * 255.0));
      }
  if (!png_image_write_to_file(&out, path.c_str(), 0, buf.data(), 0, nullptr))
    throw std::runtime_error("cannot write png '" + path + "': " + out.message);
}

TubalMatrix read_raw_planar(const std::string& path, Index height, Index width) {
  if (height < 1 || width < 1) throw parameter_error("raw images need an explicit size");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<float> buf(static_cast<std::size_t>(height * width * 3));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(float)))
    throw shape_error("raw image '" + path + "' is shorter than height*width*3 floats");
  TubalMatrix t(height, width, 3);
  for (Index c = 0; c < 3; ++c)
    for (Index i = 0; i < height; ++i)
      for (Index j = 0; j < width; ++j) t(i, j, c) = buf[(c * height + i) * width + j];
  if (!t.all_finite()) throw domain_error("raw image contains non-finite values");
  return t;
}

void write_raw_planar(const std::string& path, const TubalMatrix& img) {
  std::vector<float> buf(static_cast<std::size_t>(img.size()));
  for (Index c = 0; c < img.tubes(); ++c)
    for (Index i = 0; i < img.rows(); ++i)
      for (Index j = 0; j < img.cols(); ++j)
        buf[(c * img.rows() + i) * img.cols() + j] = static_cast<float>(img(i, j, c));
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
}

TubalMatrix synthetic(Index height, Index width) {
  TubalMatrix t(height, width, 3);
  const double pi = std::numbers::pi;
  for (Index i = 0; i < height; ++i)
    for (Index j = 0; j < width; ++j) {
      double y = static_cast<double>(i) / height, x = static_cast<double>(j) / width;
      bool square = y > 0.25 && y < 0.6 && x > 0.2 && x < 0.55;
      double disc = (x - 0.7) * (x - 0.7) + (y - 0.65) * (y - 0.65) < 0.04 ? 1.0 : 0.0;
      t(i, j, 0) = 0.5 + 0.4 * std::sin(2 * pi * x) * std::cos(pi * y) + (square ? 0.1 : 0.0);
      t(i, j, 1) = 0.3 + 0.5 * disc + 0.2 * y;
      t(i, j, 2) = 0.2 + 0.6 * x * (1 - y) + (square ? 0.15 : 0.0);
    }
  return t;
}

TubalMatrix load(const std::string& path, Index height, Index width) {
  if (ends_with(path, ".png")) return read_png(path);
  return read_raw_planar(path, height, width);
}

}  // namespace tesp::image
