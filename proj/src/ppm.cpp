#include "srpr/ppm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace srpr {

ImageRgb read_ppm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_ppm: cannot open " + path);
  std::string magic;
  is >> magic;
  if (magic != "P6") throw std::runtime_error("read_ppm: expected P6 format in " + path);
  auto skip_ws_comments = [&] {
    while (is) {
      int c = is.peek();
      if (c == '#') {
        std::string line;
        std::getline(is, line);
      } else if (std::isspace(c)) {
        is.get();
      } else {
        break;
      }
    }
  };
  skip_ws_comments();
  std::int64_t w, h;
  int maxval;
  is >> w;
  skip_ws_comments();
  is >> h;
  skip_ws_comments();
  is >> maxval;
  if (!is || maxval != 255) throw std::runtime_error("read_ppm: only 8-bit PPMs supported");
  is.get();  // single whitespace after header
  ImageRgb img;
  img.width = w;
  img.height = h;
  std::vector<unsigned char> raw(static_cast<std::size_t>(w * h * 3));
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!is) throw std::runtime_error("read_ppm: truncated pixel data in " + path);
  img.pixels.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) img.pixels[i] = raw[i] / 255.0;
  return img;
}

void write_ppm(const ImageRgb& img, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_ppm: cannot open " + path);
  os << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    double v = std::clamp(img.pixels[i], 0.0, 1.0);
    raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!os) throw std::runtime_error("write_ppm: write failed for " + path);
}

ImageRgb synthetic_image(std::int64_t width, std::int64_t height) {
  ImageRgb img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width * height * 3), 0.0);
  auto at = [&](std::int64_t y, std::int64_t x, int c) -> double& {
    return img.pixels[static_cast<std::size_t>((y * width + x) * 3 + c)];
  };
  const double cx = 0.5 * (width - 1), cy = 0.5 * (height - 1);
  const double r2 = 0.12 * width * height;
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      double u = width > 1 ? static_cast<double>(x) / (width - 1) : 0.0;
      double v = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
      // diagonal gradients per channel
      at(y, x, 0) = u;
      at(y, x, 1) = v;
      at(y, x, 2) = 0.5 * (u + v);
      // bright disc
      double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy < r2) {
        at(y, x, 0) = 0.9;
        at(y, x, 1) = 0.2;
      }
      // dark stripe
      if ((x + y) % 16 < 3) {
        at(y, x, 0) *= 0.25;
        at(y, x, 1) *= 0.25;
        at(y, x, 2) *= 0.25;
      }
    }
  }
  // quantize to the 8-bit grid so a file round trip is exact
  for (auto& p : img.pixels) p = std::lround(p * 255.0) / 255.0;
  return img;
}

}  // namespace srpr
