#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace srpr {

// 8-bit RGB image, values stored as doubles in [0, 1].
struct ImageRgb {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<double> pixels;  // height * width * 3, row-major, channel-minor

  std::int64_t size() const { return width * height * 3; }
};

ImageRgb read_ppm(const std::string& path);
void write_ppm(const ImageRgb& img, const std::string& path);

// Deterministic structured test image (gradients plus simple shapes).
ImageRgb synthetic_image(std::int64_t width, std::int64_t height);

}  // namespace srpr
