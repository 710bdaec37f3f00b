#include <algorithm>
#include <cmath>
#include <string>

#include "dsk/error.hpp"
#include "dsk/style.hpp"

namespace dsk {

std::vector<std::byte> encode_ppm(const Image& image) {
  if (image.rgb.rows() != 3 || static_cast<std::size_t>(image.rgb.cols()) != image.grid.size()) {
    throw ShapeError("image must be 3 x HW");
  }
  const std::string header =
      "P6\n" + std::to_string(image.grid.width) + " " + std::to_string(image.grid.height) + "\n255\n";
  std::vector<std::byte> out;
  out.reserve(header.size() + 3 * image.grid.size());
  for (char c : header) out.push_back(static_cast<std::byte>(c));
  for (Eigen::Index l = 0; l < image.rgb.cols(); ++l) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      const double v = image.rgb(c, l);
      const double scaled = std::isfinite(v) ? std::floor(255.0 * v + 0.5) : 0.0;
      const int level = static_cast<int>(std::clamp(scaled, 0.0, 255.0));
      out.push_back(static_cast<std::byte>(level));
    }
  }
  return out;
}

}  // namespace dsk
