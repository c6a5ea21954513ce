#include "treeot/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "treeot/error.hpp"
#include "treeot/transport.hpp"

namespace treeot {

WeightedGraph grid_graph(std::size_t p, double weight) {
  if (p < 2) throw Error(ErrorCode::kBadDimensions, "grid side must be at least 2");
  if (weight <= 0.0) weight = 1.0 / static_cast<double>(p * p);
  std::vector<Edge> edges;
  edges.reserve(2 * p * (p - 1));
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < p; ++c) {
      const auto v = static_cast<Vertex>(r * p + c);
      if (c + 1 < p) edges.push_back({v, v + 1, weight});
      if (r + 1 < p) edges.push_back({v, static_cast<Vertex>(v + p), weight});
    }
  }
  return WeightedGraph::build(p * p, std::move(edges));
}

std::vector<double> image_measure(std::span<const double> pixels, std::size_t p,
                                  double noise_sigma, Rng& rng) {
  if (pixels.size() != p * p) {
    throw Error(ErrorCode::kBadDimensions, "expected " + std::to_string(p * p) +
                                               " pixels, got " +
                                               std::to_string(pixels.size()));
  }
  std::vector<double> mass(pixels.begin(), pixels.end());
  double peak = 0.0;
  for (double v : mass) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kNegativePixel, "pixel values must be finite and nonnegative");
    }
    peak = std::max(peak, v);
  }
  if (noise_sigma > 0.0) {
    const double scale = noise_sigma * (peak > 0.0 ? peak : 1.0);
    for (double& v : mass) {
      double e = rng.uniform();
      while (e == 0.0) e = rng.uniform();
      v += scale * e;
    }
  }
  return normalize_measure(std::move(mass));
}

std::vector<double> random_image(std::size_t p, Rng& rng) {
  std::vector<double> img(p * p, 0.0);
  const std::size_t blobs = 2 + rng.below(3);
  const double side = static_cast<double>(p);
  for (std::size_t b = 0; b < blobs; ++b) {
    const double cr = side * (0.2 + 0.6 * rng.uniform());
    const double cc = side * (0.2 + 0.6 * rng.uniform());
    const double radius = side * (0.08 + 0.12 * rng.uniform());
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c) {
        const double dr = static_cast<double>(r) + 0.5 - cr;
        const double dc = static_cast<double>(c) + 0.5 - cc;
        img[r * p + c] += std::exp(-(dr * dr + dc * dc) / (2.0 * radius * radius));
      }
    }
  }
  const double peak = *std::max_element(img.begin(), img.end());
  for (double& v : img) {
    v = std::floor(255.0 * v / peak);
    if (v < 32.0) v = 0.0;
  }
  return img;
}

}  // namespace treeot
