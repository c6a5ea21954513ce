#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "treeot/graph.hpp"
#include "treeot/rng.hpp"

namespace treeot {

// p x p four-neighbour lattice; vertex (row, col) has id row * p + col.
// weight <= 0 selects the default 1 / p^2. Throws Error{kBadDimensions} for
// p < 2.
WeightedGraph grid_graph(std::size_t p, double weight = 0.0);

// Normalized pixel intensities. With noise_sigma > 0 each pixel first gets
// independent uniform noise on (0, noise_sigma * max pixel) (or
// (0, noise_sigma) for an all-zero image). Throws Error{kBadDimensions,
// kNegativePixel}.
std::vector<double> image_measure(std::span<const double> pixels, std::size_t p,
                                  double noise_sigma, Rng& rng);

// A synthetic p x p grey-level image: a few random Gaussian blobs on a black
// background, quantized to 0..255 like a scanned digit.
std::vector<double> random_image(std::size_t p, Rng& rng);

}  // namespace treeot
