#pragma once

#include <vector>

#include "affina/image.hpp"
#include "affina/kernels.hpp"

namespace affina {

// Dense 2-D convolution, edge-replicating borders, same-size output.
// True convolution (the kernel is flipped), so an impulse reproduces the
// kernel weights. Parallelized over rows.
GrayImage convolve(const GrayImage& img, const Kernel2D& k);

// Separable pass: horizontal kernel kx then vertical ky, both flipped,
// edge replication. Equivalent to dense convolution with the outer
// product kx(x) * ky(y).
GrayImage convolve_separable(const GrayImage& img, const std::vector<double>& kx,
                             const std::vector<double>& ky);

// out += convolve_separable(img, kx, ky); avoids a temporary when composing
// multi-term kernels like the LoG.
void convolve_separable_add(const GrayImage& img, const std::vector<double>& kx,
                            const std::vector<double>& ky, GrayImage& out);

namespace ref {

// Serial O(n^2 k^2) reference convolution. Kept deliberately independent of
// the parallel/separable paths; tests and the benchmark compare against it.
GrayImage convolve_dense_serial(const GrayImage& img, const Kernel2D& k);

}  // namespace ref

}  // namespace affina
