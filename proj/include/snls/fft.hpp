#pragma once

#include <vector>

#include "snls/grid.hpp"

namespace snls {

// In-place multidimensional FFTs on the grid layout of GridSpec.
// Forward is unnormalized; inverse divides by n^d so inverse(forward(x)) == x.
// Plans are cached per (d, n) and shared across threads; execution uses the
// new-array interface, which is safe to call concurrently.
namespace fft {

void forward(const GridSpec& g, std::vector<Complex>& data);
void inverse(const GridSpec& g, std::vector<Complex>& data);

}  // namespace fft
}  // namespace snls
