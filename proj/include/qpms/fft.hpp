#pragma once

#include <span>
#include <vector>

#include "qpms/grid.hpp"

namespace qpms::fft {

/// In-place multidimensional DFT over a row-major array with the given
/// extents. Forward uses exp(-i 2 pi f t); inverse is scaled by 1/N.
void forward(std::span<cplx> data, std::span<const int> dims);
void inverse(std::span<cplx> data, std::span<const int> dims);

inline void forward(std::span<cplx> data) {
  const int n = static_cast<int>(data.size());
  forward(data, std::span<const int>(&n, 1));
}
inline void inverse(std::span<cplx> data) {
  const int n = static_cast<int>(data.size());
  inverse(data, std::span<const int>(&n, 1));
}

}  // namespace qpms::fft
