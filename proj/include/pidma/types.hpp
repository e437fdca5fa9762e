// Dense container aliases shared across the library. Eigen arrays are used
// for everything numeric so elementwise expressions stay allocation-free.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace pidma {

template <class Scalar>
using Vec = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using Mat = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using BitVec = Vec<std::uint8_t>;          // GF(2) values, one bit per entry
using LlrVec = Vec<double>;                // log p(0)/p(1) per position
// Message matrices of the factor graph; row-major so per-stage row segments
// are contiguous and vectorize.
using LlrMat = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealVec = Vec<double>;
using CxVec = Vec<std::complex<double>>;   // complex baseband symbols

}  // namespace pidma
