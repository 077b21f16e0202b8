#pragma once

#include <cmath>
#include <complex>

#include "qwalk/types.hpp"

namespace test {

inline qwalk::cplx circle_point(int k, int count) {
  return std::polar(1.0, 2.0 * M_PI * static_cast<double>(k) / count);
}

inline double unitary_defect(const qwalk::Matrix& m) {
  return (m.adjoint() * m - qwalk::Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

}  // namespace test
