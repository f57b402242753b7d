#ifndef OCU_MATN_HPP
#define OCU_MATN_HPP

#include <Eigen/Dense>

#include "ocu/mat2.hpp"

namespace ocu {

using MatN = Eigen::MatrixXcd;
using VecN = Eigen::VectorXcd;

/// ||M* M - I||_F for dense square matrices.
inline double unitary_defect(const MatN& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("unitary_defect: matrix must be square");
    return (m.adjoint() * m - MatN::Identity(m.rows(), m.cols())).norm();
}

inline MatN to_matn(const Mat2& m) {
    MatN r(2, 2);
    r << m.a11, m.a12, m.a21, m.a22;
    return r;
}

inline Mat2 to_mat2(const MatN& m) {
    if (m.rows() != 2 || m.cols() != 2)
        throw std::invalid_argument("to_mat2: expected a 2x2 matrix");
    return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
}

}  // namespace ocu

#endif
