#ifndef OCU_HAAR_HPP
#define OCU_HAAR_HPP

#include "ocu/matn.hpp"
#include "ocu/random.hpp"

namespace ocu {

namespace rng {

/// Standard normal via Box-Muller.
inline double next_normal(Stream& s) {
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = 0.5 * (s.next_symmetric() + 1.0);
    const double u2 = 0.5 * (s.next_symmetric() + 1.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace rng

/// Haar-distributed U(n): QR of a complex Ginibre matrix with the R diagonal
/// phases folded back in.
inline MatN haar_unitary(int n, rng::Stream& s) {
    MatN g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = cplx(rng::next_normal(s), rng::next_normal(s));
    Eigen::HouseholderQR<MatN> qr(g);
    MatN q = qr.householderQ();
    const MatN r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        const cplx d = r(j, j);
        q.col(j) *= (std::abs(d) > 0.0) ? d / std::abs(d) : cplx(1.0);
    }
    return q;
}

inline Mat2 haar_u2(rng::Stream& s) { return to_mat2(haar_unitary(2, s)); }

}  // namespace ocu

#endif
