#include "lidal/linalg.hpp"

#ifdef LIDAL_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace lidal {

bool spd_solve(const Eigen::MatrixXd& A, double mu, const Eigen::VectorXd& b,
               Eigen::VectorXd& x) {
    const auto n = A.rows();
    Eigen::MatrixXd shifted = A;
    shifted.diagonal().array() += mu;

#ifdef LIDAL_HAVE_LAPACKE
    const lapack_int info =
        LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(n), shifted.data(),
                       static_cast<lapack_int>(n));
    if (info != 0) return false;
    x = b;
    const lapack_int solve_info =
        LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(n), 1, shifted.data(),
                       static_cast<lapack_int>(n), x.data(), static_cast<lapack_int>(n));
    return solve_info == 0;
#else
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) return false;
    x = llt.solve(b);
    return true;
#endif
}

}  // namespace lidal
