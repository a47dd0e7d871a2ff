#include "bistab/cubic.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "bistab/errors.hpp"

namespace bistab {

CubicRoots solve_cubic_real(double c3, double c2, double c1, double c0) {
    if (c3 == 0.0 || !std::isfinite(c3)) {
        throw NumericalError("degenerate cubic: leading coefficient is zero or not finite");
    }
    const double b2 = c2 / c3;
    const double b1 = c1 / c3;
    const double b0 = c0 / c3;
    if (!std::isfinite(b2) || !std::isfinite(b1) || !std::isfinite(b0)) {
        throw NumericalError("degenerate cubic: normalized coefficients overflow");
    }

    Eigen::Matrix3d companion;
    companion << 0.0, 0.0, -b0,
                 1.0, 0.0, -b1,
                 0.0, 1.0, -b2;
    Eigen::EigenSolver<Eigen::Matrix3d> solver(companion, false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("cubic eigenvalue solver failed to converge");
    }

    CubicRoots out;
    for (int i = 0; i < 3; ++i) {
        const std::complex<double> z = solver.eigenvalues()(i);
        if (std::abs(z.imag()) <= 1e-9 * std::max(1.0, std::abs(z.real()))) {
            out.roots[out.count++] = z.real();
        }
    }
    std::sort(out.roots.begin(), out.roots.begin() + out.count);
    return out;
}

}  // namespace bistab
