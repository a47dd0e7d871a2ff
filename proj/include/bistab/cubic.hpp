#pragma once

#include <array>

namespace bistab {

/// Real roots of a cubic, ascending. count is 1, 2 or 3.
struct CubicRoots {
    std::array<double, 3> roots{};
    int count = 0;
};

/// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 via companion-matrix eigenvalues.
/// Eigenvalues with relative imaginary part above 1e-9 are discarded as complex.
/// Throws NumericalError when c3 is zero or the normalized coefficients are not
/// finite (degenerate cubic).
CubicRoots solve_cubic_real(double c3, double c2, double c1, double c0);

}  // namespace bistab
