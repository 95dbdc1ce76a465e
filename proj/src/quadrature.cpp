#include "fiberchan/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace fiberchan {

FrequencyGrid FrequencyGrid::gauss_hermite(const SpectralProfile& s, int n) {
    s.validate();
    if (n < 1) throw InvalidChannel("gauss_hermite: need at least one node");
    // Golub-Welsch: Jacobi matrix of the Hermite recurrence.
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double b = std::sqrt(i / 2.0);
        j(i, i - 1) = b;
        j(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    FrequencyGrid g;
    g.omega.resize(n);
    g.weight.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = es.eigenvalues()[i];
        const double v0 = es.eigenvectors()(0, i);
        g.omega[i] = s.omega0 + 0.5 * s.sigma * x;
        g.weight[i] = v0 * v0;  // sqrt(pi) v0^2 / sqrt(pi)
    }
    return g;
}

namespace {

cd recurse(const std::function<cd(double)>& f, double a, double b, cd fa, cd fm, cd fb, cd whole,
           double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double h = b - a;
    const cd flm = f(0.5 * (a + m));
    const cd frm = f(0.5 * (m + b));
    const cd left = (h / 12.0) * (fa + 4.0 * flm + fm);
    const cd right = (h / 12.0) * (fm + 4.0 * frm + fb);
    const cd delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace

cd adaptive_simpson(const std::function<cd(double)>& f, double a, double b, double tol,
                    int max_depth) {
    const double m = 0.5 * (a + b);
    const cd fa = f(a), fm = f(m), fb = f(b);
    const cd whole = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);
    return recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace fiberchan
