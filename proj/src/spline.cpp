#include "fharm/spline.hpp"

#include <cmath>
#include <cstddef>

#include "fharm/errors.hpp"

namespace fharm {

std::vector<double> solve_tridiagonal(std::vector<double> sub, std::vector<double> diag,
                                      std::vector<double> sup, std::vector<double> rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return {};
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
    return x;
}

std::vector<double> solve_cyclic_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                                             const std::vector<double>& sup, const std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    if (n < 3) throw InputError("cyclic tridiagonal system needs at least 3 unknowns");
    // corner entries: sub[0] couples x[0] to x[n-1], sup[n-1] couples x[n-1] to x[0]
    const double alpha = sub[0];
    const double beta = sup[n - 1];
    const double gamma = -diag[0];

    std::vector<double> d(diag), u(n, 0.0);
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;
    u[0] = gamma;
    u[n - 1] = alpha;

    std::vector<double> s(sub), p(sup);
    s[0] = 0.0;
    p[n - 1] = 0.0;

    std::vector<double> x = solve_tridiagonal(s, d, p, rhs);
    std::vector<double> z = solve_tridiagonal(s, d, p, u);

    const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    for (std::size_t i = 0; i < n; ++i) x[i] -= fact * z[i];
    return x;
}

CubicSpline::CubicSpline(double x0, double dx, std::vector<double> y, Boundary bc)
    : x0_(x0), dx_(dx), y_(std::move(y)), bc_(bc) {
    const std::size_t n = y_.size();
    if (n < 3) throw InputError("cubic spline needs at least 3 samples");
    if (!(dx_ > 0.0)) throw InputError("cubic spline needs positive spacing");

    if (bc_ == Boundary::Periodic) {
        // knots 0..n-1, wrap at n; unknown second derivatives m_0..m_{n-1}
        std::vector<double> sub(n, dx_ / 6.0), diag(n, 2.0 * dx_ / 3.0), sup(n, dx_ / 6.0), rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double yl = y_[(i + n - 1) % n];
            const double yc = y_[i];
            const double yr = y_[(i + 1) % n];
            rhs[i] = (yr - 2.0 * yc + yl) / dx_;
        }
        m_ = solve_cyclic_tridiagonal(sub, diag, sup, rhs);
    } else {
        std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            sub[i] = dx_ / 6.0;
            diag[i] = 2.0 * dx_ / 3.0;
            sup[i] = dx_ / 6.0;
            rhs[i] = (y_[i + 1] - 2.0 * y_[i] + y_[i - 1]) / dx_;
        }
        if (bc_ == Boundary::Natural) {
            diag[0] = 1.0;
            diag[n - 1] = 1.0;
        } else { // ClampedZeroSlope: first derivative zero at both ends
            diag[0] = dx_ / 3.0;
            sup[0] = dx_ / 6.0;
            rhs[0] = (y_[1] - y_[0]) / dx_;
            sub[n - 1] = dx_ / 6.0;
            diag[n - 1] = dx_ / 3.0;
            rhs[n - 1] = -(y_[n - 1] - y_[n - 2]) / dx_;
        }
        m_ = solve_tridiagonal(sub, diag, sup, rhs);
    }
}

void CubicSpline::locate(double x, std::size_t& i, double& t) const {
    const std::size_t n = y_.size();
    double u = (x - x0_) / dx_;
    if (bc_ == Boundary::Periodic) {
        u = std::fmod(u, double(n));
        if (u < 0.0) u += double(n);
        i = std::size_t(u);
        if (i >= n) i = n - 1;
        t = u - double(i);
    } else {
        if (u <= 0.0) {
            i = 0;
            t = u;
        } else if (u >= double(n - 1)) {
            i = n - 2;
            t = u - double(i);
        } else {
            i = std::size_t(u);
            if (i > n - 2) i = n - 2;
            t = u - double(i);
        }
    }
}

void CubicSpline::eval_all(double x, double& v, double& d1, double& d2, double& d3) const {
    const std::size_t n = y_.size();
    std::size_t i;
    double t;
    locate(x, i, t);
    const std::size_t j = (bc_ == Boundary::Periodic) ? (i + 1) % n : i + 1;
    const double h = dx_;
    const double a = 1.0 - t, b = t;
    const double yl = y_[i], yr = y_[j];
    const double ml = m_[i], mr = m_[j];
    v = a * yl + b * yr + ((a * a * a - a) * ml + (b * b * b - b) * mr) * h * h / 6.0;
    d1 = (yr - yl) / h + ((3.0 * b * b - 1.0) * mr - (3.0 * a * a - 1.0) * ml) * h / 6.0;
    d2 = a * ml + b * mr;
    d3 = (mr - ml) / h;
}

double CubicSpline::value(double x) const {
    double v, d1, d2, d3;
    eval_all(x, v, d1, d2, d3);
    return v;
}

double CubicSpline::deriv1(double x) const {
    double v, d1, d2, d3;
    eval_all(x, v, d1, d2, d3);
    return d1;
}

double CubicSpline::deriv2(double x) const {
    double v, d1, d2, d3;
    eval_all(x, v, d1, d2, d3);
    return d2;
}

double CubicSpline::deriv3(double x) const {
    double v, d1, d2, d3;
    eval_all(x, v, d1, d2, d3);
    return d3;
}

double CubicSpline::min_sample() const {
    double m = y_.empty() ? 0.0 : y_[0];
    for (double v : y_)
        if (v < m) m = v;
    return m;
}

double CubicSpline::max_sample() const {
    double m = y_.empty() ? 0.0 : y_[0];
    for (double v : y_)
        if (v > m) m = v;
    return m;
}

} // namespace fharm
