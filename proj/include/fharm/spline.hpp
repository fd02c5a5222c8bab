#pragma once

#include <cstddef>
#include <vector>

namespace fharm {

// Cubic spline interpolation on a uniform grid. Two boundary flavors are
// needed in this project: periodic (angular profile tables) and clamped or
// natural (radial tables). Evaluation returns value and derivatives up to
// third order; the third derivative is piecewise constant.

class CubicSpline {
  public:
    enum class Boundary { Natural, ClampedZeroSlope, Periodic };

    CubicSpline() = default;
    // y: samples at x_i = x0 + i*dx (i = 0..n-1). For Periodic, y[n-1] is the
    // last interior sample; the curve wraps with period n*dx.
    CubicSpline(double x0, double dx, std::vector<double> y, Boundary bc);

    double value(double x) const;
    double deriv1(double x) const;
    double deriv2(double x) const;
    double deriv3(double x) const;
    void eval_all(double x, double& v, double& d1, double& d2, double& d3) const;

    double min_sample() const;
    double max_sample() const;
    bool valid() const { return !y_.empty(); }

  private:
    double x0_ = 0.0;
    double dx_ = 1.0;
    std::vector<double> y_;
    std::vector<double> m_; // second derivatives at knots
    Boundary bc_ = Boundary::Natural;

    void locate(double x, std::size_t& i, double& t) const;
};

// Tridiagonal solve (Thomas algorithm); diagonals given as vectors.
std::vector<double> solve_tridiagonal(std::vector<double> sub, std::vector<double> diag,
                                      std::vector<double> sup, std::vector<double> rhs);

// Cyclic tridiagonal solve via the Sherman-Morrison correction.
std::vector<double> solve_cyclic_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                                             const std::vector<double>& sup, const std::vector<double>& rhs);

} // namespace fharm
