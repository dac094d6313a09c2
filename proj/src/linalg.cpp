#include "nullfold/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nullfold {

double wrap_angle(double a) {
    double w = std::fmod(a, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return w;
}

double angle_diff(double a, double b) {
    double d = std::fmod(a - b, kTwoPi);
    if (d < -0.5 * kTwoPi) d += kTwoPi;
    if (d >= 0.5 * kTwoPi) d -= kTwoPi;
    return d;
}

Vec wrap_state(Vec x, const std::vector<int>& periodic) {
    for (int i : periodic) {
        if (i >= 0 && i < x.size()) x[i] = wrap_angle(x[i]);
    }
    return x;
}

Vec chart_diff(const Vec& a, const Vec& b, const std::vector<int>& periodic) {
    Vec d = a - b;
    for (int i : periodic) {
        if (i >= 0 && i < d.size()) d[i] = angle_diff(a[i], b[i]);
    }
    return d;
}

double chart_dist(const Vec& a, const Vec& b, const std::vector<int>& periodic) {
    return chart_diff(a, b, periodic).norm();
}

double fd_step(double scale) {
    static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
    return h0 * std::max(1.0, scale);
}

double fd_step2(double scale) {
    static const double h0 = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
    return h0 * std::max(1.0, scale);
}

Vec fd_gradient(const ScalarFieldFn& f, const Vec& x) {
    const double h = fd_step(x.norm());
    Vec g(x.size());
    Vec xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h;
        const double fp = f(xp);
        xp[i] = x[i] - h;
        const double fm = f(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

Mat fd_jacobian(const VectorFieldFn& f, const Vec& x) {
    const double h = fd_step(x.norm());
    Vec xp = x;
    Mat jac;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h;
        const Vec fp = f(xp);
        xp[i] = x[i] - h;
        const Vec fm = f(xp);
        xp[i] = x[i];
        if (jac.size() == 0) jac.resize(fp.size(), x.size());
        jac.col(i) = (fp - fm) / (2.0 * h);
    }
    return jac;
}

bool is_finite(const Vec& v) { return v.allFinite(); }
bool is_finite(const Mat& m) { return m.allFinite(); }

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit fit;
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return fit;

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < n; ++i) {
        fit.max_residual = std::max(fit.max_residual,
                                    std::abs(y[i] - (fit.intercept + fit.slope * x[i])));
    }
    return fit;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
    double sum = 0.0;
    const std::size_t n = std::min(t.size(), v.size());
    for (std::size_t i = 1; i < n; ++i) {
        sum += 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1]);
    }
    return sum;
}

Vec Rng::uniform_vec(const Vec& lo, const Vec& hi) {
    Vec x(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) x[i] = uniform(lo[i], hi[i]);
    return x;
}

}  // namespace nullfold
