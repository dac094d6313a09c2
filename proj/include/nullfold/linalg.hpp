#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace nullfold {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using ScalarFieldFn = std::function<double(const Vec&)>;
using CovectorFieldFn = std::function<Vec(const Vec&)>;
using VectorFieldFn = std::function<Vec(const Vec&)>;
using MatrixFieldFn = std::function<Mat(const Vec&)>;

inline constexpr double kTwoPi = 6.283185307179586476925287;

/// Wraps an angle into [0, 2*pi).
double wrap_angle(double a);

/// Shortest signed angular difference a - b, in [-pi, pi).
double angle_diff(double a, double b);

/// Returns x with the listed coordinates wrapped into [0, 2*pi).
Vec wrap_state(Vec x, const std::vector<int>& periodic);

/// Componentwise a - b with periodic components replaced by the wrapped
/// angular difference.
Vec chart_diff(const Vec& a, const Vec& b, const std::vector<int>& periodic);

/// Euclidean chart distance with periodic components wrapped.
double chart_dist(const Vec& a, const Vec& b, const std::vector<int>& periodic);

/// Central-difference step for first derivatives: eps^(1/3) * max(1, scale).
double fd_step(double scale);

/// Step for second differences: eps^(1/4) * max(1, scale).
double fd_step2(double scale);

/// Central-difference gradient of a scalar field.
Vec fd_gradient(const ScalarFieldFn& f, const Vec& x);

/// Central-difference Jacobian of a vector field (rows index outputs).
Mat fd_jacobian(const VectorFieldFn& f, const Vec& x);

bool is_finite(const Vec& v);
bool is_finite(const Mat& m);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
};

/// Least-squares line through (x_i, y_i); max_residual is the sup deviation.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Trapezoidal rule over a (possibly nonuniform) time grid.
double trapezoid(const std::vector<double>& t, const std::vector<double>& v);

/// Deterministic uniform generator. The engine sequence is fixed by the
/// standard and the double mapping is done in-house, so identical seeds give
/// identical draws on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    Vec uniform_vec(const Vec& lo, const Vec& hi);

private:
    std::mt19937_64 engine_;
};

}  // namespace nullfold
