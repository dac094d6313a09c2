#include "nullfold/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace nullfold {

namespace {

void require_symmetric(const Mat& g, const char* what) {
    const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff())) {
        std::ostringstream os;
        os << what << " is not symmetric (max asymmetry " << asym << ")";
        throw LabError(os.str());
    }
}

}  // namespace

Vec ambient_gradient(const AmbientSpace& space, const Constraint& constraint, const Vec& x) {
    const Mat g = space.metric_field(x);
    require_symmetric(g, "ambient metric");
    Eigen::FullPivLU<Mat> lu(g);
    if (!lu.isInvertible()) {
        throw MetricSingular("ambient metric is singular at the evaluation point");
    }
    return lu.solve(constraint.d(x));
}

double normal_causal_character(const AmbientSpace& space, const Constraint& constraint,
                               const Vec& x) {
    const Vec grad = ambient_gradient(space, constraint, x);
    return grad.dot(space.metric_field(x) * grad);
}

Mat tangent_basis(const DegenerateMetricManifold& manifold, const Vec& x) {
    if (manifold.mode == ManifoldMode::intrinsic) {
        return Mat::Identity(manifold.chart_dim, manifold.chart_dim);
    }
    const Vec dphi = manifold.constraint.d(x);
    if (dphi.norm() <= kRankTol) {
        throw RegularityViolated("constraint differential vanishes on the level set");
    }
    // Kernel of the 1 x n row dphi: right singular vectors beyond the first.
    Eigen::JacobiSVD<Mat> svd(dphi.transpose(), Eigen::ComputeFullV);
    return svd.matrixV().rightCols(manifold.ambient.dim - 1);
}

Mat induced_form(const DegenerateMetricManifold& manifold, const Vec& x, const Mat& basis) {
    if (manifold.mode == ManifoldMode::intrinsic) {
        const Mat form = manifold.form_field(x);
        require_symmetric(form, "intrinsic form");
        return (basis.transpose() * form * basis).eval();
    }
    const Vec dphi = manifold.constraint.d(x);
    const double scale = std::max(1.0, basis.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        if (std::abs(dphi.dot(basis.col(j))) > 1e-8 * scale * std::max(1.0, dphi.norm())) {
            throw TangencyViolated("basis column is not tangent to the constraint manifold");
        }
    }
    const Mat g = manifold.ambient.metric_field(x);
    require_symmetric(g, "ambient metric");
    Mat gram = basis.transpose() * g * basis;
    return 0.5 * (gram + gram.transpose());
}

TangentSplitting null_splitting(const DegenerateMetricManifold& manifold, const Vec& x,
                                double rank_tol) {
    const Mat tangent = tangent_basis(manifold, x);
    const Mat gram = induced_form(manifold, x, tangent);

    Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
    if (eig.info() != Eigen::Success) {
        throw EigenFailure("eigen decomposition of the induced form failed");
    }
    const Vec lambda = eig.eigenvalues();
    const double sigma_max = lambda.cwiseAbs().maxCoeff();
    const double threshold = rank_tol * std::max(sigma_max, 1.0);

    std::vector<int> kernel, range;
    for (int i = 0; i < lambda.size(); ++i) {
        (std::abs(lambda[i]) <= threshold ? kernel : range).push_back(i);
    }

    TangentSplitting split;
    split.point = x;
    split.corank = static_cast<int>(kernel.size());

    const int dim = manifold.state_dim();
    split.basis_n = Mat(dim, kernel.size());
    split.basis_s = Mat(dim, range.size());
    split.gram_s = Mat::Zero(range.size(), range.size());
    for (std::size_t j = 0; j < kernel.size(); ++j) {
        split.basis_n.col(j) = tangent * eig.eigenvectors().col(kernel[j]);
    }
    for (std::size_t j = 0; j < range.size(); ++j) {
        split.basis_s.col(j) = tangent * eig.eigenvectors().col(range[j]);
        split.gram_s(j, j) = lambda[range[j]];
    }
    split.proj_n = split.basis_n * split.basis_n.transpose();
    split.proj_s = split.basis_s * split.basis_s.transpose();
    split.proj_tangent = tangent * tangent.transpose();

    if (manifold.declared_corank && split.corank != *manifold.declared_corank) {
        std::ostringstream os;
        os << "corank " << split.corank << " at the evaluation point differs from the "
           << "registered corank " << *manifold.declared_corank;
        throw CorankMismatch(os.str());
    }
    return split;
}

Vec lie_bracket(const VectorFieldFn& u, const VectorFieldFn& v, const Vec& x, double h) {
    // [u, v] = Dv * u - Du * v with both Jacobians by central differences.
    const Vec ux = u(x);
    const Vec vx = v(x);
    Vec result = Vec::Zero(x.size());
    Vec xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        xp[i] = x[i] + h;
        const Vec vp = v(xp);
        const Vec up = u(xp);
        xp[i] = x[i] - h;
        const Vec vm = v(xp);
        const Vec um = u(xp);
        xp[i] = x[i];
        result += (vp - vm) / (2.0 * h) * ux[i] - (up - um) / (2.0 * h) * vx[i];
    }
    return result;
}

double involutivity_residual(const DegenerateMetricManifold& manifold,
                             const std::vector<VectorFieldFn>& null_generators,
                             const std::vector<Vec>& sample_points, double h) {
    double worst = 0.0;
    for (const Vec& x : sample_points) {
        const TangentSplitting split = null_splitting(manifold, x);

        // The generators must span N at the sample: projecting them onto N must
        // reproduce them, and together they must cover all corank directions.
        Mat gen_values(x.size(), null_generators.size());
        for (std::size_t j = 0; j < null_generators.size(); ++j) {
            gen_values.col(j) = null_generators[j](x);
        }
        const double scale = std::max(1.0, gen_values.cwiseAbs().maxCoeff());
        if ((gen_values - split.proj_n * gen_values).cwiseAbs().maxCoeff() > 1e-6 * scale) {
            throw GeneratorSpanError("generator leaves the null distribution at a sample");
        }
        Eigen::JacobiSVD<Mat> svd(split.basis_n.transpose() * gen_values);
        const int rank =
            (svd.singularValues().array() > 1e-8 * scale).count();
        if (rank < split.corank) {
            throw GeneratorSpanError("generators fail to span the null distribution");
        }

        for (std::size_t a = 0; a < null_generators.size(); ++a) {
            for (std::size_t b = a + 1; b < null_generators.size(); ++b) {
                const Vec bracket = lie_bracket(null_generators[a], null_generators[b], x, h);
                worst = std::max(worst, (split.proj_s * bracket).norm());
            }
        }
    }
    return worst;
}

}  // namespace nullfold
