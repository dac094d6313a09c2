#include "nullfold/dissipation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace nullfold {

double check_compatibility(const FunctionalSpec& functional, const TangentSplitting& splitting,
                           const Vec& x) {
    const Vec dpsi = functional.d(x);
    const double denom = std::max(1.0, dpsi.norm());
    double worst = 0.0;
    for (Eigen::Index j = 0; j < splitting.basis_n.cols(); ++j) {
        Vec b = splitting.basis_n.col(j);
        const double sup = b.cwiseAbs().maxCoeff();
        // Gauge-fix the null direction by its sup norm so the residual does not
        // depend on the internal scaling of the basis column.
        if (sup > 0.0) b /= sup;
        worst = std::max(worst, std::abs(dpsi.dot(b)) / denom);
    }
    return worst;
}

DissipationEstimate dissipation_constant(const FunctionalSpec& functional,
                                         const VectorFieldSpec& field,
                                         const DegenerateMetricManifold& manifold,
                                         const std::vector<Vec>& samples, double floor) {
    DissipationEstimate est;
    est.c_hat = std::numeric_limits<double>::infinity();
    for (const Vec& x : samples) {
        const TangentSplitting split = null_splitting(manifold, x);
        const auto [v_n, v_s] = decompose(field, split, x);
        (void)v_n;
        const double norm_s = transversal_norm(split, manifold, v_s);
        if (norm_s <= floor) continue;
        ++est.admissible;
        const double ratio = -functional.d(x).dot(v_s) / (norm_s * norm_s);
        if (ratio <= 0.0) {
            std::ostringstream os;
            os << "transversal decay ratio " << ratio << " is not positive at a sample; "
               << "the pointwise estimate fails for functional " << functional.name;
            throw DissipationViolated(os.str(), x, ratio);
        }
        est.c_hat = std::min(est.c_hat, ratio);
    }
    if (est.admissible == 0) {
        est.no_transversal_motion = true;
        est.c_hat = 0.0;
    }
    return est;
}

double z_indicator(const VectorFieldSpec& field, const TangentSplitting& splitting,
                   const DegenerateMetricManifold& manifold, const Vec& x) {
    const auto [v_n, v_s] = decompose(field, splitting, x);
    (void)v_n;
    return transversal_norm(splitting, manifold, v_s);
}

double monotonicity_check(const Trajectory& trajectory, const FunctionalSpec& functional) {
    if (trajectory.size() < 2) throw LabError("monotonicity check needs at least two samples");
    double worst = -std::numeric_limits<double>::infinity();
    double prev = trajectory.psi.empty() ? functional.value(trajectory.states[0])
                                         : trajectory.psi[0];
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        const double cur = trajectory.psi.empty() ? functional.value(trajectory.states[i])
                                                  : trajectory.psi[i];
        worst = std::max(worst, cur - prev);
        prev = cur;
    }
    return worst;
}

double monotonicity_slack(const Trajectory& trajectory, const FunctionalSpec& functional,
                          const VectorFieldSpec& field) {
    if (trajectory.size() < 2) return 0.0;
    double rate = 0.0;
    for (const Vec& x : trajectory.states) {
        rate = std::max(rate, std::abs(functional.d(x).dot(field.eval(x))));
    }
    const double dt = trajectory.times[1] - trajectory.times[0];
    return 10.0 * dt * rate;
}

BudgetResult dissipation_budget(const Trajectory& trajectory, const FunctionalSpec& functional,
                                double c_hat) {
    if (c_hat <= 0.0) throw LabError("dissipation budget needs a positive decay constant");
    if (trajectory.vs_norm.size() != trajectory.size()) {
        throw LabError("dissipation budget needs ||V_S||_S recorded along the trajectory");
    }
    std::vector<double> sq(trajectory.size());
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        sq[i] = trajectory.vs_norm[i] * trajectory.vs_norm[i];
    }
    BudgetResult out;
    out.lhs = trapezoid(trajectory.times, sq);
    const double psi_start = trajectory.psi.empty() ? functional.value(trajectory.states.front())
                                                    : trajectory.psi.front();
    const double psi_end = trajectory.psi.empty() ? functional.value(trajectory.states.back())
                                                  : trajectory.psi.back();
    out.rhs = (psi_start - psi_end) / c_hat;
    return out;
}

std::vector<Vec> omega_limit_estimate(const Trajectory& trajectory, double tail_fraction,
                                      double cluster_radius) {
    if (tail_fraction <= 0.0 || tail_fraction > 1.0) {
        throw LabError("tail fraction must lie in (0, 1]");
    }
    const std::size_t n = trajectory.size();
    const std::size_t tail = static_cast<std::size_t>(std::ceil(tail_fraction * n));
    if (tail < 50) {
        throw LabError("trajectory tail too short for an omega-limit estimate (< 50 samples)");
    }
    std::vector<Vec> reps;
    for (std::size_t i = n - tail; i < n; ++i) {
        const Vec& x = trajectory.states[i];
        bool assigned = false;
        for (const Vec& rep : reps) {
            if (chart_dist(x, rep, trajectory.periodic) <= cluster_radius) {
                assigned = true;
                break;
            }
        }
        if (!assigned) {
            reps.push_back(x);
            if (reps.size() > 64) {
                throw ClusterBudgetExceeded(
                    "omega-limit tail produced more than 64 clusters; tail not convergent "
                    "at this radius");
            }
        }
    }
    return reps;
}

}  // namespace nullfold
