#include "nullfold/report.hpp"

#include <cstdio>

namespace nullfold {

const std::map<std::string, std::string>& check_catalog() {
    static const std::map<std::string, std::string> catalog = {
        {"field_tangency",
         "the vector field is tangent to the manifold at sampled points"},
        {"differential_consistency",
         "declared differentials agree with central finite differences"},
        {"projector_algebra",
         "splitting projectors are idempotent, mutually annihilating, and sum "
         "to the tangent projector"},
        {"null_kernel",
         "null basis vectors annihilate the induced form and the transversal "
         "Gram block is the declared restriction"},
        {"corank_constant",
         "the kernel dimension of the induced form is constant on sampled "
         "states"},
        {"constraint_residual",
         "integrated states stay on the constraint surface within tolerance"},
        {"functional_compatibility",
         "the functional differential annihilates the null distribution at "
         "sampled points"},
        {"degeneracy_equivalence",
         "pointwise vanishing of the dissipation rate coincides with the field "
         "lying in the null distribution"},
        {"lyapunov_monotone",
         "the functional is non-increasing along trajectories up to integrator "
         "slack"},
        {"transversal_decay_constant",
         "the estimated transversal dissipation constant matches its expected "
         "value"},
        {"dissipation_violation_detected",
         "the dissipation estimator reports a violation witness on examples "
         "without pointwise transversal dissipation"},
        {"omega_limit_in_degeneracy_set",
         "estimated limit points lie in the degeneracy set within tolerance"},
        {"dissipation_budget",
         "integrated transversal energy is bounded by the functional drop "
         "divided by the dissipation constant"},
        {"involutivity",
         "brackets of null generators stay in the null distribution within "
         "tolerance"},
        {"projectability",
         "brackets of the field with null generators have negligible "
         "transversal part"},
        {"quotient_fibers",
         "the quotient map is constant along leaves of the null foliation"},
        {"reduced_metric_representative_independence",
         "the reduced metric computed at different leaf representatives "
         "agrees"},
        {"projected_velocity",
         "the velocity of the projected trajectory matches the pushforward of "
         "the transversal field component"},
        {"finite_energy_tail",
         "the tail kinetic energy of the projected trajectory is negligible"},
        {"attractor_stationarity",
         "the pooled sample cloud is stationary between sampling-window "
         "halves in Hausdorff distance"},
        {"attractor_saturation",
         "the sample cloud is saturated under the null foliation"},
        {"box_dimension_bound",
         "box-counting dimension estimates fall within the expected ranges"},
        {"attractor_dimension",
         "the box-counting dimension of the projected cloud matches its "
         "expected value"},
        {"absorbing_ball",
         "every ensemble member enters the absorbing ball and remains inside"},
        {"transversal_spectrum",
         "eigenvalues of the transversal linearized operator match expected "
         "values"},
        {"spectral_gap",
         "spectral gap verdicts at the chosen thresholds match expectations"},
        {"morse_nondegenerate",
         "transversal Hessian nondegeneracy is classified as expected"},
        {"critical_set_tangency",
         "the local critical set is tangent to the null distribution"},
        {"h1_bounded",
         "trajectories remain inside the prescribed radius for the whole "
         "horizon"},
        {"h2_constant_corank",
         "the corank observed along the flow is constant and equals the "
         "declared value"},
        {"h3_transversal_contraction",
         "uniform exponential contraction of transversal perturbations "
         "matches the example's declared behavior"},
        {"h4_splitting_invariance",
         "invariance of the null/transversal splitting under the linearized "
         "flow matches the example's declared behavior"},
        {"sigma_convergence_rate",
         "the distance to the degeneracy set decays at the expected "
         "exponential rate"},
        {"sigma_positive_invariance",
         "states started in the degeneracy set stay in it for all sampled "
         "times"},
        {"projected_limit",
         "the projected trajectory is Cauchy and its limit matches the "
         "expected point"},
        {"rk4_order",
         "global integrator error contracts at fourth order under step "
         "halving"},
    };
    return catalog;
}

std::string fnv1a64_hex(const std::string& text) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : text) {
        hash ^= static_cast<std::uint64_t>(c);
        hash *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash));
    return std::string(buf);
}

void DiagnosticsReport::add(CheckRecord record) {
    if (check_catalog().count(record.id) == 0) {
        throw LabError("unknown check id: " + record.id);
    }
    checks.push_back(std::move(record));
}

void DiagnosticsReport::add_verdict(const std::string& id, bool ok,
                                    ordered_json measured,
                                    ordered_json tolerances,
                                    const std::string& note) {
    CheckRecord record;
    record.id = id;
    record.status = ok ? "pass" : "fail";
    record.measured = std::move(measured);
    record.tolerances = std::move(tolerances);
    record.note = note;
    add(std::move(record));
}

void DiagnosticsReport::add_skipped(const std::string& id,
                                    const std::string& reason) {
    CheckRecord record;
    record.id = id;
    record.status = "skipped";
    record.note = reason;
    add(std::move(record));
}

void DiagnosticsReport::add_failure(const std::string& id,
                                    const std::string& reason) {
    CheckRecord record;
    record.id = id;
    record.status = "fail";
    record.note = reason;
    add(std::move(record));
}

int DiagnosticsReport::passed() const {
    int n = 0;
    for (const auto& c : checks) n += (c.status == "pass");
    return n;
}

int DiagnosticsReport::failed() const {
    int n = 0;
    for (const auto& c : checks) n += (c.status == "fail");
    return n;
}

int DiagnosticsReport::skipped() const {
    int n = 0;
    for (const auto& c : checks) n += (c.status == "skipped");
    return n;
}

ordered_json DiagnosticsReport::to_json() const {
    ordered_json root;
    root["example"] = example;
    root["version"] = version;
    root["seed"] = seed;
    root["config_hash"] = config_hash;
    root["summary"] = {{"passed", passed()},
                       {"failed", failed()},
                       {"skipped", skipped()},
                       {"total", static_cast<int>(checks.size())}};
    ordered_json arr = ordered_json::array();
    for (const auto& c : checks) {
        ordered_json item;
        item["id"] = c.id;
        item["claim"] = check_catalog().at(c.id);
        item["status"] = c.status;
        item["measured"] = c.measured;
        item["tolerances"] = c.tolerances;
        item["note"] = c.note;
        arr.push_back(std::move(item));
    }
    root["checks"] = std::move(arr);
    return root;
}

}  // namespace nullfold
