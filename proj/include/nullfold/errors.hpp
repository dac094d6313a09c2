#pragma once

#include <stdexcept>
#include <string>

#include "nullfold/linalg.hpp"

namespace nullfold {

/// Base class for all failures raised by the library.
class LabError : public std::runtime_error {
public:
    explicit LabError(const std::string& msg) : std::runtime_error(msg) {}
};

#define NULLFOLD_ERROR(Name)                                \
    class Name : public LabError {                          \
    public:                                                 \
        using LabError::LabError;                           \
    }

NULLFOLD_ERROR(MetricSingular);
NULLFOLD_ERROR(RegularityViolated);
NULLFOLD_ERROR(TangencyViolated);
NULLFOLD_ERROR(CorankMismatch);
NULLFOLD_ERROR(GeneratorSpanError);
NULLFOLD_ERROR(SplittingIllConditioned);
NULLFOLD_ERROR(IndefiniteTransversalForm);
NULLFOLD_ERROR(ProjectionDiverged);
NULLFOLD_ERROR(NonFiniteState);
NULLFOLD_ERROR(NonFiniteJacobian);
NULLFOLD_ERROR(QuotientRankError);
NULLFOLD_ERROR(ClusterBudgetExceeded);
NULLFOLD_ERROR(DegenerateScaleRange);
NULLFOLD_ERROR(EigenFailure);
NULLFOLD_ERROR(NewtonDiverged);

#undef NULLFOLD_ERROR

/// Raised when the transversal decay ratio fails to be positive at a sample.
/// Carries the offending point so callers can report it.
class DissipationViolated : public LabError {
public:
    DissipationViolated(const std::string& msg, Vec witness_point, double ratio_value)
        : LabError(msg), witness(std::move(witness_point)), ratio(ratio_value) {}

    Vec witness;
    double ratio;
};

/// Configuration parse/validation failure; carries the offending line (1-based,
/// 0 when not tied to a line) and field name.
class ConfigError : public LabError {
public:
    ConfigError(const std::string& msg, int line_number = 0, std::string field_name = {})
        : LabError(msg), line(line_number), field(std::move(field_name)) {}

    int line;
    std::string field;
};

}  // namespace nullfold
