#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nullfold/errors.hpp"

namespace nullfold {

using ordered_json = nlohmann::ordered_json;

/// One verified claim: identifier, verdict, measured numbers, and the
/// tolerances they were held to.
struct CheckRecord {
    std::string id;
    std::string status;            // "pass" | "fail" | "skipped"
    ordered_json measured = ordered_json::object();
    ordered_json tolerances = ordered_json::object();
    std::string note;
};

/// Catalog of all check identifiers with a one-line statement of the claim
/// each one verifies. Every record in a report must use a cataloged id.
const std::map<std::string, std::string>& check_catalog();

/// FNV-1a 64-bit digest, lowercase hex.
std::string fnv1a64_hex(const std::string& text);

/// Aggregated pass/fail results of a battery or experiment run.
class DiagnosticsReport {
public:
    std::string example;
    std::string version;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<CheckRecord> checks;

    void add(CheckRecord record);

    /// pass when ok, fail otherwise; measured/tolerances attached verbatim.
    void add_verdict(const std::string& id, bool ok, ordered_json measured,
                     ordered_json tolerances, const std::string& note = {});
    void add_skipped(const std::string& id, const std::string& reason);
    void add_failure(const std::string& id, const std::string& reason);

    int passed() const;
    int failed() const;
    int skipped() const;
    bool all_passed() const { return failed() == 0; }

    /// Deterministic JSON rendering with stable key order.
    ordered_json to_json() const;
};

}  // namespace nullfold
