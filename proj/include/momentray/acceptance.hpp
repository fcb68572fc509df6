#pragma once

// Acceptance criteria 1-9: each runs a fixed experiment and compares it
// against a pinned tolerance.

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace momentray {

namespace tol {
inline constexpr double kCdDispersion = 1e-6;
inline constexpr double kCdD2 = 1e-6;
inline constexpr double kDuality = 1e-3;
inline constexpr double kUnitSquare = 1e-6;
inline constexpr double kSlopeRel = 0.03;
inline constexpr double kCriticalDiff = 1e-2;
inline constexpr double kLorentzRel = 1e-12;
inline constexpr double kRwtFloor = 0.01;
inline constexpr double kFloorStability = 2.0;
inline constexpr double kLemma2Decay = 0.5;
inline constexpr double kTowerFactor = 2.0;
}  // namespace tol

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string summary;
    nlohmann::ordered_json details;
};

struct AcceptanceOptions {
    std::uint64_t seed = 1;
    int workers = 1;
    std::string corpus_path;  // empty: default corpus
    std::vector<int> only;    // empty: all of 1-9
};

using CriterionFn = CriterionResult (*)(const AcceptanceOptions&);

CriterionResult criterion_jacobian(const AcceptanceOptions& o);
CriterionResult criterion_duality(const AcceptanceOptions& o);
CriterionResult criterion_unit_square(const AcceptanceOptions& o);
CriterionResult criterion_scaling(const AcceptanceOptions& o);
CriterionResult criterion_lorentz(const AcceptanceOptions& o);
CriterionResult criterion_rwt_corpus(const AcceptanceOptions& o);
CriterionResult criterion_refinement_ratios(const AcceptanceOptions& o);
CriterionResult criterion_tower(const AcceptanceOptions& o);

/// Criterion 9: reruns the selected criteria among 1-8 and compares the
/// serialized details byte for byte with `first`.
CriterionResult criterion_determinism(const AcceptanceOptions& o,
                                      const std::vector<CriterionResult>& first);

/// Runs the selected criteria in order; `on_result` sees each as it ends.
std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& o, const std::function<void(const CriterionResult&)>& on_result = {});

/// "criterion N name: PASS|FAIL summary"
std::string format_line(const CriterionResult& r);

nlohmann::ordered_json to_json(const std::vector<CriterionResult>& results);

}  // namespace momentray
