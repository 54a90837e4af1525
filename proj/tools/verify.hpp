#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spiral/background.hpp"

namespace spiralflow {

// One pass/fail line with its margin (positive when passing).
struct Check {
    std::string name;
    std::string where;
    double value = 0;
    std::string bound;
    double margin = 0;
    bool pass = false;
};

Check check_less(const std::string& name, const std::string& where, double value, double limit);
Check check_at_most(const std::string& name, const std::string& where, double value, double limit);
Check check_at_least(const std::string& name, const std::string& where, double value, double limit);
Check check_greater(const std::string& name, const std::string& where, double value, double limit);
Check check_within(const std::string& name, const std::string& where, double value, double lo, double hi);
Check check_true(const std::string& name, const std::string& where, bool ok);

nlohmann::json to_json(const Check& c);

struct CriterionResult {
    int id = 0;
    std::string title;
    std::vector<Check> checks;
    nlohmann::json details = nlohmann::json::object();

    CriterionResult() = default;
    CriterionResult(int i, std::string t) : id(i), title(std::move(t)) {}

    bool pass() const;
};

// Admissible parameter sets drawn with a fixed seed; gamma in [3, 5].
std::vector<spiral::BackgroundParams> admissible_sample(int count, unsigned seed);

// J1/J2 consistency, Mach bounds, monotone rho and M2^2, r E > r0 E0, Bernoulli defect.
std::vector<Check> background_invariants(const spiral::BackgroundFlow& f, double bernoulli_tol,
                                         const std::string& where);

CriterionResult verify_background();
CriterionResult verify_certificate();
CriterionResult verify_linear();
CriterionResult verify_irrotational();
CriterionResult verify_rotational();
CriterionResult verify_axisym(int threads);
CriterionResult verify_dual_forms();

// Runs all seven criteria; a SolverError inside one becomes a failed check of that criterion.
// on_done receives each result with its wall time in seconds.
std::vector<CriterionResult> verify_all(
    int threads, const std::function<void(const CriterionResult&, double)>& on_done = {});

}  // namespace spiralflow
