#pragma once

#include "stirlab/io.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace stirlab
{
    struct CriterionResult
    {
        int id = 0;
        std::string test_id;
        std::string description;
        bool pass = false;
        double statistic = 0.0; ///< headline statistic, see detail for its meaning
        double p_value = 1.0;   ///< 1 when the gate is a tolerance rather than a test
        std::size_t n = 0;
        nlohmann::json params = nlohmann::json::object();
        std::string detail;
        double seconds = 0.0;
    };

    struct AcceptanceOptions
    {
        bool quick = false;
        unsigned threads = 1;
        std::uint64_t seed = 20240917;
    };

    inline constexpr int kCriteria = 13;

    /// Criteria run by `quick`: the closed-form oracles and the property suites.
    std::vector<int> quick_criteria();

    /// Runs one criterion (1..13). Errors inside the criterion become a
    /// failing result with the message in `detail`.
    CriterionResult run_criterion(int id, const AcceptanceOptions &opt);

    /// Runs the selected criteria in order, reporting each as it finishes.
    std::vector<CriterionResult> run_acceptance(const AcceptanceOptions &opt,
                                                const std::function<void(const CriterionResult &)> &on_result = {});

    ReportEntry to_report(const CriterionResult &r);
    /// One line: "PASS  5 integrator_calibration  ...".
    std::string summary_line(const CriterionResult &r);
} // namespace stirlab
