#pragma once

#include "stirlab/contact.hpp"
#include "stirlab/excursions.hpp"

#include "json.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace stirlab
{
    /// 17 significant digits, '.' decimal separator, independent of locale.
    std::string format_double(double x);

    void write_snapshots_csv(std::ostream &os, const std::vector<Snapshot> &snaps, int dim);
    void write_ledger_csv(std::ostream &os, const LocalTimeLedger &ledger);
    void write_excursions_csv(std::ostream &os, const std::vector<ExcursionRecord> &records, int dim);
    void write_histogram_csv(std::ostream &os, const std::vector<double> &lo, const std::vector<double> &hi,
                             const std::vector<double> &counts);

    /// One line of the test report.
    struct ReportEntry
    {
        std::string test_id;
        double statistic = 0.0;
        double p_value = 1.0;
        bool pass = false;
        std::size_t n = 0;
        nlohmann::json params = nlohmann::json::object();
    };

    nlohmann::json to_json(const ReportEntry &e);
    nlohmann::json to_json(const SimConfig &cfg);

    struct RunManifest
    {
        std::string subcommand;
        nlohmann::json config = nlohmann::json::object();
        std::string version;
        std::uint64_t seed = 0;
        std::size_t replicas = 1;
        std::vector<std::string> outputs;
    };

    nlohmann::json to_json(const RunManifest &m);

    /// Writes pretty JSON followed by a newline.
    void write_json(const std::string &path, const nlohmann::json &j);

    std::string version_string();
} // namespace stirlab
