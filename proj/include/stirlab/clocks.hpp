#pragma once

#include "stirlab/vec.hpp"

#include <span>
#include <vector>

namespace stirlab
{
    /// Monotone record of (time, local time); entries have strictly
    /// increasing t and nondecreasing L.
    class LocalTimeLedger
    {
    public:
        struct Entry
        {
            double t;
            double L;
        };

        LocalTimeLedger() = default;
        /// Validates monotonicity; throws on violation.
        explicit LocalTimeLedger(std::vector<Entry> entries);

        /// Appends an entry; throws if it breaks monotonicity.
        void append(double t, double L);

        const std::vector<Entry> &entries() const { return entries_; }
        bool empty() const { return entries_.empty(); }
        std::size_t size() const { return entries_.size(); }
        double final_level() const { return entries_.empty() ? 0.0 : entries_.back().L; }
        double final_time() const { return entries_.empty() ? 0.0 : entries_.back().t; }

        /// Local time at time t, linearly interpolated between entries.
        double level_at(double t) const;

    private:
        std::vector<Entry> entries_;
    };

    /// First (interpolated) time at which the ledger reaches `level`.
    /// Within a flat stretch the left endpoint is returned.
    double sigma(const LocalTimeLedger &ledger, double level);

    struct TimedVec
    {
        double t;
        Vec value;
    };

    /// Evaluates a recorded series at sigma(level) for each level in `grid`,
    /// using the snapshot nearest in time (ties resolve to the earlier one).
    std::vector<Vec> sample_on_local_clock(std::span<const TimedVec> series,
                                           const LocalTimeLedger &ledger,
                                           std::span<const double> grid);
} // namespace stirlab
