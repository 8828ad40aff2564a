#include "stirlab/clocks.hpp"

#include "stirlab/error.hpp"

#include <algorithm>

namespace stirlab
{
    LocalTimeLedger::LocalTimeLedger(std::vector<Entry> entries)
    {
        entries_.reserve(entries.size());
        for (const auto &e : entries)
            append(e.t, e.L);
    }

    void LocalTimeLedger::append(double t, double L)
    {
        if (!entries_.empty())
        {
            const auto &last = entries_.back();
            if (!(t > last.t))
                throw Error("ledger times must increase strictly");
            if (L < last.L)
                throw Error("ledger local time must not decrease");
        }
        entries_.push_back({t, L});
    }

    double LocalTimeLedger::level_at(double t) const
    {
        if (entries_.empty())
            throw Error("empty ledger");
        if (t <= entries_.front().t)
            return entries_.front().L;
        if (t >= entries_.back().t)
            return entries_.back().L;
        auto it = std::upper_bound(entries_.begin(), entries_.end(), t,
                                   [](double x, const Entry &e) { return x < e.t; });
        const Entry &hi = *it;
        const Entry &lo = *(it - 1);
        const double w = (t - lo.t) / (hi.t - lo.t);
        return std::min(hi.L, lo.L + w * (hi.L - lo.L));
    }

    double sigma(const LocalTimeLedger &ledger, double level)
    {
        const auto &es = ledger.entries();
        if (es.empty() || level > es.back().L)
            throw Error("local time exhausted");
        auto it = std::lower_bound(es.begin(), es.end(), level,
                                   [](const LocalTimeLedger::Entry &e, double x) { return e.L < x; });
        if (it == es.begin())
            return it->t;
        const auto &hi = *it;
        const auto &lo = *(it - 1);
        // lo.L < level <= hi.L, so the denominator is positive
        const double w = (level - lo.L) / (hi.L - lo.L);
        return lo.t + w * (hi.t - lo.t);
    }

    std::vector<Vec> sample_on_local_clock(std::span<const TimedVec> series,
                                           const LocalTimeLedger &ledger,
                                           std::span<const double> grid)
    {
        std::vector<Vec> out;
        out.reserve(grid.size());
        if (grid.empty())
            return out;
        if (series.empty())
            throw Error("empty series");
        for (double level : grid)
        {
            const double s = sigma(ledger, level);
            auto it = std::lower_bound(series.begin(), series.end(), s,
                                       [](const TimedVec &p, double x) { return p.t < x; });
            if (it == series.end())
                --it;
            else if (it != series.begin() && (s - (it - 1)->t) <= (it->t - s))
                --it;
            out.push_back(it->value);
        }
        return out;
    }
} // namespace stirlab
