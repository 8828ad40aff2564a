#include "stirlab/io.hpp"

#include "stirlab/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#ifndef STIRLAB_VERSION
#define STIRLAB_VERSION "0.0.0"
#endif

namespace stirlab
{
    std::string format_double(double x)
    {
        if (std::isnan(x))
            return "nan";
        if (std::isinf(x))
            return x > 0 ? "inf" : "-inf";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        // snprintf follows LC_NUMERIC; normalize in case a caller changed it
        for (char *p = buf; *p; ++p)
            if (*p == ',')
                *p = '.';
        return buf;
    }

    namespace
    {
        void header_vec(std::ostream &os, const char *name, int dim)
        {
            static const char axes[] = "xyzwabcd";
            for (int i = 0; i < dim; ++i)
                os << ',' << name << axes[i];
        }

        void put_vec(std::ostream &os, const Vec &v)
        {
            for (int i = 0; i < v.dim; ++i)
                os << ',' << format_double(v[i]);
        }
    } // namespace

    void write_snapshots_csv(std::ostream &os, const std::vector<Snapshot> &snaps, int dim)
    {
        os << "t,LX,LY";
        header_vec(os, "B", dim);
        header_vec(os, "X", dim);
        header_vec(os, "Y", dim);
        header_vec(os, "fX", dim);
        header_vec(os, "fY", dim);
        os << '\n';
        for (const auto &s : snaps)
        {
            os << format_double(s.t) << ',' << format_double(s.LX) << ',' << format_double(s.LY);
            put_vec(os, s.B);
            put_vec(os, s.X);
            put_vec(os, s.Y);
            put_vec(os, s.fX);
            put_vec(os, s.fY);
            os << '\n';
        }
    }

    void write_ledger_csv(std::ostream &os, const LocalTimeLedger &ledger)
    {
        os << "t,L\n";
        for (const auto &e : ledger.entries())
            os << format_double(e.t) << ',' << format_double(e.L) << '\n';
    }

    void write_excursions_csv(std::ostream &os, const std::vector<ExcursionRecord> &records, int dim)
    {
        os << "t_start";
        header_vec(os, "start", dim);
        header_vec(os, "end", dim);
        os << ",zeta,max_radius,which_ball,censored\n";
        for (const auto &r : records)
        {
            os << format_double(r.t_start);
            put_vec(os, r.start);
            put_vec(os, r.end);
            os << ',' << format_double(r.zeta) << ',' << format_double(r.max_radius) << ','
               << (r.which_ball == 0 ? 'X' : 'Y') << ',' << (r.censored ? 1 : 0) << '\n';
        }
    }

    void write_histogram_csv(std::ostream &os, const std::vector<double> &lo, const std::vector<double> &hi,
                             const std::vector<double> &counts)
    {
        if (lo.size() != hi.size() || lo.size() != counts.size())
            throw Error("histogram: size mismatch");
        os << "bin_lo,bin_hi,count\n";
        for (std::size_t i = 0; i < lo.size(); ++i)
            os << format_double(lo[i]) << ',' << format_double(hi[i]) << ',' << format_double(counts[i]) << '\n';
    }

    nlohmann::json to_json(const ReportEntry &e)
    {
        return {{"test_id", e.test_id}, {"statistic", e.statistic}, {"p_value", e.p_value},
                {"pass", e.pass},       {"n", e.n},                 {"params", e.params}};
    }

    nlohmann::json to_json(const SimConfig &cfg)
    {
        nlohmann::json j;
        j["dim"] = cfg.space.dim;
        if (cfg.space.finite())
            j["edge"] = cfg.space.edge;
        else
            j["edge"] = "inf";
        j["dt"] = cfg.dt;
        j["t_end"] = cfg.t_end;
        j["seed"] = cfg.seed;
        j["tol_overlap"] = cfg.tol_overlap;
        j["max_contact_iters"] = cfg.max_contact_iters;
        j["mode"] = cfg.mode == Mode::Pushing ? "pushing" : "frozen";
        j["two_balls"] = cfg.two_balls;
        j["adaptive"] = cfg.adaptive;
        j["adaptive_kappa"] = cfg.adaptive_kappa;
        j["max_step"] = cfg.max_step;
        j["far_field_radius"] = cfg.far_field_radius;
        j["far_field_return"] = cfg.far_field_return;
        j["snapshot_stride"] = cfg.snapshot_stride;
        return j;
    }

    nlohmann::json to_json(const RunManifest &m)
    {
        return {{"subcommand", m.subcommand}, {"config", m.config},     {"version", m.version},
                {"seed", m.seed},             {"replicas", m.replicas}, {"outputs", m.outputs}};
    }

    void write_json(const std::string &path, const nlohmann::json &j)
    {
        std::ofstream os(path);
        if (!os)
            throw Error("cannot open " + path);
        os << j.dump(2) << '\n';
    }

    std::string version_string()
    {
        return STIRLAB_VERSION;
    }
} // namespace stirlab
