#include "stirlab/acceptance.hpp"
#include "stirlab/contact.hpp"
#include "stirlab/error.hpp"
#include "stirlab/excursions.hpp"
#include "stirlab/harmonic.hpp"
#include "stirlab/io.hpp"
#include "stirlab/oracles.hpp"
#include "stirlab/parallel.hpp"
#include "stirlab/stats.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>

using namespace stirlab;
using nlohmann::json;

namespace
{
    struct Common
    {
        int dim = 2;
        std::string edge = "inf";
        double dt = 1e-4;
        double t_end = 100.0;
        std::size_t paths = 10000;
        std::uint64_t seed = 1;
        unsigned threads = 0;
        std::string out;
        std::string format = "csv";
        std::size_t snapshot_stride = 1000;
        bool adaptive = false;
    };

    void add_common(CLI::App *app, Common &c)
    {
        app->add_option("--dim", c.dim, "Dimension d")->check(CLI::Range(2, kMaxDim));
        app->add_option("--edge", c.edge, "Torus edge r, or inf for R^d");
        app->add_option("--dt", c.dt, "Base time step")->check(CLI::PositiveNumber);
        app->add_option("--t-end", c.t_end, "Time horizon")->check(CLI::NonNegativeNumber);
        app->add_option("--paths", c.paths, "Number of paths, cycles or walkers")->check(CLI::PositiveNumber);
        app->add_option("--seed", c.seed, "Base seed");
        app->add_option("--threads", c.threads, "Worker threads (0: all cores)");
        app->add_option("--out", c.out, "Data output path (manifest goes to <out>.manifest.json)");
        app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
        app->add_option("--snapshot-stride", c.snapshot_stride, "Steps between path snapshots (0: none)");
        app->add_flag("--adaptive", c.adaptive, "Coarsen steps away from the balls");
    }

    double parse_edge(const std::string &s)
    {
        if (s == "inf" || s == "infinity")
            return std::numeric_limits<double>::infinity();
        std::size_t pos = 0;
        double r = 0.0;
        try
        {
            r = std::stod(s, &pos);
        }
        catch (const std::exception &)
        {
            pos = 0;
        }
        if (pos != s.size())
            throw CLI::ValidationError("--edge", "expected a number or inf, got " + s);
        return r;
    }

    unsigned threads_of(const Common &c)
    {
        return c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
    }

    Space space_of(const Common &c)
    {
        const double r = parse_edge(c.edge);
        Space s = std::isfinite(r) ? Space::torus(c.dim, r) : Space::euclidean(c.dim);
        s.validate();
        return s;
    }

    /// Writes the manifest (before any data) when --out is given.
    void write_manifest(const std::string &sub, const Common &c, const json &config)
    {
        if (c.out.empty())
            return;
        RunManifest m;
        m.subcommand = sub;
        m.config = config;
        m.version = version_string();
        m.seed = c.seed;
        m.replicas = threads_of(c);
        m.outputs = {c.out};
        write_json(c.out + ".manifest.json", to_json(m));
    }

    /// Data goes to --out, or to stdout without it.
    void emit(const Common &c, const std::string &data)
    {
        if (c.out.empty())
        {
            std::cout << data;
            return;
        }
        std::ofstream os(c.out, std::ios::binary);
        if (!os)
            throw Error("cannot open " + c.out);
        os << data;
    }

    json est(const EstimatorResult &e) { return json{{"value", e.value}, {"std_error", e.std_error}, {"n", e.n}}; }

    std::string samples_csv(const std::string &name, const std::vector<double> &v)
    {
        std::ostringstream os;
        os << name << '\n';
        for (double x : v)
            os << format_double(x) << '\n';
        return os.str();
    }

    // ---- simulate / frozen ----

    struct PathArgs
    {
        bool single = false;
        std::string ledger;
        std::string excursions;
    };

    SimConfig sim_config(const Common &c, Mode mode, bool single)
    {
        SimConfig cfg;
        cfg.space = space_of(c);
        cfg.dt = c.dt;
        cfg.t_end = c.t_end;
        cfg.seed = c.seed;
        cfg.mode = mode;
        cfg.two_balls = !single;
        cfg.adaptive = c.adaptive;
        cfg.snapshot_stride = c.snapshot_stride;
        cfg.validate();
        return cfg;
    }

    SystemState default_start(const SimConfig &cfg)
    {
        const int d = cfg.space.dim;
        Vec x(d), y(d);
        if (cfg.space.finite())
        {
            const double r = cfg.space.edge;
            for (int k = 0; k < d; ++k)
            {
                x[k] = r / 4;
                y[k] = 3 * r / 4;
            }
        }
        else
            y[0] = 5.0;
        if (!cfg.two_balls)
            y = x;
        return SystemState::make(cfg.space, x + Vec::axis(d, 0, 1.5), x, y);
    }

    int run_path_cmd(const std::string &sub, const Common &c, const PathArgs &a, Mode mode)
    {
        const SimConfig cfg = sim_config(c, mode, a.single);
        json config = to_json(cfg);
        config["ledger_out"] = a.ledger;
        config["excursions_out"] = a.excursions;
        write_manifest(sub, c, config);

        ExcursionTracker tracker(cfg);
        const bool track = !a.excursions.empty();
        const auto res = run_path(cfg, default_start(cfg), [&](const SystemState &s, const StepReport &r)
        {
            if (track)
                tracker.observe(s, r);
            return true;
        });
        if (track)
            tracker.finish(res.final_state);

        const double L = res.final_state.LX + res.final_state.LY;
        json summary = {{"t", res.final_state.t},
                        {"LX", res.final_state.LX},
                        {"LY", res.final_state.LY},
                        {"steps", res.steps},
                        {"double_contact_steps", res.double_contact_steps},
                        {"far_jumps", res.far_jumps},
                        {"escaped", res.escaped},
                        {"t_over_L", L > 0 ? res.final_state.t / L : 0.0}};
        if (c.format == "csv")
        {
            std::ostringstream os;
            write_snapshots_csv(os, res.snapshots, cfg.space.dim);
            emit(c, os.str());
        }
        else
        {
            json snaps = json::array();
            for (const auto &s : res.snapshots)
            {
                json j = {{"t", s.t}, {"LX", s.LX}, {"LY", s.LY}};
                for (const auto &[key, v] : {std::pair{"B", &s.B}, {"X", &s.X}, {"Y", &s.Y}, {"fX", &s.fX}, {"fY", &s.fY}})
                    j[key] = std::vector<double>(v->c.begin(), v->c.begin() + v->dim);
                snaps.push_back(j);
            }
            emit(c, json{{"summary", summary}, {"snapshots", snaps}}.dump(2) + "\n");
        }
        if (!a.ledger.empty())
        {
            std::ofstream os(a.ledger, std::ios::binary);
            write_ledger_csv(os, res.ledger);
        }
        if (track)
        {
            std::ofstream os(a.excursions, std::ios::binary);
            write_excursions_csv(os, tracker.records(), cfg.space.dim);
        }
        if (!c.out.empty())
            std::cerr << summary.dump() << '\n';
        return 0;
    }

    // ---- oracles ----

    int oracle2d_cmd(const Common &c, double u, double delta)
    {
        write_manifest("oracle2d", c, {{"u", u}, {"delta", delta}, {"paths", c.paths}});
        const auto e = vector_local_time_2d(u, c.paths, delta, c.seed, threads_of(c));
        const double exact = u + std::exp(-u) - 1.0;
        json j = {{"u", u}, {"delta", delta}, {"estimate", est(e)}, {"exact", exact}, {"z", e.z_score(exact)}};
        if (c.format == "json" || !c.out.empty())
            emit(c, j.dump(2) + "\n");
        if (c.format == "csv" && c.out.empty())
            std::printf("estimate %s +- %s (exact %s)\n", format_double(e.value).c_str(),
                        format_double(e.std_error).c_str(), format_double(exact).c_str());
        return 0;
    }

    int kelvin_cmd(const Common &c, std::vector<double> deltas)
    {
        if (c.dim < 3)
            throw Error("kelvin needs --dim >= 3");
        write_manifest("kelvin", c, {{"dim", c.dim}, {"deltas", deltas}, {"paths", c.paths}});
        const auto ref = kelvin_Linf_sq_refined(c.dim, deltas, c.paths, c.seed, threads_of(c));
        json levels = json::array();
        for (std::size_t i = 0; i < deltas.size(); ++i)
            levels.push_back({{"delta", deltas[i]}, {"estimate", est(ref.levels[i])},
                              {"grid_mean", kelvin_Linf_sq_grid_mean(c.dim, deltas[i])}});
        json j = {{"dim", c.dim}, {"levels", levels}, {"extrapolated", est(ref.extrapolated)},
                  {"exact", kelvin_Linf_sq_exact(c.dim)}};
        emit(c, j.dump(2) + "\n");
        return 0;
    }

    int coupling_cmd(const Common &c)
    {
        if (c.dim < 3)
            throw Error("coupling needs --dim >= 3");
        CouplingOptions opt;
        opt.dim = c.dim;
        opt.dt = c.dt;
        write_manifest("coupling", c, {{"dim", c.dim}, {"dt", c.dt}, {"paths", c.paths}});
        const auto samples = sample_paths(c.paths, c.seed, threads_of(c), [&](Rng &rng)
                                          { return scaling_coupling_path(opt, rng).local_time_inf; });
        const auto ks = ks_test(samples, ReferenceLaw::exponential(c.dim - 2.0));
        json summary = {{"mean", est(batch_mean(samples))}, {"rate", c.dim - 2}, {"ks_d", ks.statistic},
                        {"ks_p", ks.p_value}};
        if (c.format == "csv")
            emit(c, samples_csv("local_time_inf", samples));
        else
            emit(c, json{{"summary", summary}, {"samples", samples}}.dump(2) + "\n");
        std::cerr << summary.dump() << '\n';
        return 0;
    }

    // ---- excursions ----

    int excursions_cmd(const Common &c, const std::string &law, double b, std::vector<double> deltas)
    {
        const unsigned threads = threads_of(c);
        if (law == "shell")
        {
            SimConfig cfg;
            cfg.dt = c.dt;
            cfg.seed = c.seed;
            cfg.adaptive = c.adaptive;
            write_manifest("excursions", c, {{"law", law}, {"dim", c.dim}, {"b", b}, {"cycles", c.paths}, {"dt", c.dt}});
            const auto rep = shell_crossing_law(c.dim, b, c.paths, cfg, threads);
            json summary = {{"mean", est(rep.mean)}, {"rate", rep.rate}, {"ks_d", rep.ks.statistic},
                            {"ks_p", rep.ks.p_value}, {"restarts", rep.restarts}};
            if (c.format == "csv")
                emit(c, samples_csv("local_time", rep.samples));
            else
                emit(c, json{{"summary", summary}, {"samples", rep.samples}}.dump(2) + "\n");
            std::cerr << summary.dump() << '\n';
            return 0;
        }
        if (law == "rate")
        {
            write_manifest("excursions", c, {{"law", law}, {"dim", c.dim}, {"b", b}, {"deltas", deltas}, {"walkers", c.paths}});
            const auto e = crossing_rate_estimate(c.dim, b, deltas, c.paths, c.seed, threads);
            json levels = json::array();
            for (std::size_t i = 0; i < e.levels.size(); ++i)
                levels.push_back({{"delta", e.deltas[i]}, {"estimate", est(e.levels[i])},
                                  {"exact", crossing_probability(c.dim, b, e.deltas[i]) / e.deltas[i]}});
            emit(c, json{{"estimate", e.value}, {"std_error", e.std_error}, {"exact", lambda1(c.dim, b)},
                         {"levels", levels}}.dump(2) + "\n");
            return 0;
        }
        // lambda2
        SimConfig cfg;
        cfg.dt = c.dt;
        cfg.seed = c.seed;
        cfg.adaptive = c.adaptive;
        write_manifest("excursions", c, {{"law", law}, {"dim", c.dim}, {"b", b}, {"paths", c.paths}, {"dt", c.dt}});
        const auto r = lambda2_estimate(c.dim, b, c.paths, cfg, threads);
        json summary = {{"lambda2", r.estimate.value}, {"std_error", r.estimate.std_error},
                        {"tail_rate", r.tail_rate}, {"escaped", r.escaped}};
        if (c.format == "csv")
            emit(c, samples_csv("vector_local_time_1", r.samples));
        else
            emit(c, json{{"summary", summary}, {"samples", r.samples}, {"local_times", r.local_times}}.dump(2) + "\n");
        std::cerr << summary.dump() << '\n';
        return 0;
    }

    // ---- walk on spheres ----

    int wos_cmd(const Common &c, double b, int bins, double eps)
    {
        const double r = parse_edge(c.edge);
        if (!std::isfinite(r))
            throw Error("wos needs a finite --edge");
        const auto setup = two_ball_setup(c.dim, b, r);
        write_manifest("wos", c, {{"dim", c.dim}, {"edge", r}, {"b", b}, {"bins", bins}, {"eps", eps}, {"walkers", c.paths}});
        WosOptions opt;
        opt.eps = eps;
        const Vec &x1 = setup.obstacles.centers[0];
        const auto h = sample_hits(setup.z, setup.obstacles, opt, displacement(x1, setup.z, setup.obstacles.space),
                                   bins, c.paths, c.seed, threads_of(c));
        json summary = {{"ratio", est(hitting_ratio(h))}, {"hits_x", h.counts[0]}, {"hits_y", h.counts[1]},
                        {"escaped", h.escaped}, {"mean_jumps", h.mean_jumps}};
        try
        {
            const auto eu = exit_uniformity(h, c.dim, c.seed);
            summary["tv"] = est(eu.tv);
            summary["tv_raw"] = eu.tv_raw;
        }
        catch (const Underpowered &e)
        {
            summary["tv"] = e.what();
        }
        std::vector<double> lo, hi;
        for (int k = 0; k < bins; ++k)
        {
            lo.push_back(-1.0 + 2.0 * k / bins);
            hi.push_back(-1.0 + 2.0 * (k + 1) / bins);
        }
        if (c.format == "csv")
        {
            std::ostringstream os;
            write_histogram_csv(os, lo, hi, h.bin_counts);
            emit(c, os.str());
        }
        else
            emit(c, json{{"summary", summary}, {"bin_lo", lo}, {"bin_hi", hi}, {"count", h.bin_counts}}.dump(2) + "\n");
        std::cerr << summary.dump() << '\n';
        return 0;
    }

    // ---- verify ----

    int verify_cmd(const Common &c, bool quick, std::vector<int> only)
    {
        AcceptanceOptions opt;
        opt.quick = quick;
        opt.threads = threads_of(c);
        opt.seed = c.seed;
        write_manifest("verify", c, {{"quick", quick}, {"criteria", only}});
        std::vector<CriterionResult> results;
        auto print = [](const CriterionResult &r) { std::cout << summary_line(r) << std::endl; };
        if (only.empty())
            results = run_acceptance(opt, print);
        else
            for (int id : only)
            {
                results.push_back(run_criterion(id, opt));
                print(results.back());
            }
        json report = json::array();
        bool all = true;
        for (const auto &r : results)
        {
            report.push_back(to_json(to_report(r)));
            all = all && r.pass;
        }
        if (!c.out.empty())
            write_json(c.out, report);
        std::cout << (all ? "all criteria passed" : "some criteria failed") << std::endl;
        return all ? 0 : 1;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"stirlab: Brownian pushing of hard balls by a reflected driver"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_string());

    Common c;
    PathArgs pa;
    auto *simulate = app.add_subcommand("simulate", "Pushing-mode path with snapshots");
    add_common(simulate, c);
    simulate->add_flag("--single", pa.single, "One ball only");
    simulate->add_option("--ledger", pa.ledger, "Write the local-time ledger CSV here");
    simulate->add_option("--excursions", pa.excursions, "Write excursion records CSV here");

    auto *frozen = app.add_subcommand("frozen", "Frozen-ball path (driver reflects off fixed balls)");
    add_common(frozen, c);
    frozen->add_flag("--single", pa.single, "One ball only");
    frozen->add_option("--ledger", pa.ledger, "Write the local-time ledger CSV here");
    frozen->add_option("--excursions", pa.excursions, "Write excursion records CSV here");

    double u = 1.0, delta = 0.05;
    auto *oracle2d = app.add_subcommand("oracle2d", "Planar vector local time second moment");
    add_common(oracle2d, c);
    oracle2d->add_option("--u", u, "Local-time horizon")->check(CLI::PositiveNumber);
    oracle2d->add_option("--delta", delta, "Chain step")->check(CLI::PositiveNumber);

    std::vector<double> deltas = {0.2, 0.1, 0.05};
    auto *kelvin = app.add_subcommand("kelvin", "E(L^1_inf)^2 by the Kelvin sphere chain");
    add_common(kelvin, c);
    kelvin->add_option("--deltas", deltas, "Grid steps for extrapolation")->delimiter(',');

    auto *coupling = app.add_subcommand("coupling", "Total local time by the scaling coupling");
    add_common(coupling, c);

    std::string law = "shell";
    double b = 2.0;
    std::vector<double> rate_deltas = {0.08, 0.05, 0.025};
    auto *excursions = app.add_subcommand("excursions", "Excursion-law functionals");
    add_common(excursions, c);
    excursions->add_option("--law", law, "shell | rate | lambda2")->check(CLI::IsMember({"shell", "rate", "lambda2"}));
    excursions->add_option("--b", b, "Outer radius")->check(CLI::PositiveNumber);
    excursions->add_option("--deltas", rate_deltas, "Start offsets for --law rate")->delimiter(',');

    int bins = 20;
    double eps = 1e-4;
    double wos_b = 8.0;
    auto *wos = app.add_subcommand("wos", "Two-ball harmonic measure by walk on spheres");
    add_common(wos, c);
    wos->add_option("--b", wos_b, "Start distance from x1")->check(CLI::PositiveNumber);
    wos->add_option("--bins", bins, "cos(angle) histogram bins")->check(CLI::PositiveNumber);
    wos->add_option("--eps", eps, "Absorption shell width")->check(CLI::PositiveNumber);

    bool quick = false;
    std::vector<int> only;
    auto *verify = app.add_subcommand("verify", "Run the acceptance suite");
    add_common(verify, c);
    verify->add_flag("--quick", quick, "Oracle identities and property suites only");
    verify->add_option("--criterion", only, "Run only these criteria")->check(CLI::Range(1, kCriteria));

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        if (*simulate)
            return run_path_cmd("simulate", c, pa, Mode::Pushing);
        if (*frozen)
            return run_path_cmd("frozen", c, pa, Mode::Frozen);
        if (*oracle2d)
            return oracle2d_cmd(c, u, delta);
        if (*kelvin)
            return kelvin_cmd(c, deltas);
        if (*coupling)
            return coupling_cmd(c);
        if (*excursions)
            return excursions_cmd(c, law, b, rate_deltas);
        if (*wos)
            return wos_cmd(c, wos_b, bins, eps);
        if (*verify)
            return verify_cmd(c, quick, only);
    }
    catch (const CLI::ValidationError &e)
    {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
