// Runs every acceptance criterion and prints one line per criterion.
// Exit status is the number of failures (capped at 1).
#include "stirlab/acceptance.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <thread>

int main(int argc, char **argv)
{
    stirlab::AcceptanceOptions opt;
    std::vector<int> only;
    CLI::App app{"stirlab acceptance suite"};
    app.add_flag("--quick", opt.quick, "only the fast criteria");
    app.add_option("--criterion", only, "run these criteria only")->check(CLI::Range(1, stirlab::kCriteria));
    app.add_option("--threads", opt.threads, "worker threads (0 = all cores)");
    app.add_option("--seed", opt.seed, "master seed");
    CLI11_PARSE(app, argc, argv);
    if (opt.threads == 0)
        opt.threads = std::max(1u, std::thread::hardware_concurrency());

    int failures = 0;
    auto report = [&](const stirlab::CriterionResult &r)
    {
        std::cout << stirlab::summary_line(r) << std::endl;
        if (!r.pass)
            ++failures;
    };
    if (only.empty())
        stirlab::run_acceptance(opt, report);
    else
        for (int id : only)
            report(stirlab::run_criterion(id, opt));

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
    return failures == 0 ? 0 : 1;
}
