// Command line front end: one subcommand per pipeline stage, each driven by a
// key = value configuration file.

#include "linf/config.hpp"
#include "linf/error.hpp"
#include "linf/log.hpp"
#include "linf/run.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <iostream>
#include <mutex>
#include <thread>

namespace {

using linf::CommandResult;
using Command = std::function<CommandResult(const linf::RunConfig&)>;

CommandResult run_one(const std::string& path, const Command& cmd)
{
    return linf::guarded([&] { return cmd(linf::parse_config(path)); });
}

/// Runs `cmd` on every config with up to `jobs` worker threads. Results are
/// printed in input order; the exit code is the largest one seen.
int run_all(const std::vector<std::string>& paths, const Command& cmd, int jobs)
{
    std::vector<CommandResult> results(paths.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < paths.size(); i = next++) {
            linf::log::info("[%s] start", paths[i].c_str());
            results[i] = run_one(paths[i], cmd);
            linf::log::info("[%s] exit %d", paths[i].c_str(), results[i].exit_code);
        }
    };
    const int n = std::clamp(jobs, 1, static_cast<int>(paths.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    int code = linf::exit_ok;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        nlohmann::json out;
        out["config"] = paths[i];
        out["exit_code"] = results[i].exit_code;
        out["result"] = results[i].report;
        // solve reports are large; the summary keeps what a human reads first
        if (results[i].report.contains("trace")) {
            out["result"].erase("structure");
            out["result"].erase("config");
            out["result"]["trace"].erase("steps");
        }
        std::cout << out.dump(2) << '\n';
        if (results[i].report.contains("error")) std::cerr << paths[i] << ": " << results[i].report["error"].get<std::string>() << '\n';
        code = std::max(code, results[i].exit_code);
    }
    return code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete L-infinity minimisation of F(x, Laplacian u) by p-continuation"};
    app.require_subcommand(1);
    app.footer("Exit codes: 0 ok, 1 invariant check failed, 2 probe found a better competitor, "
               "3 solver failure, 4 configuration error. Set LINF_LOG=info|debug for progress.");

    std::vector<std::string> configs;
    int jobs = 1;
    std::string solution;
    double p = 0.0;
    std::optional<double> epsilon;

    auto add_configs = [&](CLI::App* sub) {
        sub->add_option("configs", configs, "Configuration files")->required()->check(CLI::ExistingFile);
        sub->add_option("-j,--jobs", jobs, "Configurations run in parallel")->check(CLI::PositiveNumber);
    };

    auto* check = app.add_subcommand("check-model", "Sample the model assumptions and their consequences");
    add_configs(check);
    auto* solve = app.add_subcommand("solve", "p-continuation, structure analysis and persistence");
    add_configs(solve);
    auto* oracle = app.add_subcommand("oracle", "Semi-analytic solution of an interval problem");
    add_configs(oracle);
    auto* analyze = app.add_subcommand("analyze", "Structure analysis of a stored field");
    add_configs(analyze);
    analyze->add_option("-s,--solution", solution, "Field file (.bin or .csv)")->required()->check(CLI::ExistingFile);
    analyze->add_option("-p,--exponent", p, "Exponent of the energy (default continuation.p_max)");
    auto* probe = app.add_subcommand("probe", "Minimality probe of a stored field");
    add_configs(probe);
    probe->add_option("-s,--solution", solution, "Field file (.bin or .csv); defaults to the boundary datum")
        ->check(CLI::ExistingFile);
    auto* smooth = app.add_subcommand("smooth", "Boundary-zone smoothing of the boundary datum");
    add_configs(smooth);
    smooth->add_option("-e,--epsilon", epsilon, "Target sup of the Laplacian near the boundary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : linf::exit_config_error;
    }

    Command cmd;
    if (*check) cmd = linf::cmd_check_model;
    else if (*solve) cmd = linf::cmd_solve;
    else if (*oracle) cmd = linf::cmd_oracle;
    else if (*analyze) cmd = [&](const linf::RunConfig& c) { return linf::cmd_analyze(c, solution, p); };
    else if (*probe) cmd = [&](const linf::RunConfig& c) { return linf::cmd_probe(c, solution); };
    else cmd = [&](const linf::RunConfig& c) { return linf::cmd_smooth(c, epsilon); };
    return run_all(configs, cmd, jobs);
}
