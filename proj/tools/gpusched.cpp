#include <cstdlib>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

namespace {

void init_logging()
{
    auto logger = spdlog::stderr_color_mt("gpusched");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("GPUSCHED_LOG")) {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to "off"; only honour explicit "off".
        if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
    }
}

std::optional<double> parse_horizon(const std::string& text)
{
    if (text.empty()) return std::nullopt;
    if (text == "inf" || text == "none") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw gpusched::cli::UsageError("--horizon-s: expected seconds or inf, got \"" + text + "\"");
    }
    if (used != text.size()) throw gpusched::cli::UsageError("--horizon-s: expected seconds or inf");
    return v;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text)
{
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stoull(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw gpusched::cli::UsageError("--seeds: bad seed \"" + item + "\"");
        }
    }
    return out;
}

std::vector<std::string> split_list(const std::vector<std::string>& items)
{
    std::vector<std::string> out;
    for (const auto& it : items) {
        std::stringstream ss(it);
        std::string s;
        while (std::getline(ss, s, ','))
            if (!s.empty()) out.push_back(s);
    }
    return out;
}

void add_run_flags(CLI::App* cmd, gpusched::cli::RunOptions& run, std::string& horizon)
{
    cmd->add_option("--config", run.config_path, "JSON run configuration file");
    cmd->add_option("--set", run.sets, "Policy parameter override KEY=VALUE (repeatable)");
    cmd->add_option("--horizon-s", horizon, "Simulation horizon in seconds, or inf");
    cmd->add_option("--nodes", run.nodes, "Number of nodes")->check(CLI::PositiveNumber);
    cmd->add_option("--gpus-per-node", run.gpus_per_node, "GPUs per node")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv)
{
    using namespace gpusched::cli;
    init_logging();

    CLI::App app{"Discrete-event simulator for multi-tenant GPU cluster schedulers"};
    app.require_subcommand(1);

    GenWorkloadOptions gen;
    auto* gen_cmd = app.add_subcommand("genworkload", "Generate a seeded synthetic workload");
    gen_cmd->add_option("--jobs", gen.jobs, "Number of jobs");
    gen_cmd->add_option("--seed", gen.seed, "Random seed");
    gen_cmd->add_option("--mean-interarrival-s", gen.mean_interarrival_s, "Mean gap between arrivals (s)");
    gen_cmd->add_option("--families", gen.families, "Number of model families");
    gen_cmd->add_option("--out", gen.out, "Output workload JSON")->required();

    SimulateOptions sim;
    std::string sim_horizon;
    auto* sim_cmd = app.add_subcommand("simulate", "Run one scheduler over a workload");
    sim_cmd->add_option("--workload", sim.run.workload, "Workload JSON")->required();
    sim_cmd->add_option("--scheduler", sim.scheduler, "fifo|sjf|shortest|shortest-gpu|hps|pbs|sbs");
    sim_cmd->add_option("--out", sim.out, "Report output path");
    sim_cmd->add_option("--format", sim.format, "json|csv|md");
    add_run_flags(sim_cmd, sim.run, sim_horizon);

    CompareOptions cmp;
    std::string cmp_horizon;
    std::string cmp_seeds;
    std::vector<std::string> cmp_scheds;
    auto* cmp_cmd = app.add_subcommand("compare", "Run several schedulers on identical workloads");
    cmp_cmd->add_option("--workload", cmp.run.workload, "Workload JSON (its spec is reused for --seeds)");
    cmp_cmd->add_option("--schedulers,--scheduler", cmp_scheds, "Comma-separated list or all");
    cmp_cmd->add_option("--seeds,--seed", cmp_seeds, "Comma-separated workload seeds");
    cmp_cmd->add_option("--jobs", cmp.jobs, "Jobs per generated workload when --workload is absent");
    cmp_cmd->add_option("--out", cmp.out, "Output prefix: writes PREFIX.csv, PREFIX.summary.csv, PREFIX.json");
    cmp_cmd->add_option("--format", cmp.format, "json|csv|md");
    cmp_cmd->add_option("--threads", cmp.threads, "Concurrent runs (0 = all cores)");
    add_run_flags(cmp_cmd, cmp.run, cmp_horizon);

    ReportOptions rep;
    auto* rep_cmd = app.add_subcommand("report", "Format saved report JSON files");
    rep_cmd->add_option("--in,--workload", rep.inputs, "Report or compare JSON file(s)")->required();
    rep_cmd->add_option("--format", rep.format, "json|csv|md");
    rep_cmd->add_option("--out", rep.out, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen_cmd) return cmd_genworkload(gen, std::cout);
        if (*sim_cmd) {
            sim.run.horizon_s = parse_horizon(sim_horizon);
            return cmd_simulate(sim, std::cout);
        }
        if (*cmp_cmd) {
            cmp.run.horizon_s = parse_horizon(cmp_horizon);
            cmp.seeds = parse_seed_list(cmp_seeds);
            if (!cmp_scheds.empty()) cmp.schedulers = split_list(cmp_scheds);
            return cmd_compare(cmp, std::cout);
        }
        if (*rep_cmd) return cmd_report(rep, std::cout);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const gpusched::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kValidation;
    } catch (const gpusched::ContractViolation& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return kContract;
    }
    return kUsage;
}
