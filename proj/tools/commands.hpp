#pragma once
#ifndef GPUSCHED_TOOLS_COMMANDS_HPP
#define GPUSCHED_TOOLS_COMMANDS_HPP

// Command implementations behind the gpusched CLI. Argument parsing lives in
// gpusched.cpp; everything here takes resolved options and output streams so
// tests can drive the commands directly.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <future>
#include <iostream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "gpusched/engine.hpp"
#include "gpusched/metrics.hpp"
#include "gpusched/policy.hpp"
#include "gpusched/report.hpp"
#include "gpusched/workload.hpp"

namespace gpusched::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kValidation = 2,
    kContract = 3,
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Optional JSON run description; command-line flags take precedence.
struct RunConfigFile {
    std::optional<int> nodes;
    std::optional<int> gpus_per_node;
    std::optional<double> horizon_s;
    std::optional<std::string> scheduler;
    std::vector<std::string> sets;
    std::vector<std::uint64_t> seeds;
};

inline RunConfigFile load_run_config(const std::string& path)
{
    const auto j = parse_json_text(read_text_file(path), path);
    RunConfigFile c;
    if (!j.is_object()) throw ValidationError(path + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "nodes") c.nodes = value.get<int>();
        else if (key == "gpus_per_node") c.gpus_per_node = value.get<int>();
        else if (key == "horizon_s")
            c.horizon_s = value.is_null() ? std::numeric_limits<double>::infinity() : value.get<double>();
        else if (key == "scheduler") c.scheduler = value.get<std::string>();
        else if (key == "set") {
            for (const auto& [k, v] : value.items())
                c.sets.push_back(k + "=" + (v.is_string() ? v.get<std::string>() : v.dump()));
        }
        else if (key == "seeds") c.seeds = value.get<std::vector<std::uint64_t>>();
        else throw ValidationError(path + ": unknown key \"" + key + "\"");
    }
    return c;
}

inline void print_validation(const ValidationReport& report, std::ostream& out)
{
    out << "distribution check over " << report.num_jobs << " jobs (4 standard errors):\n";
    for (const auto& c : report.checks) {
        char line[160];
        std::snprintf(line, sizeof line, "  %-13s %-10s expected %.4f observed %.4f  %s\n", c.marginal.c_str(),
                      c.category.c_str(), c.expected, c.observed, c.pass ? "ok" : "FAIL");
        out << line;
    }
    out << (report.pass() ? "PASS" : "FAIL") << "\n";
}

// ---------------------------------------------------------------------------
// genworkload

struct GenWorkloadOptions {
    long long jobs = 1000;
    std::uint64_t seed = 0;
    double mean_interarrival_s = 120.0;
    int families = 10;
    std::string out;
};

inline int cmd_genworkload(const GenWorkloadOptions& o, std::ostream& out)
{
    if (o.jobs < 1) throw UsageError("--jobs must be >= 1");
    if (o.out.empty()) throw UsageError("--out is required");
    WorkloadSpec spec;
    spec.num_jobs = static_cast<std::size_t>(o.jobs);
    spec.seed = o.seed;
    spec.mean_interarrival_s = o.mean_interarrival_s;
    spec.family_count = o.families;
    const auto wf = generate(spec);
    write_workload(o.out, wf);
    spdlog::info("wrote {} jobs to {}", wf.jobs.size(), o.out);
    const auto report = validate_distribution(wf, spec);
    print_validation(report, out);
    return report.pass() ? kOk : kValidation;
}

// ---------------------------------------------------------------------------
// simulate / compare shared resolution

struct RunOptions {
    std::string workload;
    std::optional<std::string> config_path;
    std::vector<std::string> sets;
    std::optional<double> horizon_s;
    std::optional<int> nodes;
    std::optional<int> gpus_per_node;
};

struct ResolvedRun {
    SimConfig sim;
    PolicyConfig policy;
    std::vector<std::string> overrides;
    RunConfigFile file;
};

inline ResolvedRun resolve(const RunOptions& o)
{
    ResolvedRun r;
    if (o.config_path) r.file = load_run_config(*o.config_path);
    if (r.file.nodes) r.sim.nodes = *r.file.nodes;
    if (r.file.gpus_per_node) r.sim.gpus_per_node = *r.file.gpus_per_node;
    if (r.file.horizon_s) r.sim.horizon_s = *r.file.horizon_s;
    if (o.nodes) r.sim.nodes = *o.nodes;
    if (o.gpus_per_node) r.sim.gpus_per_node = *o.gpus_per_node;
    if (o.horizon_s) r.sim.horizon_s = *o.horizon_s;
    if (!(r.sim.horizon_s > 0.0)) throw UsageError("--horizon-s must be > 0 (or inf)");

    r.overrides = r.file.sets;
    r.overrides.insert(r.overrides.end(), o.sets.begin(), o.sets.end());
    for (const auto& a : r.overrides) {
        try {
            apply_assignment(r.policy, a);
        } catch (const ValidationError& e) {
            throw UsageError(std::string("--set: ") + e.what());
        }
    }
    try {
        validate(r.policy);
        validate(r.sim);
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
    return r;
}

inline RunRecord execute(const WorkloadFile& wf, const std::string& scheduler, const ResolvedRun& cfg)
{
    const auto policy = make_policy(scheduler, cfg.policy);
    const auto trace = run(wf, cfg.sim, policy);
    RunRecord rec;
    rec.scheduler = scheduler;
    rec.seed = wf.spec.seed;
    rec.metrics = compute_report(trace);
    rec.sim = cfg.sim;
    rec.policy = cfg.policy;
    rec.workload = wf.spec;
    rec.overrides = cfg.overrides;
    return rec;
}

inline void check_scheduler(const std::string& name)
{
    if (!is_scheduler_name(name))
        throw UsageError("unknown scheduler \"" + name + "\"; valid: " + scheduler_names_joined());
}

inline std::string summary_line(const RunRecord& r)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s: throughput %.2f jobs/h, utilization %.1f%%, starved %zu, success %.1f%%",
                  r.scheduler.c_str(), r.metrics.throughput_jobs_per_hour, r.metrics.gpu_utilization * 100.0,
                  r.metrics.starvation_count, r.metrics.success_rate * 100.0);
    return buf;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
    RunOptions run;
    std::optional<std::string> scheduler;
    std::string out;
    std::string format = "json";
};

inline int cmd_simulate(const SimulateOptions& o, std::ostream& out)
{
    if (o.run.workload.empty()) throw UsageError("--workload is required");
    auto cfg = resolve(o.run);
    const std::string scheduler = o.scheduler ? *o.scheduler : cfg.file.scheduler.value_or("");
    if (scheduler.empty()) throw UsageError("--scheduler is required");
    check_scheduler(scheduler);

    const auto wf = read_workload(o.run.workload);
    const auto rec = execute(wf, scheduler, cfg);

    std::string body;
    if (o.format == "json") body = dump_report(rec);
    else if (o.format == "csv") body = csv_table({rec});
    else if (o.format == "md") body = summary_markdown(summarize({rec}));
    else throw UsageError("--format must be json|csv|md");

    if (!o.out.empty()) write_text_file(o.out, body);
    else out << body;
    // Keep stdout clean when it carries the report itself.
    (o.out.empty() ? std::cerr : out) << summary_line(rec) << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// compare

struct CompareOptions {
    RunOptions run;
    std::vector<std::string> schedulers{"all"};
    std::vector<std::uint64_t> seeds;
    long long jobs = 1000;  // used when no workload file is given
    std::string out;
    std::string format = "md";
    unsigned threads = 0;  // 0: hardware concurrency
};

struct CompareResult {
    std::vector<RunRecord> runs;  // seed-major, schedulers in request order
    std::vector<SchedulerSummary> summary;
};

inline std::vector<std::string> expand_schedulers(const std::vector<std::string>& requested)
{
    std::vector<std::string> out;
    for (const auto& s : requested) {
        if (s == "all") {
            for (auto n : kSchedulerNames)
                if (std::find(out.begin(), out.end(), n) == out.end()) out.emplace_back(n);
            continue;
        }
        check_scheduler(s);
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    if (out.empty()) throw UsageError("no schedulers requested");
    return out;
}

inline CompareResult run_compare(const CompareOptions& o)
{
    auto cfg = resolve(o.run);
    const auto schedulers = expand_schedulers(o.schedulers);

    WorkloadSpec base;
    std::optional<WorkloadFile> file;
    if (!o.run.workload.empty()) {
        file = read_workload(o.run.workload);
        base = file->spec;
    } else {
        if (o.jobs < 1) throw UsageError("--jobs must be >= 1");
        base.num_jobs = static_cast<std::size_t>(o.jobs);
    }
    std::vector<std::uint64_t> seeds = o.seeds.empty() ? cfg.file.seeds : o.seeds;

    std::vector<WorkloadFile> workloads;
    if (seeds.empty()) {
        workloads.push_back(file ? *file : generate(base));
    } else {
        for (auto seed : seeds) {
            if (file && file->spec.seed == seed) {
                workloads.push_back(*file);
                continue;
            }
            WorkloadSpec s = base;
            s.seed = seed;
            workloads.push_back(generate(s));
        }
    }

    // Each (workload, scheduler) pair is an isolated run; results are stored
    // by index so output order does not depend on completion order.
    CompareResult result;
    result.runs.resize(workloads.size() * schedulers.size());
    const unsigned hw = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> pending;
    std::size_t next = 0;
    auto launch = [&](std::size_t idx) {
        const auto& wf = workloads[idx / schedulers.size()];
        const auto& name = schedulers[idx % schedulers.size()];
        return std::async(std::launch::async, [&, idx, name] {
            spdlog::debug("run {} seed {}", name, wf.spec.seed);
            result.runs[idx] = execute(wf, name, cfg);
        });
    };
    while (next < result.runs.size() || !pending.empty()) {
        while (next < result.runs.size() && pending.size() < hw) pending.push_back(launch(next++));
        pending.front().get();
        pending.erase(pending.begin());
    }
    result.summary = summarize(result.runs);
    return result;
}

inline std::string compare_json(const CompareResult& r)
{
    nlohmann::ordered_json o;
    auto runs = nlohmann::ordered_json::array();
    for (const auto& rec : r.runs) runs.push_back(to_ordered_json(rec));
    o["runs"] = std::move(runs);
    o["summary"] = nlohmann::ordered_json::parse(summary_json(r.summary).dump());
    return o.dump(2) + "\n";
}

inline int cmd_compare(const CompareOptions& o, std::ostream& out)
{
    if (o.format != "md" && o.format != "csv" && o.format != "json") throw UsageError("--format must be json|csv|md");
    const auto result = run_compare(o);
    if (!o.out.empty()) {
        write_text_file(o.out + ".csv", csv_table(result.runs));
        write_text_file(o.out + ".summary.csv", summary_csv(result.summary));
        write_text_file(o.out + ".json", compare_json(result));
        spdlog::info("wrote {}.csv, {}.summary.csv and {}.json", o.out, o.out, o.out);
    }
    if (o.format == "md") {
        std::uint64_t last_seed = 0;
        std::vector<RunRecord> block;
        auto flush = [&] {
            if (block.empty()) return;
            out << "seed " << last_seed << "\n\n" << summary_markdown(summarize(block)) << "\n";
            block.clear();
        };
        for (const auto& rec : result.runs) {
            if (!block.empty() && rec.seed != last_seed) flush();
            last_seed = rec.seed;
            block.push_back(rec);
        }
        flush();
        out << "aggregate (mean ± stderr)\n\n" << summary_markdown(result.summary);
    } else if (o.format == "csv") {
        out << csv_table(result.runs) << "\n" << summary_csv(result.summary);
    } else {
        out << compare_json(result);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
    std::vector<std::string> inputs;
    std::string format = "md";
    std::string out;
};

/// Accepts single-run reports and compare outputs ({"runs": [...]}).
inline std::vector<RunRecord> load_records(const std::vector<std::string>& paths)
{
    std::vector<RunRecord> out;
    for (const auto& p : paths) {
        const auto j = parse_json_text(read_text_file(p), p);
        try {
            if (j.contains("runs")) {
                for (const auto& r : j["runs"]) out.push_back(record_from_json(r));
            } else {
                out.push_back(record_from_json(j));
            }
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(p + ": " + e.what());
        }
    }
    return out;
}

inline int cmd_report(const ReportOptions& o, std::ostream& out)
{
    if (o.inputs.empty()) throw UsageError("at least one --in report is required");
    const auto records = load_records(o.inputs);
    std::string body;
    if (o.format == "md") body = summary_markdown(summarize(records));
    else if (o.format == "csv") body = csv_table(records);
    else if (o.format == "json") body = summary_json(summarize(records)).dump(2) + "\n";
    else throw UsageError("--format must be json|csv|md");
    if (o.out.empty()) out << body;
    else write_text_file(o.out, body);
    return kOk;
}

}  // namespace gpusched::cli

#endif  // GPUSCHED_TOOLS_COMMANDS_HPP
