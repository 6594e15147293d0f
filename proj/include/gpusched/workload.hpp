#pragma once
#ifndef GPUSCHED_WORKLOAD_HPP
#define GPUSCHED_WORKLOAD_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gpusched/core.hpp"

namespace gpusched {

enum class DurationBand { Short, Medium, Long, VeryLong };

struct BandRange {
    double lo_s;
    double hi_s;  // exclusive
};

inline constexpr std::array<BandRange, 4> kDurationBands{{
    {300.0, 1800.0},
    {1800.0, 7200.0},
    {7200.0, 28800.0},
    {28800.0, 86400.0},
}};

inline constexpr std::array<std::string_view, 3> kTypeLabels{"inference", "training", "research"};
inline constexpr std::array<std::string_view, 5> kGpuLabels{"1", "2", "4", "8", "16+"};
inline constexpr std::array<int, 4> kGpuBucketValues{1, 2, 4, 8};
inline constexpr std::array<std::string_view, 4> kDurationLabels{"short", "medium", "long", "very_long"};

inline DurationBand classify_duration(double duration_s)
{
    if (duration_s < kDurationBands[0].hi_s) return DurationBand::Short;
    if (duration_s < kDurationBands[1].hi_s) return DurationBand::Medium;
    if (duration_s < kDurationBands[2].hi_s) return DurationBand::Long;
    return DurationBand::VeryLong;
}

/// Bucket index into kGpuLabels; 16 and 32 share the tail bucket.
inline std::size_t gpu_bucket(int num_gpu)
{
    switch (num_gpu) {
    case 1: return 0;
    case 2: return 1;
    case 4: return 2;
    case 8: return 3;
    default: return 4;
    }
}

struct WorkloadSpec {
    std::size_t num_jobs = 1000;
    std::uint64_t seed = 0;
    double mean_interarrival_s = 120.0;
    std::array<double, 3> type_mix{0.50, 0.30, 0.20};
    std::array<double, 5> gpu_mix{0.35, 0.25, 0.20, 0.15, 0.05};
    std::array<double, 4> duration_mix{0.40, 0.35, 0.20, 0.05};
    int family_count = 10;
    std::array<double, 2> throughput_factor_range{0.5, 2.0};

    bool operator==(const WorkloadSpec&) const = default;
};

namespace detail {

template <std::size_t N>
void check_mix(const std::array<double, N>& mix, const char* name)
{
    double sum = 0.0;
    for (double p : mix) {
        if (!(p >= 0.0) || p > 1.0)
            throw ValidationError(std::string("workload spec: ") + name + " has a probability outside [0, 1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError(std::string("workload spec: ") + name + " sums to " + std::to_string(sum) + ", expected 1");
}

}  // namespace detail

inline void validate(const WorkloadSpec& spec)
{
    if (spec.num_jobs < 1) throw ValidationError("workload spec: num_jobs must be >= 1");
    if (!(spec.mean_interarrival_s > 0.0)) throw ValidationError("workload spec: mean_interarrival_s must be > 0");
    if (spec.family_count < 1) throw ValidationError("workload spec: family_count must be >= 1");
    const auto [lo, hi] = spec.throughput_factor_range;
    if (!(lo > 0.0) || !(hi >= lo))
        throw ValidationError("workload spec: throughput_factor_range must satisfy 0 < lo <= hi");
    detail::check_mix(spec.type_mix, "type_mix");
    detail::check_mix(spec.gpu_mix, "gpu_mix");
    detail::check_mix(spec.duration_mix, "duration_mix");
}

struct WorkloadFile {
    WorkloadSpec spec;
    std::vector<Job> jobs;
};

/// Validates the structural invariants of a job list: ids 0..n-1 in order,
/// non-decreasing arrivals, positive demands.
inline void validate_jobs(const std::vector<Job>& jobs)
{
    double last_arrival = 0.0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const Job& j = jobs[i];
        const std::string where = "jobs[" + std::to_string(i) + "]";
        if (j.id != static_cast<JobId>(i)) throw ValidationError(where + ": id must equal its position");
        if (!(j.arrival_s >= 0.0)) throw ValidationError(where + ": arrival_s must be >= 0");
        if (i > 0 && j.arrival_s < last_arrival) throw ValidationError(where + ": arrivals must be non-decreasing");
        if (j.num_gpu < 1) throw ValidationError(where + ": num_gpu must be >= 1");
        if (!(j.duration_s > 0.0)) throw ValidationError(where + ": duration_s must be > 0");
        if (!(j.iterations > 0.0)) throw ValidationError(where + ": iterations must be > 0");
        if (j.model_family < 0) throw ValidationError(where + ": model_family must be >= 0");
        last_arrival = j.arrival_s;
    }
}

inline WorkloadFile generate(const WorkloadSpec& spec)
{
    validate(spec);
    std::mt19937_64 rng(spec.seed);
    std::exponential_distribution<double> gap(1.0 / spec.mean_interarrival_s);
    std::discrete_distribution<std::size_t> type_dist(spec.type_mix.begin(), spec.type_mix.end());
    std::discrete_distribution<std::size_t> gpu_dist(spec.gpu_mix.begin(), spec.gpu_mix.end());
    std::discrete_distribution<std::size_t> band_dist(spec.duration_mix.begin(), spec.duration_mix.end());
    std::uniform_int_distribution<int> tail_pick(0, 1);
    std::uniform_int_distribution<int> family_dist(0, spec.family_count - 1);
    std::uniform_real_distribution<double> density(spec.throughput_factor_range[0], spec.throughput_factor_range[1]);

    WorkloadFile wf{spec, {}};
    wf.jobs.reserve(spec.num_jobs);
    double clock = 0.0;
    for (std::size_t i = 0; i < spec.num_jobs; ++i) {
        Job j;
        j.id = static_cast<JobId>(i);
        clock += gap(rng);
        j.arrival_s = clock;
        j.type = static_cast<JobType>(type_dist(rng));
        const std::size_t bucket = gpu_dist(rng);
        j.num_gpu = bucket < kGpuBucketValues.size() ? kGpuBucketValues[bucket] : (tail_pick(rng) == 0 ? 16 : 32);
        const auto band = kDurationBands[band_dist(rng)];
        j.duration_s = std::uniform_real_distribution<double>(band.lo_s, band.hi_s)(rng);
        j.iterations = j.duration_s * density(rng);
        j.model_family = family_dist(rng);
        wf.jobs.push_back(j);
    }
    return wf;
}

struct MarginalCheck {
    std::string marginal;
    std::string category;
    double expected = 0.0;
    double observed = 0.0;
    double std_error = 0.0;
    bool pass = true;
};

struct ValidationReport {
    std::size_t num_jobs = 0;
    std::vector<MarginalCheck> checks;

    bool pass() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const MarginalCheck& c) { return c.pass; });
    }
};

/// Flags any category frequency further than `k_sigma` binomial standard
/// errors from its target probability.
inline ValidationReport validate_distribution(const WorkloadFile& wf, const WorkloadSpec& spec, double k_sigma = 4.0)
{
    if (wf.jobs.empty()) throw ContractViolation("validate_distribution: empty workload");
    const auto n = static_cast<double>(wf.jobs.size());
    std::array<double, 3> types{};
    std::array<double, 5> gpus{};
    std::array<double, 4> bands{};
    for (const Job& j : wf.jobs) {
        types[static_cast<std::size_t>(j.type)] += 1.0;
        gpus[gpu_bucket(j.num_gpu)] += 1.0;
        bands[static_cast<std::size_t>(classify_duration(j.duration_s))] += 1.0;
    }

    ValidationReport report;
    report.num_jobs = wf.jobs.size();
    auto add = [&](std::string_view marginal, std::string_view label, double p, double count) {
        MarginalCheck c;
        c.marginal = marginal;
        c.category = label;
        c.expected = p;
        c.observed = count / n;
        c.std_error = std::sqrt(p * (1.0 - p) / n);
        c.pass = std::abs(c.observed - p) <= k_sigma * c.std_error + 1e-12;
        report.checks.push_back(std::move(c));
    };
    for (std::size_t i = 0; i < types.size(); ++i) add("type_mix", kTypeLabels[i], spec.type_mix[i], types[i]);
    for (std::size_t i = 0; i < gpus.size(); ++i) add("gpu_mix", kGpuLabels[i], spec.gpu_mix[i], gpus[i]);
    for (std::size_t i = 0; i < bands.size(); ++i)
        add("duration_mix", kDurationLabels[i], spec.duration_mix[i], bands[i]);
    return report;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const WorkloadSpec& s)
{
    nlohmann::json j;
    j["num_jobs"] = s.num_jobs;
    j["seed"] = s.seed;
    j["mean_interarrival_s"] = s.mean_interarrival_s;
    for (std::size_t i = 0; i < kTypeLabels.size(); ++i) j["type_mix"][kTypeLabels[i]] = s.type_mix[i];
    for (std::size_t i = 0; i < kGpuLabels.size(); ++i) j["gpu_mix"][kGpuLabels[i]] = s.gpu_mix[i];
    for (std::size_t i = 0; i < kDurationLabels.size(); ++i) j["duration_mix"][kDurationLabels[i]] = s.duration_mix[i];
    j["family_count"] = s.family_count;
    j["throughput_factor_range"] = s.throughput_factor_range;
    return j;
}

inline nlohmann::json to_json(const Job& job)
{
    return {
        {"id", job.id},
        {"arrival_s", job.arrival_s},
        {"type", to_string(job.type)},
        {"num_gpu", job.num_gpu},
        {"duration_s", job.duration_s},
        {"iterations", job.iterations},
        {"model_family", job.model_family},
    };
}

inline nlohmann::json to_json(const WorkloadFile& wf)
{
    nlohmann::json j;
    j["spec"] = to_json(wf.spec);
    j["jobs"] = nlohmann::json::array();
    for (const Job& job : wf.jobs) j["jobs"].push_back(to_json(job));
    return j;
}

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& obj, const char* name, const std::string& where)
{
    if (!obj.is_object()) throw ValidationError(where + ": expected an object");
    auto it = obj.find(name);
    if (it == obj.end()) throw ValidationError(where + ": missing field \"" + name + "\"");
    return *it;
}

inline double number(const nlohmann::json& obj, const char* name, const std::string& where)
{
    const auto& v = field(obj, name, where);
    if (!v.is_number()) throw ValidationError(where + ": field \"" + name + "\" must be a number");
    return v.get<double>();
}

inline std::int64_t integer(const nlohmann::json& obj, const char* name, const std::string& where)
{
    const auto& v = field(obj, name, where);
    if (!v.is_number_integer()) throw ValidationError(where + ": field \"" + name + "\" must be an integer");
    return v.get<std::int64_t>();
}

template <std::size_t N>
std::array<double, N> mix(const nlohmann::json& obj, const char* name, const std::array<std::string_view, N>& labels,
                          const std::string& where)
{
    const auto& m = field(obj, name, where);
    std::array<double, N> out{};
    const std::string sub = where + "." + name;
    for (std::size_t i = 0; i < N; ++i) out[i] = number(m, std::string(labels[i]).c_str(), sub);
    return out;
}

}  // namespace detail

inline WorkloadSpec spec_from_json(const nlohmann::json& j)
{
    const std::string where = "spec";
    WorkloadSpec s;
    const auto n = detail::integer(j, "num_jobs", where);
    if (n < 1) throw ValidationError("spec: num_jobs must be >= 1");
    s.num_jobs = static_cast<std::size_t>(n);
    const auto& seed = detail::field(j, "seed", where);
    if (!seed.is_number_integer()) throw ValidationError("spec: field \"seed\" must be an integer");
    s.seed = seed.get<std::uint64_t>();
    s.mean_interarrival_s = detail::number(j, "mean_interarrival_s", where);
    s.type_mix = detail::mix(j, "type_mix", kTypeLabels, where);
    s.gpu_mix = detail::mix(j, "gpu_mix", kGpuLabels, where);
    s.duration_mix = detail::mix(j, "duration_mix", kDurationLabels, where);
    s.family_count = static_cast<int>(detail::integer(j, "family_count", where));
    const auto& range = detail::field(j, "throughput_factor_range", where);
    if (!range.is_array() || range.size() != 2 || !range[0].is_number() || !range[1].is_number())
        throw ValidationError("spec: throughput_factor_range must be a two-element number array");
    s.throughput_factor_range = {range[0].get<double>(), range[1].get<double>()};
    validate(s);
    return s;
}

inline Job job_from_json(const nlohmann::json& j, std::size_t index)
{
    const std::string where = "jobs[" + std::to_string(index) + "]";
    Job job;
    job.id = detail::integer(j, "id", where);
    job.arrival_s = detail::number(j, "arrival_s", where);
    const auto& type = detail::field(j, "type", where);
    if (!type.is_string()) throw ValidationError(where + ": field \"type\" must be a string");
    auto parsed = parse_job_type(type.get<std::string>());
    if (!parsed) throw ValidationError(where + ": unknown job type \"" + type.get<std::string>() + "\"");
    job.type = *parsed;
    job.num_gpu = static_cast<int>(detail::integer(j, "num_gpu", where));
    job.duration_s = detail::number(j, "duration_s", where);
    job.iterations = detail::number(j, "iterations", where);
    job.model_family = static_cast<int>(detail::integer(j, "model_family", where));
    return job;
}

inline WorkloadFile workload_from_json(const nlohmann::json& j)
{
    WorkloadFile wf;
    wf.spec = spec_from_json(detail::field(j, "spec", "workload"));
    const auto& jobs = detail::field(j, "jobs", "workload");
    if (!jobs.is_array()) throw ValidationError("workload: field \"jobs\" must be an array");
    wf.jobs.reserve(jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) wf.jobs.push_back(job_from_json(jobs[i], i));
    validate_jobs(wf.jobs);
    return wf;
}

inline nlohmann::json parse_json_text(const std::string& text, const std::string& origin)
{
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // nlohmann reports "at line L, column C" in what().
        throw ValidationError(origin + ": " + e.what());
    }
}

inline std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
    if (!out) throw ValidationError("write failed: " + path);
}

inline std::string dump_workload(const WorkloadFile& wf) { return to_json(wf).dump(2) + "\n"; }

inline void write_workload(const std::string& path, const WorkloadFile& wf) { write_text_file(path, dump_workload(wf)); }

inline WorkloadFile read_workload(const std::string& path)
{
    const auto text = read_text_file(path);
    try {
        return workload_from_json(parse_json_text(text, path));
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        if (msg.rfind(path, 0) == 0) throw;
        throw ValidationError(path + ": " + msg);
    }
}

}  // namespace gpusched

#endif  // GPUSCHED_WORKLOAD_HPP
