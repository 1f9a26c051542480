/// \file pipelines.hpp
/// \brief The four verification pipelines behind the command-line subcommands.
#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "nsfk/config.hpp"

namespace nsfk {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode { kExitPass = 0, kExitCriterion = 1, kExitUsage = 2 };

struct Criterion {
    std::string name;
    bool passed = false;
    double observed = 0;
    double tolerance = 0;
    /// Signed distance to the threshold; positive when the check passes.
    double margin = 0;
    std::string detail;
};

/// A CSV file produced by a pipeline; cells are already formatted.
struct CsvTable {
    std::string file;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string render() const;
};

struct PipelineOptions {
    std::string out_dir = ".";
    bool quiet = false;
};

struct PipelineResult {
    std::string subcommand;
    std::vector<Criterion> criteria;
    nlohmann::ordered_json values;
    std::vector<CsvTable> tables;
    std::string summary;

    bool passed() const;
    int exit_code() const { return passed() ? kExitPass : kExitCriterion; }
};

/// Criterion "observed <= tolerance".
Criterion at_most(std::string name, double observed, double tolerance, std::string detail = {});
/// Criterion "observed >= tolerance".
Criterion at_least(std::string name, double observed, double tolerance, std::string detail = {});
/// Criterion "|observed - target| <= tolerance"; the target goes in detail.
Criterion within(std::string name, double observed, double target, double tolerance);

PipelineResult verify_thermo(const RunConfig& cfg);
PipelineResult analyze_symbol(const RunConfig& cfg);
PipelineResult linear_decay(const RunConfig& cfg);
PipelineResult nonlinear_run(const RunConfig& cfg);

/// Runs a subcommand end to end and writes its CSV files, <subcommand>.json and
/// <subcommand>.txt into opt.out_dir. Returns the process exit code.
int run_subcommand(const std::string& name, const RunConfig& cfg, const PipelineOptions& opt);

/// %.17g formatting shared by every CSV writer.
std::string csv_number(double v);

}  // namespace nsfk
