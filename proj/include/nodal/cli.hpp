#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nodal/estimators.hpp"
#include "nodal/oracle.hpp"

namespace nodal::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kDegenerate = 2,
    kNumerical = 3,  // non-finite values, oracle not converging, or compare tolerance exceeded
};

struct RunConfig {
    std::string manifold;
    std::string field;       // inline spec or JSON
    std::string field_file;
    std::vector<std::string> estimators;
    std::vector<std::string> resolutions;  // "N" or "NxM"
    std::string oracle_resolution;         // "0" disables the oracle
    double tol = 1e-2;
    std::string out;                        // CSV path, "-" for stdout
    std::string dump;                       // oracle primitive dump path
    bool has_seed = false;
    std::uint64_t seed = 0;
    bool timing = true;
};

std::vector<int> parse_resolution(const std::string& text);
std::string format_resolution(const std::vector<int>& resolution);
std::vector<int> default_resolution(const Manifold& m);
std::vector<int> default_oracle_resolution(const Manifold& m);

inline constexpr const char* kEstimateHeader =
    "estimator,manifold,rule,resolution,value,min_eta,integrand_min,integrand_max,node_count,zero_nodes,runtime_ms";
inline constexpr const char* kCompareHeader =
    "estimator,manifold,rule,resolution,value,reference,rel_dev,min_eta,integrand_min,integrand_max,node_count,zero_nodes,runtime_ms";
inline constexpr const char* kConvergeHeader =
    "formula,resolution,estimate,abs_err_vs_oracle,integrand_max,min_eta,runtime_ms";
inline constexpr const char* kOracleHeader = "method,manifold,resolution,value,component_hint";

/// One CSV row (no trailing newline) in the kEstimateHeader schema.
std::string csv_row(const EstimateReport& r, bool timing = true);
std::string csv_row(const OracleReport& r, const std::string& manifold);

int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_converge(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_oracle(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command-line entry point; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nodal::cli
