#pragma once

#include "varbound/fem.hpp"
#include "varbound/legendre.hpp"
#include "varbound/omr.hpp"
#include "varbound/pdr.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace varbound::cli {

/// Raised when a computation finishes without a usable answer (exit 1).
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string verb;
    std::filesystem::path input;  // problem file, or measure file for verify-measure
    std::string grid_overrides;   // "key=value,..." over the [grid] section
    std::optional<int> phi_degree;
    std::optional<int> h_degree;
    std::optional<double> radius;
    std::optional<double> tol;
    std::uint64_t seed = 20240917;
    bool exact = false;
    std::filesystem::path out = "varbound-out";
    std::optional<int> elements;
    std::optional<int> multistart;
    std::optional<int> refine;
    bool convexify = false;
    bool dump = false;
    std::filesystem::path data_dir;
    std::vector<std::string> argv;
};

/// A problem file with its optional [grid], [omr], [pdr], [sharp] and
/// [upper] sections.
struct LoadedProblem {
    std::filesystem::path path;
    KeyValueDocument doc;
    ExactProblem exact;
    VariationalProblem problem;
    GridSpec grid;
};

LoadedProblem load_problem_file(const std::filesystem::path& path, const RunConfig& config);

struct OmrSettings {
    int phi_degree = 4;
    int h_degree = 4;
};

/// Settings from the file section, then command-line overrides.
OmrSettings omr_settings(const LoadedProblem& lp, const RunConfig& config);
PdrOptions pdr_settings(const LoadedProblem& lp, const RunConfig& config);
SharpOptions sharp_settings(const LoadedProblem& lp, const RunConfig& config);

struct UpperSettings {
    int elements = 64;
    int refine = 1;  // levels: elements, 2 elements, ...
    FeOptions fe;
};

UpperSettings upper_settings(const LoadedProblem& lp, const RunConfig& config);

struct OmrOutcome {
    OmrSettings settings;
    OmrResult result;
    ExtractedMeasure extracted;
};

OmrOutcome run_omr(const LoadedProblem& lp, const RunConfig& config);
PdrResult run_pdr(const LoadedProblem& lp, const RunConfig& config);

struct SharpOutcome {
    DualFieldPair fields;
    DualCertificate certificate;
};

SharpOutcome run_sharp(const LoadedProblem& lp, const RunConfig& config);
std::vector<FeSolution> run_upper(const LoadedProblem& lp, const RunConfig& config);

struct VerifyOutcome {
    ExactProblem problem;
    int phi_degree = 0;
    MembershipReport<Surd> report;
    bool exact_zero = false;
    double max_residual = 0.0;
    bool passed = false;
};

VerifyOutcome run_verify_measure(const std::filesystem::path& file, const RunConfig& config);

struct SandwichOutcome {
    FeSolution upper;
    OmrOutcome omr;
    PdrResult pdr;
    SandwichReport report;
};

SandwichOutcome run_sandwich(const LoadedProblem& lp, const RunConfig& config);

/// Shortest round-trip text of a double; "nan"/"inf" spelled out.
std::string number(double v);

/// Minimal CSV table.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
    std::string csv() const;
    std::string pretty() const;
};

struct Artifact {
    std::string name;  // file name inside the output directory
    std::string body;
};

struct VerbResult {
    int status = 0;  // 0 success, 1 numerical failure
    std::string summary;
    std::vector<Artifact> artifacts;
};

/// Runs one verb; throws InputError / std::invalid_argument for input errors
/// and NumericalFailure for failed computations.
VerbResult run(const RunConfig& config);

/// Writes the artifacts and manifest.json into config.out.
void write_outputs(const RunConfig& config, const VerbResult& result, const std::string& started_utc);

std::string utc_now();

}  // namespace varbound::cli
