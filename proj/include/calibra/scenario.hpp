#ifndef CALIBRA_SCENARIO_HPP
#define CALIBRA_SCENARIO_HPP

#include "calibra/chain.hpp"
#include "calibra/constructions.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace calibra::cli {

using nlohmann::json;

// exit codes of the scenario runner
inline constexpr int kExitOk = 0;         // expected outcome reached
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitInputError = 3;

struct RunOptions {
    std::string out_dir = "out";
    Scalar tolerance_scale = 1;
    std::uint64_t seed_override = 0; // 0 -> use the scenario seed
};

struct RunResult {
    int exit_code = kExitInputError;
    json report;
    std::string error; // set for input errors
};

/// Everything a certificate scenario needs: the field, its target candidate,
/// the competitor region, functional parameters and expectations.
struct CertificateSetup {
    std::optional<LiftedField> field;
    std::optional<SbvCandidate> candidate;
    GraphDomain U = GraphDomain::full_cylinder();
    MumfordShahParams params;
    VerifyMode mode = VerifyMode::Dirichlet;
    bool feasible = true;
    Scalar feasibility_margin = 0;
    std::string note;
    Scalar interface_tol = 0; // 0 -> verifier default
    std::optional<std::pair<Scalar, Scalar>> t_window;
    Scalar fuzz_amplitude = 0.2; // safe corridor for competitor heights
    json extra;                  // construction-specific audit fields
};

struct CatalogEntry {
    std::string name;
    std::string summary;
    json parameters; // {"param": "description (default ...)"}
    std::function<CertificateSetup(const json& params)> build;
};

const std::vector<CatalogEntry>& catalog();
const CatalogEntry* find_construction(const std::string& name);

/// Executes a scenario document: construct -> verify -> oracle cross-check ->
/// optional competitor fuzz -> optional flow, writing the report and any
/// requested CSV dumps under opts.out_dir.
RunResult run_scenario(const json& doc, const RunOptions& opts);
RunResult run_scenario_file(const std::string& path, const RunOptions& opts);

std::string verdict_name(Verdict v);

} // namespace calibra::cli

#endif
