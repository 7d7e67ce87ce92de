#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "helixlab/estimator.hpp"

namespace helixlab {

inline constexpr const char* kVersion = "helixlab 1.0.0";

/* Batch-run configuration: defaults here, then the JSON config file, then
 * command-line flags, each layer overriding the previous.  Unknown config
 * keys are rejected. */
struct RunConfig {
    int n = 128;      // grid for the fixed-grid experiments (sector square functions)
    double L = 8.0;   // box size; the physical kernel has diameter ~7
    int n_cap = 512;  // auto-sized grids refuse to grow beyond this

    std::vector<double> lambdas = {8, 12, 16, 24, 32, 48};  // field experiments
    // sheared-kernel sweep; 64 works too at roughly 2 extra minutes
    std::vector<double> kernel_lambdas = {8, 12, 16, 24, 32, 48};
    std::vector<double> tau_lambdas = {8, 12, 16, 24};
    std::vector<double> sup_lambdas = {32, 64, 128, 256};  // transfer-sup sweep
    std::vector<double> cordoba_deltas = {0.25, 0.125, 0.0625, 0.03125};
    std::vector<int> m_list = {0, 1};

    int trials = 20;         // random fields per Rayleigh probe / tau point
    int cordoba_trials = 6;  // each costs one inverse FFT per sector
    int sqfn_trials = 4;     // ceiling property spot checks
    int sobolev_trials = 4;

    double tol = 1e-8;  // absolute symbol-quadrature tolerance in sweeps
    std::uint64_t seed = 20250815;
    std::string outdir = "out";

    /* decay subcommand.  25 radii so that on rapidly decaying rays enough of
     * them land above the quadrature noise floor to support a fit. */
    Vec3 direction{1.5, 0.0, 1.0};
    double rmin = 100.0;
    double rmax = 10000.0;
    int rpoints = 25;
};

// parses JSON at `path` over `base`; unknown keys -> std::invalid_argument
RunConfig load_config(const std::string& path, RunConfig base = {});

// resolved configuration as one line of JSON (embedded in every output)
std::string config_json(const RunConfig& cfg);

/* One fitted (or directly checked) quantity with its verdict.  For checks
 * that are not regressions the fit fields stay zero and x_name is "-". */
struct FitReport {
    std::string experiment;
    std::string x_name;
    ExponentFit fit;
    bool pass = false;
    std::string criterion;
};

/* Experiment drivers.  Each writes its CSVs under cfg.outdir and appends
 * one FitReport per gated quantity.  Numeric failures are rethrown with the
 * (lambda, j, m) or xi context prepended. */
void run_regions(const RunConfig& cfg, std::vector<FitReport>& fits);
void run_decay(const RunConfig& cfg, std::vector<FitReport>& fits);
void run_pieces(const RunConfig& cfg, std::vector<FitReport>& fits);
void run_kernel(const RunConfig& cfg, std::vector<FitReport>& fits);
void run_norms(const RunConfig& cfg, std::vector<FitReport>& fits);
void run_sqfn(const RunConfig& cfg, std::vector<FitReport>& fits);
void run_tau(const RunConfig& cfg, std::vector<FitReport>& fits);
void run_sobolev(const RunConfig& cfg, std::vector<FitReport>& fits);

void write_fits_csv(const RunConfig& cfg, const std::vector<FitReport>& fits);

// exit code 0 = ran, 1 = validation/usage error, 2 = numeric failure
int run_cli(int argc, char** argv);

}  // namespace helixlab
