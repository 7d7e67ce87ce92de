#include "helixlab/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "helixlab/errors.hpp"
#include "helixlab/rng.hpp"

namespace helixlab {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kRecordHeader =
    "lambda,j,m,delta,alpha,l2_norm,linf_upper,l4_lower,interp_upper,"
    "kernel_l1,mass_capture,seed";

json to_json(const RunConfig& c) {
    json out;
    out["n"] = c.n;
    out["L"] = c.L;
    out["n_cap"] = c.n_cap;
    out["lambdas"] = c.lambdas;
    out["kernel_lambdas"] = c.kernel_lambdas;
    out["tau_lambdas"] = c.tau_lambdas;
    out["sup_lambdas"] = c.sup_lambdas;
    out["cordoba_deltas"] = c.cordoba_deltas;
    out["m_list"] = c.m_list;
    out["trials"] = c.trials;
    out["cordoba_trials"] = c.cordoba_trials;
    out["sqfn_trials"] = c.sqfn_trials;
    out["sobolev_trials"] = c.sobolev_trials;
    out["tol"] = c.tol;
    out["seed"] = c.seed;
    out["outdir"] = c.outdir;
    out["direction"] = {c.direction.x, c.direction.y, c.direction.z};
    out["rmin"] = c.rmin;
    out["rmax"] = c.rmax;
    out["rpoints"] = c.rpoints;
    return out;
}

FILE* open_csv(const RunConfig& cfg, const std::string& name,
               const std::string& header) {
    std::filesystem::create_directories(cfg.outdir);
    std::string path = cfg.outdir + "/" + name;
    FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(f, "# %s\n# config = %s\n%s\n", kVersion,
                 config_json(cfg).c_str(), header.c_str());
    return f;
}

void write_record(FILE* f, const NormRecord& r) {
    std::fprintf(f,
                 "%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%llu\n",
                 r.lambda, r.j, r.m, r.delta, r.alpha, r.l2_norm, r.linf_upper,
                 r.l4_lower, r.interp_upper, r.kernel_l1, r.mass_capture,
                 static_cast<unsigned long long>(r.seed));
}

// rethrows numeric failures with the piece context the message must carry
template <typename F>
auto with_context(double lambda, int j, int m, F&& f) {
    try {
        return f();
    } catch (const NumericFailure& e) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "lambda=%g j=%d m=%d: ", lambda, j, m);
        throw NumericFailure(std::string(buf) + e.what(), e.achieved_error);
    }
}

FrequencyBand annulus_band(double lambda) {
    FrequencyBand band;
    band.xi3_min = 0.75 * lambda;
    band.xi3_max = 2.0 * lambda;
    band.ratio_min = 0.98;
    band.ratio_max = 1.02;
    return band;
}

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

std::string config_json(const RunConfig& cfg) { return to_json(cfg).dump(); }

RunConfig load_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot read " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const std::exception& e) {
        throw std::invalid_argument("config: " + std::string(e.what()));
    }
    if (!j.is_object()) throw std::invalid_argument("config: expected an object");
    for (auto& [key, val] : j.items()) {
        if (key == "n") base.n = val.get<int>();
        else if (key == "L") base.L = val.get<double>();
        else if (key == "n_cap") base.n_cap = val.get<int>();
        else if (key == "lambdas") base.lambdas = val.get<std::vector<double>>();
        else if (key == "kernel_lambdas") base.kernel_lambdas = val.get<std::vector<double>>();
        else if (key == "tau_lambdas") base.tau_lambdas = val.get<std::vector<double>>();
        else if (key == "sup_lambdas") base.sup_lambdas = val.get<std::vector<double>>();
        else if (key == "cordoba_deltas") base.cordoba_deltas = val.get<std::vector<double>>();
        else if (key == "m_list") base.m_list = val.get<std::vector<int>>();
        else if (key == "trials") base.trials = val.get<int>();
        else if (key == "cordoba_trials") base.cordoba_trials = val.get<int>();
        else if (key == "sqfn_trials") base.sqfn_trials = val.get<int>();
        else if (key == "sobolev_trials") base.sobolev_trials = val.get<int>();
        else if (key == "tol") base.tol = val.get<double>();
        else if (key == "seed") base.seed = val.get<std::uint64_t>();
        else if (key == "outdir") base.outdir = val.get<std::string>();
        else if (key == "direction") {
            auto v = val.get<std::vector<double>>();
            if (v.size() != 3)
                throw std::invalid_argument("config: direction needs 3 components");
            base.direction = {v[0], v[1], v[2]};
        } else if (key == "rmin") base.rmin = val.get<double>();
        else if (key == "rmax") base.rmax = val.get<double>();
        else if (key == "rpoints") base.rpoints = val.get<int>();
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    return base;
}

void run_regions(const RunConfig& cfg, std::vector<FitReport>& fits) {
    FILE* csv = open_csv(cfg, "regions.csv",
                         "xi1,xi2,xi3,elliptic,oscillatory,conic_a,transition");
    const std::uint64_t key = stream_key(cfg.seed, 0.0, -10, 0, 0);
    const int npts = 10000;
    int covered = 0;
    long counts[4] = {0, 0, 0, 0};
    std::uint64_t ctr = 0;
    for (int i = 0; i < npts; ++i) {
        Vec3 xi{100.0 * (counter_uniform(key, ctr) - 0.5),
                100.0 * (counter_uniform(key, ctr + 1) - 0.5),
                100.0 * (counter_uniform(key, ctr + 2) - 0.5)};
        ctr += 3;
        RegionSet r = classify_region(xi);
        if (r.count() >= 1) ++covered;
        counts[0] += r.elliptic;
        counts[1] += r.oscillatory;
        counts[2] += r.conic_a;
        counts[3] += r.transition;
        std::fprintf(csv, "%.17g,%.17g,%.17g,%d,%d,%d,%d\n", xi.x, xi.y, xi.z,
                     int(r.elliptic), int(r.oscillatory), int(r.conic_a),
                     int(r.transition));
    }
    std::fclose(csv);
    char note[200];
    std::snprintf(note, sizeof note,
                  "every sample labeled (%d/%d); elliptic=%ld oscillatory=%ld "
                  "conic_a=%ld transition=%ld",
                  covered, npts, counts[0], counts[1], counts[2], counts[3]);
    fits.push_back({"region_cover", "-", {}, covered == npts, note});
}

void run_decay(const RunConfig& cfg, std::vector<FitReport>& fits) {
    Vec3 d = cfg.direction;
    double nd = d.norm();
    if (!(nd > 0.0)) throw std::invalid_argument("decay: zero direction");
    if (!(cfg.rmin >= 10.0 && cfg.rmax > cfg.rmin))
        throw std::invalid_argument("decay: need 10 <= rmin < rmax");
    int k = std::max(5, cfg.rpoints);
    Vec3 u = (1.0 / nd) * d;

    char name[96];
    std::snprintf(name, sizeof name, "decay_%g_%g_%g.csv", d.x, d.y, d.z);
    FILE* csv = open_csv(cfg, name, "r,abs_value,error_estimate,panels");

    const double dtol = 1e-12;  // decay probes need headroom below the tails
    std::vector<double> radii(k), values(k);
    for (int i = 0; i < k; ++i) {
        double r = cfg.rmin * std::pow(cfg.rmax / cfg.rmin, double(i) / (k - 1));
        Vec3 xi = r * u;
        MultiplierValue mv;
        try {
            mv = multiplier_quadrature(xi, Cutoff{}, dtol);
        } catch (const NumericFailure& e) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "decay at xi=(%g,%g,%g): ", xi.x, xi.y, xi.z);
            throw NumericFailure(std::string(buf) + e.what(), e.achieved_error);
        }
        radii[i] = r;
        // the true value can sit below roundoff; keep the log fit finite
        values[i] = std::max(std::abs(mv.value), 1e-250);
        std::fprintf(csv, "%.17g,%.17g,%.17g,%d\n", r, values[i],
                     mv.error_estimate, mv.panels);
    }
    std::fclose(csv);

    double rho = std::hypot(u.x, u.y) / std::fabs(u.z);  // inf when u.z == 0
    char tag[96], crit[220];
    std::snprintf(tag, sizeof tag, "decay_ray_%g_%g_%g", d.x, d.y, d.z);
    bool pass;
    ExponentFit fit;
    if (rho <= 0.99) {
        /* On an elliptic ray the symbol drops below what double-precision
         * quadrature can resolve (~1e-15) well inside [rmin, rmax].  Fit the
         * prefix of radii whose values sit clear of that floor and require
         * the rest to stay pinned at it. */
        const double trust = 1e-13;
        std::size_t nt = 0;
        while (nt < values.size() && values[nt] >= trust) ++nt;
        double tail_max = 0.0;
        for (std::size_t i = nt; i < values.size(); ++i)
            tail_max = std::max(tail_max, values[i]);
        if (nt >= 4) {
            fit = fit_exponent({radii.begin(), radii.begin() + nt},
                               {values.begin(), values.begin() + nt});
            pass = fit.slope <= -4.0 && tail_max <= 1e-12;
        } else {
            fit = fit_exponent(radii, values);
            pass = false;
        }
        std::snprintf(crit, sizeof crit,
                      "elliptic ray: slope <= -4 on the %zu radii above the "
                      "1e-13 noise floor, tail <= 1e-12 (max %.2e)",
                      nt, tail_max);
    } else if (rho >= 1.01) {
        fit = fit_exponent(radii, values);
        pass = std::fabs(fit.slope + 0.5) <= 0.05;
        std::snprintf(crit, sizeof crit,
                      "oscillatory ray: slope = -0.5 +/- 0.05 over r in [%g, %g]",
                      cfg.rmin, cfg.rmax);
    } else {
        fit = fit_exponent(radii, values);
        pass = true;
        std::snprintf(crit, sizeof crit, "conic ray: slope reported, no gate");
    }
    fits.push_back({tag, "r", fit, pass, crit});
}

void run_pieces(const RunConfig& cfg, std::vector<FitReport>& fits) {
    FILE* table = open_csv(cfg, "pieces.csv",
                           "lambda,j,delta,alpha,sectors,bookkeeping_count");
    std::vector<double> plist = cfg.lambdas;
    plist.push_back(4096.0);  // multi-band scale: band_range = (-3, 3)
    for (double lambda : plist) {
        auto [jmin, jmax] = band_range(lambda);
        for (int j = jmin; j <= jmax; ++j) {
            PieceIndex p(lambda, j, 0);
            std::fprintf(table, "%.17g,%d,%.17g,%.17g,%d,%d\n", lambda, j,
                         p.delta(), p.alpha(), p.sectors(), p.bookkeeping_count());
        }
    }
    std::fclose(table);

    FILE* part = open_csv(cfg, "partition.csv", "lambda,points,max_abs_err");
    const int npts = 10000;
    for (double lambda : plist) {
        const std::uint64_t key = stream_key(cfg.seed, lambda, -20, 0, 0);
        std::uint64_t ctr = 0;
        auto [jmin, jmax] = band_range(lambda);
        double maxerr = 0.0;
        for (int i = 0; i < npts; ++i) {
            // plateau of dyadic (xi3) times plateau of the conic collar
            double xi3 = lambda * (1.0 + 0.5 * counter_uniform(key, ctr));
            double rho = 0.985 + 0.03 * counter_uniform(key, ctr + 1);
            double theta = 2.0 * M_PI * counter_uniform(key, ctr + 2);
            ctr += 3;
            Vec3 xi{rho * xi3 * std::cos(theta), rho * xi3 * std::sin(theta), xi3};
            double sum = 0.0;
            for (int j = jmin; j <= jmax; ++j) {
                int count = sector_count(lambda, j);
                for (int m = 0; m < count; ++m)
                    sum += piece_weight(PieceIndex(lambda, j, m), xi);
            }
            maxerr = std::max(maxerr, std::fabs(sum - 1.0));
        }
        std::fprintf(part, "%.17g,%d,%.17g\n", lambda, npts, maxerr);
        char tag[64], crit[128];
        std::snprintf(tag, sizeof tag, "partition_sum_lambda_%g", lambda);
        std::snprintf(crit, sizeof crit,
                      "sum over (j, m) of piece weights = 1 +/- 1e-10; worst %.3g",
                      maxerr);
        fits.push_back({tag, "-", {}, maxerr <= 1e-10, crit});
    }
    std::fclose(part);

    // dyadic telescope across scales 2^k
    const std::uint64_t key = stream_key(cfg.seed, 0.0, -21, 0, 0);
    double maxerr = 0.0;
    for (int i = 0; i < npts; ++i) {
        double x = 2.0 * std::pow(5e5, counter_uniform(key, i));  // [2, 1e6]
        double sum = 0.0;
        for (int k = 1; k <= 21; ++k) sum += dyadic_weight(std::exp2(k), x);
        maxerr = std::max(maxerr, std::fabs(sum - 1.0));
    }
    char crit[128];
    std::snprintf(crit, sizeof crit,
                  "sum of dyadic weights over 2^k = 1 +/- 1e-12 on [2, 1e6]; worst %.3g",
                  maxerr);
    fits.push_back({"dyadic_telescope", "-", {}, maxerr <= 1e-12, crit});
}

void run_kernel(const RunConfig& cfg, std::vector<FitReport>& fits) {
    FILE* csv = open_csv(cfg, "kernel.csv", kRecordHeader);
    struct Row {
        double delta, l1;
    };
    std::vector<Row> rows;
    double min_capture = 1.0, max_c = 0.0;
    for (double lambda : cfg.kernel_lambdas) {
        /* kernel L1 and mass capture come from the sector-adapted sheared
         * lattice: it is the only domain that holds the collar needle, so
         * its numbers are converged where the cubic ones are truncated */
        PieceIndex p(lambda, 0, 0);
        KernelEstimate ke = with_context(lambda, 0, 0,
                                         [&] { return kernel_l1_sheared(p); });
        NormRecord r;
        r.lambda = lambda;
        r.j = 0;
        r.m = 0;
        r.delta = p.delta();
        r.alpha = p.alpha();
        r.l2_norm = ke.sup_symbol;
        r.linf_upper = ke.l1_norm;
        r.kernel_l1 = ke.l1_norm;
        r.mass_capture = ke.mass_capture;
        r.interp_upper = interpolation_bound(r.l2_norm, r.linf_upper);
        r.seed = cfg.seed;
        write_record(csv, r);
        rows.push_back({r.delta, ke.l1_norm});
        min_capture = std::min(min_capture, ke.mass_capture);
        max_c = std::max(max_c, ke.l1_norm / r.delta);
    }
    std::fclose(csv);

    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.delta < b.delta; });
    std::vector<double> xs, ys;
    for (const Row& r : rows) {
        xs.push_back(r.delta);
        ys.push_back(r.l1);
    }
    ExponentFit fit = fit_exponent(xs, ys);
    char crit[160];
    std::snprintf(crit, sizeof crit,
                  "kernel L1 ~ delta: slope = 1 +/- 0.2; max l1/delta C = %.4g",
                  max_c);
    fits.push_back({"kernel_l1_vs_delta", "delta", fit,
                    std::fabs(fit.slope - 1.0) <= 0.2, crit});
    std::snprintf(crit, sizeof crit,
                  "mass capture >= 0.95 on every kernel grid; worst %.4f", min_capture);
    fits.push_back({"kernel_mass_capture", "-", {}, min_capture >= 0.95, crit});
}

void run_norms(const RunConfig& cfg, std::vector<FitReport>& fits) {
    FILE* csv = open_csv(cfg, "norms.csv", kRecordHeader);
    std::vector<NormRecord> central;  // j = 0, m = 0 rows, lambda ascending
    bool interp_ok = true;
    double worst_gap = 0.0;
    int knapp_best = 0, probes = 0;
    std::vector<double> lam_sorted = sorted_unique(cfg.lambdas);
    for (double lambda : lam_sorted) {
        /* norm brackets need the kernel L1 and the focusing box, both of
         * which require the collar resolved, hence the lambda-matched grid */
        GridSpec g = collar_grid(lambda);
        auto [jmin, jmax] = band_range(lambda);
        for (int j = jmin; j <= jmax; ++j)
            for (int m : cfg.m_list) {
                PieceIndex p(lambda, j, m);
                L4Probe probe;
                NormRecord r = with_context(lambda, j, m, [&] {
                    return compute_norm_record(p, g, cfg.trials, cfg.seed,
                                               cfg.tol, &probe);
                });
                write_record(csv, r);
                ++probes;
                knapp_best += probe.knapp_best;
                worst_gap = std::max(worst_gap,
                                     r.l4_lower / std::max(r.interp_upper, 1e-300));
                if (r.l4_lower > 1.05 * r.interp_upper) interp_ok = false;
                if (j == 0 && m == 0) central.push_back(r);
            }
    }
    std::fclose(csv);

    char crit[200];
    std::snprintf(crit, sizeof crit,
                  "l4_lower <= 1.05 * interp_upper on all %d pieces; worst ratio %.4f",
                  probes, worst_gap);
    fits.push_back({"interp_consistency", "-", {}, interp_ok, crit});
    std::snprintf(crit, sizeof crit,
                  "focusing field beats random draws on %d/%d pieces (want >= 80%%)",
                  knapp_best, probes);
    fits.push_back({"knapp_focusing", "-", {}, knapp_best * 5 >= probes * 4, crit});

    /* interpolation-bound exponents.  delta is slaved to lambda at these
     * scales (j = 0 only), so the two exponents are fitted as partials:
     * remove the conjectured delta^{1/4} part and fit against lambda, then
     * remove lambda^{-1/4} and fit against delta. */
    if (central.size() >= 4) {
        std::vector<double> xs, ys;
        for (const NormRecord& r : central) {
            xs.push_back(r.lambda);
            ys.push_back(r.interp_upper / std::pow(r.delta, 0.25));
        }
        ExponentFit f1 = fit_exponent(xs, ys);
        fits.push_back({"interp_vs_lambda", "lambda", f1,
                        std::fabs(f1.slope + 0.25) <= 0.1,
                        "interp/delta^{1/4} ~ lambda^{-1/4}: slope = -0.25 +/- 0.1"});
        xs.clear();
        ys.clear();
        for (auto it = central.rbegin(); it != central.rend(); ++it) {
            xs.push_back(it->delta);
            ys.push_back(it->interp_upper * std::pow(it->lambda, 0.25));
        }
        ExponentFit f2 = fit_exponent(xs, ys);
        fits.push_back({"interp_vs_delta", "delta", f2,
                        std::fabs(f2.slope - 0.25) <= 0.1,
                        "interp*lambda^{1/4} ~ delta^{1/4}: slope = +0.25 +/- 0.1"});
    }

    /* transfer-sup sweep at the large scales; no fields are allocated, so
     * the lattice can reach far beyond the FFT experiments */
    {
        const GridSpec sup_grid(1024, 4.0);
        FILE* sup = open_csv(cfg, "norms_sup.csv", "lambda,delta,lambda_delta,l2_norm");
        std::vector<double> xs, ys;
        for (double lambda : sorted_unique(cfg.sup_lambdas)) {
            PieceIndex p(lambda, 0, 0);
            double v = with_context(lambda, 0, 0,
                                    [&] { return norm_l2(p, sup_grid, cfg.tol); });
            std::fprintf(sup, "%.17g,%.17g,%.17g,%.17g\n", lambda, p.delta(),
                         lambda * p.delta(), v);
            xs.push_back(lambda * p.delta());
            ys.push_back(v);
        }
        std::fclose(sup);
        ExponentFit fit = fit_exponent(xs, ys);
        fits.push_back({"l2_vs_lambda_delta", "lambda*delta", fit,
                        std::fabs(fit.slope + 0.5) <= 0.1,
                        "transfer sup ~ (lambda*delta)^{-1/2}: slope = -0.5 +/- 0.1"});
    }

    // whole dyadic block, L4 lower bounds
    {
        FILE* sl = open_csv(cfg, "slambda.csv", "lambda,l4_lower");
        std::vector<double> xs, ys;
        for (double lambda : lam_sorted) {
            // same grids as the records above, so the shells are shared
            GridSpec g = collar_grid(lambda);
            double v = with_context(lambda, -1, 0, [&] {
                return slambda_norm_l4_lower(lambda, g, cfg.trials, cfg.seed, cfg.tol);
            });
            std::fprintf(sl, "%.17g,%.17g\n", lambda, v);
            xs.push_back(lambda);
            ys.push_back(v);
        }
        std::fclose(sl);
        ExponentFit fit = fit_exponent(xs, ys);
        fits.push_back({"slambda_l4_vs_lambda", "lambda", fit,
                        fit.slope <= -1.0 / 6.0 + 0.05,
                        "block L4 lower bound: slope <= -1/6 + 0.05 "
                        "(the tau/3 improvement is reported, not gated)"});
    }
}

void run_sqfn(const RunConfig& cfg, std::vector<FitReport>& fits) {
    // angular square function on broadband fields
    GridSpec g(cfg.n, cfg.L);
    FrequencyBand band;
    band.abs_min = 2.0;
    band.abs_max = 0.85 * g.nyquist();
    FILE* csv = open_csv(cfg, "cordoba.csv", "delta,count,max_ratio");
    std::vector<std::pair<double, double>> pts;
    for (double delta : cfg.cordoba_deltas) {
        double best = 0.0;
        for (int t = 0; t < cfg.cordoba_trials; ++t) {
            auto rf = random_test_field(g, band, stream_key(cfg.seed, delta, -4, 0, t));
            if (rf.empty_band) continue;
            best = std::max(best, cordoba_ratio(delta, g, rf.field));
        }
        int count = std::max(1, int(std::lround(2.0 * M_PI / delta)));
        std::fprintf(csv, "%.17g,%d,%.17g\n", delta, count, best);
        pts.push_back({delta, best});
    }
    std::fclose(csv);
    std::sort(pts.begin(), pts.end());
    std::vector<double> xs, ys;
    for (auto [x, y] : pts) {
        xs.push_back(x);
        ys.push_back(y);
    }
    ExponentFit fit = fit_exponent(xs, ys);
    fits.push_back({"cordoba_vs_delta", "delta", fit, fit.slope >= -0.05,
                    "sector square function grows at most logarithmically: "
                    "slope >= -0.05"});

    // Cauchy-Schwarz ceilings, spot-checked on the two smallest tau scales
    FILE* sq = open_csv(cfg, "sqfn.csv",
                        "lambda,j,trial,lhs,rhs,cs_margin,pointwise_max");
    double worst_cs = 0.0, worst_pw = 0.0;
    int nlam = std::min<std::size_t>(2, cfg.tau_lambdas.size());
    for (int li = 0; li < nlam; ++li) {
        double lambda = cfg.tau_lambdas[li];
        GridSpec g2 = grid_for_lambda(lambda, cfg.L, 64, cfg.n_cap);
        FrequencyBand fb = annulus_band(lambda);
        for (int t = 0; t < cfg.sqfn_trials; ++t) {
            auto rf = random_test_field(g2, fb,
                                        stream_key(cfg.seed, lambda, -6, 0, t));
            if (rf.empty_band) continue;
            SquareFunctionResult res = with_context(lambda, 0, -1, [&] {
                return square_function_ratio(lambda, 0, g2, rf.field, cfg.tol);
            });
            std::fprintf(sq, "%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g\n", lambda, 0,
                         t, res.lhs, res.rhs, res.cs_margin, res.pointwise_max);
            worst_cs = std::max(worst_cs, res.cs_margin);
            worst_pw = std::max(worst_pw, res.pointwise_max);
        }
    }
    std::fclose(sq);
    char crit[200];
    std::snprintf(crit, sizeof crit,
                  "lhs <= sqrt(count)*rhs and pointwise Cauchy-Schwarz, both "
                  "within 1+1e-10; worst %.12f / %.12f",
                  worst_cs, worst_pw);
    fits.push_back({"sqfn_ceiling", "-", {},
                    worst_cs <= 1.0 + 1e-10 && worst_pw <= 1.0 + 1e-10, crit});
}

void run_tau(const RunConfig& cfg, std::vector<FitReport>& fits) {
    std::vector<std::pair<double, int>> sweep;
    for (double lambda : sorted_unique(cfg.tau_lambdas)) sweep.push_back({lambda, 0});
    TauEstimate est = tau_estimate(sweep, cfg.L, cfg.trials, cfg.seed, cfg.tol);

    FILE* csv = open_csv(cfg, "tau.csv",
                         "lambda,j,delta,max_ratio,cs_margin,pointwise_max");
    double worst_cs = 0.0;
    for (const TauPoint& pt : est.points) {
        std::fprintf(csv, "%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", pt.lambda, pt.j,
                     pt.delta, pt.max_ratio, pt.cs_margin, pt.pointwise_max);
        worst_cs = std::max(worst_cs, pt.cs_margin);
    }
    std::fclose(csv);

    char crit[220];
    std::snprintf(crit, sizeof crit,
                  "empirical lower-envelope estimate: tau_hat = %.4f, sigma_hat "
                  "= tau_hat/3 = %.4f; gate: slope in [-0.30, 0]",
                  est.tau_hat, est.sigma_hat);
    fits.push_back({"tau_ratio_vs_delta", "delta", est.fit,
                    est.fit.slope >= -0.30 && est.fit.slope <= 0.0, crit});
    std::snprintf(crit, sizeof crit,
                  "Cauchy-Schwarz ceiling on every tau run; worst margin %.12f",
                  worst_cs);
    fits.push_back({"tau_ceiling", "-", {}, worst_cs <= 1.0 + 1e-10, crit});
}

void run_sobolev(const RunConfig& cfg, std::vector<FitReport>& fits) {
    FILE* csv = open_csv(cfg, "sobolev.csv", "lambda,l4_ratio,sobolev_ratio");
    std::vector<double> xs, ys;
    for (double lambda : sorted_unique(cfg.lambdas)) {
        GridSpec g = grid_for_lambda(lambda, cfg.L, 64, cfg.n_cap);
        auto weight = [lambda](Vec3 xi) {
            double w = conic_A_weight(xi);
            if (w == 0.0) return 0.0;
            return w * dyadic_weight(lambda, xi.z);
        };
        SampledMultiplier s = with_context(lambda, -1, 0, [&] {
            return sample_multiplier(g, weight, cfg.tol, 0.75 * lambda, 2.0 * lambda);
        });
        FrequencyBand band = annulus_band(lambda);
        double best4 = 0.0, bestS = 0.0;
        for (int t = 0; t < cfg.sobolev_trials; ++t) {
            auto rf = random_frequency_field(g, band,
                                             stream_key(cfg.seed, lambda, -5, 0, t));
            if (rf.empty_band) continue;
            SpectralField f = rf.field;
            inverse_transform(f);
            SpectralField sf(g, Rep::Frequency);
            for (std::size_t i = 0; i < s.index.size(); ++i)
                sf.data[s.index[i]] = s.value[i] * rf.field.data[s.index[i]];
            inverse_transform(sf);
            double num = lp_norm(sf, 4.0);
            double den4 = lp_norm(f, 4.0);
            double denS = sobolev_norm(f, 1.0 / 6.0, 4.0);
            if (den4 > 0.0) best4 = std::max(best4, num / den4);
            if (denS > 0.0) bestS = std::max(bestS, num / denS);
        }
        std::fprintf(csv, "%.17g,%.17g,%.17g\n", lambda, best4, bestS);
        xs.push_back(lambda);
        ys.push_back(bestS);
    }
    std::fclose(csv);
    ExponentFit fit = fit_exponent(xs, ys);
    fits.push_back({"sobolev_l4_vs_lambda", "lambda", fit, fit.slope <= 0.05,
                    "L4 ratio against the (1/6)-derivative-smoothed source "
                    "stays bounded: slope <= 0.05"});
}

void write_fits_csv(const RunConfig& cfg, const std::vector<FitReport>& fits) {
    FILE* f = open_csv(cfg, "fits.csv",
                       "experiment,x_name,slope,intercept,max_residual,n_points,pass");
    for (const FitReport& r : fits)
        std::fprintf(f, "%s,%s,%.17g,%.17g,%.17g,%d,%d\n", r.experiment.c_str(),
                     r.x_name.c_str(), r.fit.slope, r.fit.intercept,
                     r.fit.max_residual, r.fit.n_points, int(r.pass));
    std::fclose(f);
}

namespace {

const char* region_name(Region r) {
    switch (r) {
        case Region::Elliptic: return "Elliptic";
        case Region::Oscillatory: return "Oscillatory";
        case Region::ConicA: return "ConicA";
        default: return "Transition";
    }
}

void print_fit_lines(const std::vector<FitReport>& fits) {
    int passed = 0;
    for (const FitReport& r : fits) {
        if (r.x_name == "-")
            std::printf("[%s] %-24s %s\n", r.pass ? "PASS" : "FAIL",
                        r.experiment.c_str(), r.criterion.c_str());
        else
            std::printf("[%s] %-24s slope(%s) = %+.4f (resid %.2e, n=%d) | %s\n",
                        r.pass ? "PASS" : "FAIL", r.experiment.c_str(),
                        r.x_name.c_str(), r.fit.slope, r.fit.max_residual,
                        r.fit.n_points, r.criterion.c_str());
        passed += r.pass;
    }
    std::printf("%d checks, %d passed\n", int(fits.size()), passed);
}

}  // namespace

int run_cli(int argc, char** argv) {
    RunConfig cfg;
    if (const char* env = std::getenv("HELIXLAB_OUTDIR")) cfg.outdir = env;

    // the config file loads first so that explicit flags win
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) config_path = argv[i + 1];
        else if (a.rfind("--config=", 0) == 0) config_path = a.substr(9);
    }
    try {
        if (!config_path.empty()) cfg = load_config(config_path, cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    CLI::App app{"helix-averaging multiplier laboratory"};
    app.fallthrough();
    app.require_subcommand(1);
    std::string config_dummy;
    app.add_option("--config", config_dummy, "JSON config file (loaded before flags)");
    app.add_option("--outdir", cfg.outdir, "output directory");
    app.add_option("--seed", cfg.seed, "base seed for every random stream");
    app.add_option("--trials", cfg.trials, "random fields per Rayleigh probe");
    app.add_option("--cordoba-trials", cfg.cordoba_trials, "fields per sector sweep");
    app.add_option("--tol", cfg.tol, "symbol quadrature tolerance");
    app.add_option("--n", cfg.n, "grid points per axis (fixed-grid runs)");
    app.add_option("--L", cfg.L, "torus side length");
    app.add_option("--n-cap", cfg.n_cap, "largest auto-sized grid");
    app.add_option("--lambdas", cfg.lambdas, "field-experiment scales")->delimiter(',');
    app.add_option("--kernel-lambdas", cfg.kernel_lambdas, "kernel sweep scales")
        ->delimiter(',');
    app.add_option("--tau-lambdas", cfg.tau_lambdas, "tau sweep scales")->delimiter(',');
    app.add_option("--sup-lambdas", cfg.sup_lambdas, "transfer-sup sweep scales")
        ->delimiter(',');
    app.add_option("--m-list", cfg.m_list, "sector indices per (lambda, j)")
        ->delimiter(',');

    auto* regions = app.add_subcommand("regions", "label sampled frequencies");
    std::vector<double> xi_flag;
    regions->add_option("--xi", xi_flag, "classify one frequency and exit")
        ->delimiter(',')
        ->expected(3);

    auto* decay = app.add_subcommand("decay", "|symbol| decay along one ray");
    std::vector<double> dir_flag;
    decay->add_option("--direction", dir_flag, "ray direction x,y,z")
        ->delimiter(',')
        ->expected(3);
    decay->add_option("--rmin", cfg.rmin, "smallest radius (>= 10)");
    decay->add_option("--rmax", cfg.rmax, "largest radius");
    decay->add_option("--points", cfg.rpoints, "radii count (log-spaced)");

    auto* pieces = app.add_subcommand("pieces", "partition-of-unity checks");
    auto* kernel = app.add_subcommand("kernel", "kernel L1 sweep");
    auto* norms = app.add_subcommand("norms", "operator-norm bracket sweep");
    auto* sqfn = app.add_subcommand("sqfn", "square-function experiments");
    auto* tau = app.add_subcommand("tau", "square-function exponent estimate");
    auto* sobolev = app.add_subcommand("sobolev", "smoothing-vs-scale table");
    auto* all = app.add_subcommand("all", "every experiment");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    std::vector<FitReport> fits;
    try {
        if (regions->parsed()) {
            if (xi_flag.size() == 3) {
                RegionSet r = classify_region({xi_flag[0], xi_flag[1], xi_flag[2]});
                std::string out;
                for (Region reg : {Region::Elliptic, Region::Oscillatory,
                                   Region::ConicA, Region::Transition})
                    if (r.contains(reg)) {
                        if (!out.empty()) out += "+";
                        out += region_name(reg);
                    }
                std::printf("%s\n", out.c_str());
                return 0;
            }
            run_regions(cfg, fits);
        } else if (decay->parsed()) {
            if (dir_flag.size() == 3)
                cfg.direction = {dir_flag[0], dir_flag[1], dir_flag[2]};
            run_decay(cfg, fits);
        } else if (pieces->parsed()) {
            run_pieces(cfg, fits);
        } else if (kernel->parsed()) {
            run_kernel(cfg, fits);
        } else if (norms->parsed()) {
            run_norms(cfg, fits);
        } else if (sqfn->parsed()) {
            run_sqfn(cfg, fits);
        } else if (tau->parsed()) {
            run_tau(cfg, fits);
        } else if (sobolev->parsed()) {
            run_sobolev(cfg, fits);
        } else if (all->parsed()) {
            run_regions(cfg, fits);
            for (Vec3 ray : {Vec3{0.5, 0.0, 1.0}, Vec3{1.5, 0.0, 1.0}, Vec3{2.0, 0.0, 1.0}}) {
                RunConfig ray_cfg = cfg;
                ray_cfg.direction = ray;
                run_decay(ray_cfg, fits);
            }
            run_pieces(cfg, fits);
            run_kernel(cfg, fits);
            run_norms(cfg, fits);
            run_sqfn(cfg, fits);
            run_tau(cfg, fits);
            run_sobolev(cfg, fits);
        }
        write_fits_csv(cfg, fits);
        print_fit_lines(fits);
        return 0;
    } catch (const NumericFailure& e) {
        std::fprintf(stderr, "numeric failure: %s (achieved error %.3g)\n",
                     e.what(), e.achieved_error);
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace helixlab
