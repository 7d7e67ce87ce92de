#include "helixlab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <tuple>

#include "helixlab/rng.hpp"

namespace helixlab {

namespace {

/* The focusing box is one lower-bound probe among several; on a lattice too
 * coarse to host it (knapp_field throws) the probe is simply lost and the
 * maximum over the remaining probes stands. */
std::optional<SpectralField> try_knapp(const PieceIndex& p, GridSpec g) {
    try {
        return knapp_field(p, g);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

/* Sector-free part of the (lambda, j) family on one grid: the product
 * conic * dyadic * band * symbol at every lattice point where it is nonzero,
 * plus the polar angle there.  Any sector m is then a cheap reweighting, so
 * one quadrature pass serves every sector, trial and sweep.  Guarded cache,
 * keyed by (n, L, lambda, j, tol). */
struct Shell {
    GridSpec grid;
    double lambda;
    int j;
    int count;
    std::vector<std::size_t> index;
    std::vector<double> theta;
    std::vector<std::complex<double>> base;
};

std::mutex shell_mutex;
std::map<std::tuple<int, double, double, int, double>, std::shared_ptr<const Shell>>
    shell_cache;

std::shared_ptr<const Shell> get_shell(GridSpec g, double lambda, int j, double tol) {
    auto key = std::make_tuple(g.n, g.L, lambda, j, tol);
    {
        std::lock_guard<std::mutex> lock(shell_mutex);
        auto it = shell_cache.find(key);
        if (it != shell_cache.end()) return it->second;
    }
    if (piece_frequency_extent(lambda) > g.nyquist() - g.freq_step())
        throw std::invalid_argument("estimator: piece support exceeds Nyquist");

    auto shell = std::make_shared<Shell>(
        Shell{g, lambda, j, sector_count(lambda, j), {}, {}, {}});
    const double h = g.freq_step();
    const int n = g.n;
    for (int k3 = 0; k3 < n; ++k3) {
        double xi3 = h * g.signed_index(k3);
        if (xi3 <= 0.75 * lambda || xi3 >= 2.0 * lambda) continue;
        for (int k1 = 0; k1 < n; ++k1)
            for (int k2 = 0; k2 < n; ++k2) {
                Vec3 xi = g.xi(k1, k2, k3);
                double w = conic_A_weight(xi);
                if (w == 0.0) continue;
                w *= dyadic_weight(lambda, xi.z);
                if (w == 0.0) continue;
                w *= band_weight(lambda, j, xi);
                if (w == 0.0) continue;
                std::complex<double> v =
                    w * multiplier_quadrature(xi, Cutoff{}, tol).value;
                shell->index.push_back(g.flat(k1, k2, k3));
                shell->theta.push_back(std::atan2(xi.y, xi.x));
                shell->base.push_back(v);
            }
    }
    std::lock_guard<std::mutex> lock(shell_mutex);
    auto [it, inserted] = shell_cache.emplace(key, shell);
    return it->second;
}

SampledMultiplier assemble_sector(const Shell& shell, int m) {
    SampledMultiplier s(shell.grid);
    for (std::size_t i = 0; i < shell.index.size(); ++i) {
        double w = sector_profile(shell.count, m, shell.theta[i]);
        if (w == 0.0) continue;
        std::complex<double> v = w * shell.base[i];
        s.index.push_back(shell.index[i]);
        s.value.push_back(v);
        double a = std::abs(v);
        if (a > s.sup_abs) s.sup_abs = a;
    }
    return s;
}

// support window of the (lambda, j, m) piece for random test-field draws
FrequencyBand piece_band(const PieceIndex& p) {
    FrequencyBand band;
    band.xi3_min = 0.75 * p.lambda;
    band.xi3_max = 2.0 * p.lambda;
    band.ratio_min = 0.98;
    band.ratio_max = 1.02;
    double aperture = 2.0 * M_PI / p.sectors();
    band.theta_center = p.m * aperture;
    band.theta_half = 0.75 * aperture;
    return band;
}

// the dyadic/conic annulus without the angular restriction
FrequencyBand family_band(double lambda) {
    FrequencyBand band;
    band.xi3_min = 0.75 * lambda;
    band.xi3_max = 2.0 * lambda;
    band.ratio_min = 0.98;
    band.ratio_max = 1.02;
    return band;
}

/* Shared accumulation for square-function comparisons: fill(m, work) writes
 * the frequency coefficients of g_m into `work` and reports whether any are
 * nonzero (an exactly-zero g_m contributes nothing, so its transform is
 * skipped). */
SquareFunctionResult accumulate_square_function(
    GridSpec g, int count,
    const std::function<bool(int, SpectralField&)>& fill) {
    const std::size_t N = g.points();
    std::vector<std::complex<double>> sum(N);
    std::vector<double> sumsq(N, 0.0), sum4(N, 0.0);
    SpectralField work(g, Rep::Frequency);
    for (int m = 0; m < count; ++m) {
        std::fill(work.data.begin(), work.data.end(), std::complex<double>{});
        work.rep = Rep::Frequency;
        if (!fill(m, work)) continue;
        inverse_transform(work);
        for (std::size_t i = 0; i < N; ++i) {
            sum[i] += work.data[i];
            double a2 = std::norm(work.data[i]);
            sumsq[i] += a2;
            sum4[i] += a2 * a2;
        }
    }
    double p4 = 0.0, q4 = 0.0, pw = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double a2 = std::norm(sum[i]);
        p4 += a2 * a2;
        q4 += sumsq[i] * sumsq[i];
        if (sum4[i] > 0.0)
            pw = std::max(pw, sumsq[i] * sumsq[i] / (count * sum4[i]));
    }
    SquareFunctionResult res;
    res.sectors = count;
    double cv = g.cell_volume();
    res.lhs = std::pow(p4 * cv, 0.25);
    res.rhs = std::pow(q4 * cv, 0.25);
    res.cs_margin = (res.rhs > 0.0) ? res.lhs / (std::sqrt(double(count)) * res.rhs) : 0.0;
    res.pointwise_max = pw;
    return res;
}

SquareFunctionResult square_function_from_hat(const Shell& shell,
                                              const SpectralField& fhat) {
    auto fill = [&shell, &fhat](int m, SpectralField& work) {
        bool any = false;
        for (std::size_t i = 0; i < shell.index.size(); ++i) {
            double w = sector_profile(shell.count, m, shell.theta[i]);
            if (w == 0.0) continue;
            std::complex<double> v = w * shell.base[i] * fhat.data[shell.index[i]];
            if (v != std::complex<double>{}) {
                work.data[shell.index[i]] = v;
                any = true;
            }
        }
        return any;
    };
    return accumulate_square_function(shell.grid, shell.count, fill);
}

}  // namespace

double norm_l2(const PieceIndex& p, GridSpec g, double tol) {
    /* sample_piece rejects on the full piece weight (sector included) before
     * any quadrature runs, which matters on the large lattice-sup grids */
    return sample_piece(p, g, tol).sup_abs;
}

double interpolation_bound(double l2, double linf) {
    if (l2 < 0.0 || linf < 0.0)
        throw std::invalid_argument("interpolation_bound: negative norm");
    return std::sqrt(l2 * linf);
}

double rayleigh_l4(const SampledMultiplier& s, const SpectralField& fhat) {
    if (fhat.rep != Rep::Frequency)
        throw std::logic_error("rayleigh_l4: want frequency coefficients");
    if (!(fhat.grid == s.grid))
        throw std::invalid_argument("rayleigh_l4: grid mismatch");
    SpectralField f = fhat;
    inverse_transform(f);
    double denom = lp_norm(f, 4.0);
    if (denom == 0.0) return 0.0;
    SpectralField sf(s.grid, Rep::Frequency);
    for (std::size_t i = 0; i < s.index.size(); ++i)
        sf.data[s.index[i]] = s.value[i] * fhat.data[s.index[i]];
    inverse_transform(sf);
    return lp_norm(sf, 4.0) / denom;
}

L4Probe norm_l4_probe(const PieceIndex& p, GridSpec g, int trials,
                      std::uint64_t seed, double tol) {
    if (trials < 1) throw std::invalid_argument("norm_l4_probe: need trials >= 1");
    SampledMultiplier s = assemble_sector(*get_shell(g, p.lambda, p.j, tol), p.m);
    L4Probe out;
    FrequencyBand band = piece_band(p);
    for (int t = 0; t < trials; ++t) {
        auto rf = random_frequency_field(g, band, stream_key(seed, p.lambda, p.j, p.m, t));
        if (rf.empty_band) continue;
        out.best_random = std::max(out.best_random, rayleigh_l4(s, rf.field));
    }
    if (auto kf = try_knapp(p, g)) {
        forward_transform(*kf);
        out.knapp_value = rayleigh_l4(s, *kf);
    }
    out.best = std::max(out.best_random, out.knapp_value);
    out.knapp_best = out.knapp_value > out.best_random;
    return out;
}

double norm_l4_lower(const PieceIndex& p, GridSpec g, int trials,
                     std::uint64_t seed, double tol) {
    return norm_l4_probe(p, g, trials, seed, tol).best;
}

NormRecord compute_norm_record(const PieceIndex& p, GridSpec g, int trials,
                               std::uint64_t seed, double tol, L4Probe* probe_out) {
    SampledMultiplier s = assemble_sector(*get_shell(g, p.lambda, p.j, tol), p.m);
    KernelEstimate ke = kernel_l1_from_samples(s);
    L4Probe probe = norm_l4_probe(p, g, trials, seed, tol);
    if (probe_out) *probe_out = probe;

    NormRecord r;
    r.lambda = p.lambda;
    r.j = p.j;
    r.m = p.m;
    r.delta = p.delta();
    r.alpha = p.alpha();
    r.l2_norm = s.sup_abs;
    r.linf_upper = ke.l1_norm;
    r.kernel_l1 = ke.l1_norm;
    r.mass_capture = ke.mass_capture;
    r.l4_lower = probe.best;
    r.interp_upper = interpolation_bound(r.l2_norm, r.linf_upper);
    r.seed = seed;
    return r;
}

SquareFunctionResult square_function_ratio(double lambda, int j, GridSpec g,
                                           const SpectralField& f, double tol) {
    if (f.rep != Rep::Physical)
        throw std::logic_error("square_function_ratio: field must be physical");
    if (!(f.grid == g))
        throw std::invalid_argument("square_function_ratio: grid mismatch");
    auto shell = get_shell(g, lambda, j, tol);
    SpectralField fhat = f;
    forward_transform(fhat);
    return square_function_from_hat(*shell, fhat);
}

SquareFunctionResult square_function_pieces(
    const std::vector<SampledMultiplier>& family, const SpectralField& f) {
    if (family.empty())
        throw std::invalid_argument("square_function_pieces: empty family");
    if (f.rep != Rep::Physical)
        throw std::logic_error("square_function_pieces: field must be physical");
    for (const auto& s : family)
        if (!(s.grid == f.grid))
            throw std::invalid_argument("square_function_pieces: grid mismatch");
    SpectralField fhat = f;
    forward_transform(fhat);
    auto fill = [&family, &fhat](int m, SpectralField& work) {
        const SampledMultiplier& s = family[m];
        bool any = false;
        for (std::size_t i = 0; i < s.index.size(); ++i) {
            std::complex<double> v = s.value[i] * fhat.data[s.index[i]];
            if (v != std::complex<double>{}) {
                work.data[s.index[i]] = v;
                any = true;
            }
        }
        return any;
    };
    return accumulate_square_function(f.grid, static_cast<int>(family.size()), fill);
}

void clear_shell_cache() {
    std::lock_guard<std::mutex> lock(shell_mutex);
    shell_cache.clear();
}

TauEstimate tau_estimate(const std::vector<std::pair<double, int>>& lambda_j,
                         double L, int trials, std::uint64_t seed, double tol) {
    if (lambda_j.size() < 4)
        throw std::invalid_argument("tau_estimate: need >= 4 sweep entries");
    if (trials < 1) throw std::invalid_argument("tau_estimate: need trials >= 1");

    std::vector<TauPoint> points;
    for (auto [lambda, j] : lambda_j) {
        GridSpec g = grid_for_lambda(lambda, L);
        auto shell = get_shell(g, lambda, j, tol);
        TauPoint pt;
        pt.lambda = lambda;
        pt.j = j;
        pt.delta = piece_delta(lambda, j);
        FrequencyBand band = family_band(lambda);
        auto absorb = [&pt](const SquareFunctionResult& res) {
            if (res.rhs > 0.0) pt.max_ratio = std::max(pt.max_ratio, res.lhs / res.rhs);
            pt.cs_margin = std::max(pt.cs_margin, res.cs_margin);
            pt.pointwise_max = std::max(pt.pointwise_max, res.pointwise_max);
        };
        for (int t = 0; t < trials; ++t) {
            // the m slot carries the sector count: a family-level stream
            auto rf = random_frequency_field(
                g, band, stream_key(seed, lambda, j, shell->count, t));
            if (rf.empty_band) continue;
            absorb(square_function_from_hat(*shell, rf.field));
        }
        if (auto kf = try_knapp(PieceIndex(lambda, j, 0), g)) {
            forward_transform(*kf);
            absorb(square_function_from_hat(*shell, *kf));
        }
        points.push_back(pt);
    }

    std::sort(points.begin(), points.end(),
              [](const TauPoint& a, const TauPoint& b) { return a.delta < b.delta; });
    std::vector<double> xs, ys;
    for (const auto& pt : points) {
        if (!xs.empty() && pt.delta <= xs.back())
            throw std::invalid_argument("tau_estimate: need >= 4 distinct delta values");
        xs.push_back(pt.delta);
        ys.push_back(pt.max_ratio);
    }

    TauEstimate est;
    est.fit = fit_exponent(xs, ys);
    est.tau_hat = est.fit.slope + 0.25;
    est.sigma_hat = est.tau_hat / 3.0;
    est.points = std::move(points);
    return est;
}

double cordoba_ratio(double delta, GridSpec g, const SpectralField& f) {
    if (!(delta > 0.0)) throw std::invalid_argument("cordoba_ratio: delta > 0");
    if (f.rep != Rep::Physical)
        throw std::logic_error("cordoba_ratio: field must be physical");
    if (!(f.grid == g)) throw std::invalid_argument("cordoba_ratio: grid mismatch");

    double denom = lp_norm(f, 4.0);
    if (denom == 0.0) return 0.0;
    const int count = std::max(1, static_cast<int>(std::lround(2.0 * M_PI / delta)));
    SpectralField fhat = f;
    forward_transform(fhat);

    /* Sector supports, precomputed: a point can lie in at most the sector
     * nearest its angle and that sector's two neighbours. */
    const double aperture = 2.0 * M_PI / count;
    std::vector<std::vector<std::pair<std::size_t, double>>> lists(count);
    const int n = g.n;
    for (int k1 = 0; k1 < n; ++k1)
        for (int k2 = 0; k2 < n; ++k2)
            for (int k3 = 0; k3 < n; ++k3) {
                std::size_t idx = g.flat(k1, k2, k3);
                if (fhat.data[idx] == std::complex<double>{}) continue;
                Vec3 xi = g.xi(k1, k2, k3);
                if (count == 1) {
                    lists[0].push_back({idx, 1.0});
                    continue;
                }
                if (xi.perp_norm() == 0.0) continue;  // axis: all sector weights 0
                double theta = std::atan2(xi.y, xi.x);
                long m0 = std::lround(theta / aperture);
                for (long dm = -1; dm <= 1; ++dm) {
                    int m = static_cast<int>(((m0 + dm) % count + count) % count);
                    double w = sector_profile(count, m, theta);
                    if (w > 0.0) lists[m].push_back({idx, w});
                }
            }

    const std::size_t N = g.points();
    std::vector<double> sumsq(N, 0.0);
    SpectralField work(g, Rep::Frequency);
    for (int m = 0; m < count; ++m) {
        if (lists[m].empty()) continue;
        std::fill(work.data.begin(), work.data.end(), std::complex<double>{});
        work.rep = Rep::Frequency;
        for (auto [idx, w] : lists[m]) work.data[idx] = w * fhat.data[idx];
        inverse_transform(work);
        for (std::size_t i = 0; i < N; ++i) sumsq[i] += std::norm(work.data[i]);
    }
    double q4 = 0.0;
    for (std::size_t i = 0; i < N; ++i) q4 += sumsq[i] * sumsq[i];
    return std::pow(q4 * g.cell_volume(), 0.25) / denom;
}

double slambda_norm_l4_lower(double lambda, GridSpec g, int trials,
                             std::uint64_t seed, double tol) {
    if (piece_frequency_extent(lambda) > g.nyquist() - g.freq_step())
        throw std::invalid_argument("slambda_norm_l4_lower: lambda exceeds Nyquist");
    if (trials < 1) throw std::invalid_argument("slambda_norm_l4_lower: trials >= 1");
    auto [jmin, jmax] = band_range(lambda);
    SampledMultiplier s(g);
    if (jmin == 0 && jmax == 0) {
        /* single-band regime: the j = 0 band weight is identically 1 on the
         * collar, so the whole block coincides with the cached j = 0 shell */
        auto shell = get_shell(g, lambda, 0, tol);
        s.index = shell->index;
        s.value = shell->base;
        for (const auto& v : s.value) s.sup_abs = std::max(s.sup_abs, std::abs(v));
    } else {
        auto weight = [lambda](Vec3 xi) {
            double w = conic_A_weight(xi);
            if (w == 0.0) return 0.0;
            return w * dyadic_weight(lambda, xi.z);
        };
        s = sample_multiplier(g, weight, tol, 0.75 * lambda, 2.0 * lambda);
    }
    double best = 0.0;
    FrequencyBand band = family_band(lambda);
    for (int t = 0; t < trials; ++t) {
        // j slot = -1: the bandless whole-block stream
        auto rf = random_frequency_field(g, band, stream_key(seed, lambda, -1, 0, t));
        if (rf.empty_band) continue;
        best = std::max(best, rayleigh_l4(s, rf.field));
    }
    if (auto kf = try_knapp(PieceIndex(lambda, 0, 0), g)) {
        forward_transform(*kf);
        best = std::max(best, rayleigh_l4(s, *kf));
    }
    return best;
}

RegionSweep elliptic_oscillatory_l4(Region region,
                                    const std::vector<double>& lambdas,
                                    GridSpec g, int trials, std::uint64_t seed,
                                    double tol, bool control) {
    if (region != Region::Elliptic && region != Region::Oscillatory)
        throw std::invalid_argument("elliptic_oscillatory_l4: region must be elliptic or oscillatory");
    if (trials < 1)
        throw std::invalid_argument("elliptic_oscillatory_l4: trials >= 1");

    const bool elliptic = region == Region::Elliptic;
    RegionSweep out;
    for (double lambda : lambdas) {
        if (2.0 * lambda > g.nyquist() - g.freq_step())
            throw std::invalid_argument("elliptic_oscillatory_l4: lambda exceeds Nyquist");
        auto weight = [lambda, elliptic](Vec3 xi) {
            double d = dyadic_weight(lambda, xi.z);
            if (d == 0.0) return 0.0;
            double rho = xi.perp_norm() / xi.z;
            double c = elliptic ? smooth_step((0.99 - rho) / 0.01)
                                : smooth_step((rho - 1.01) / 0.01);
            return d * c;
        };
        SampledMultiplier s =
            control ? sample_weight(g, weight, 0.75 * lambda, 2.0 * lambda)
                    : sample_multiplier(g, weight, tol, 0.75 * lambda, 2.0 * lambda);
        FrequencyBand band;
        band.xi3_min = 0.75 * lambda;
        band.xi3_max = 2.0 * lambda;
        if (elliptic)
            band.ratio_max = 0.99;
        else
            band.ratio_min = 1.01;
        double best = 0.0;
        int jslot = elliptic ? -2 : -3;  // distinct random streams per region
        for (int t = 0; t < trials; ++t) {
            auto rf = random_frequency_field(g, band,
                                             stream_key(seed, lambda, jslot, control, t));
            if (rf.empty_band) continue;
            best = std::max(best, rayleigh_l4(s, rf.field));
        }
        out.lambdas.push_back(lambda);
        out.values.push_back(best);
    }
    out.fit = fit_exponent(out.lambdas, out.values);
    return out;
}

}  // namespace helixlab
