/* End-to-end acceptance suite.  Each numbered criterion prints exactly one
 * [PASS]/[FAIL] line with the measured quantities; the exit status is the
 * number of failures.  Runs serially in a few minutes on one core; progress
 * goes to stderr. */

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "helixlab/curves.hpp"
#include "helixlab/decomposition.hpp"
#include "helixlab/estimator.hpp"
#include "helixlab/grid.hpp"
#include "helixlab/kernel.hpp"
#include "helixlab/multiplier.hpp"
#include "helixlab/rng.hpp"

using namespace helixlab;

namespace {

constexpr std::uint64_t kSeed = 20250815;

int g_failures = 0;
std::chrono::steady_clock::time_point g_tick;

void begin(int idx, const char* label) {
    std::fprintf(stderr, "criterion %d (%s) ...\n", idx, label);
    g_tick = std::chrono::steady_clock::now();
}

void report(int idx, const char* label, bool pass, const std::string& detail) {
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - g_tick)
                      .count();
    std::printf("[%s] criterion %d: %s -- %s (%.1fs)\n", pass ? "PASS" : "FAIL",
                idx, label, detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

std::vector<double> log_spaced(double lo, double hi, int k) {
    std::vector<double> out(k);
    for (int i = 0; i < k; ++i)
        out[i] = lo * std::pow(hi / lo, double(i) / (k - 1));
    return out;
}

std::vector<double> decay_values(Vec3 d, const std::vector<double>& radii) {
    Vec3 u = (1.0 / d.norm()) * d;
    std::vector<double> vals;
    for (double r : radii) {
        double v = std::abs(multiplier_quadrature(r * u, Cutoff{}, 1e-12).value);
        vals.push_back(std::max(v, 1e-250));
    }
    return vals;
}

FrequencyBand annulus_band(double lambda) {
    FrequencyBand band;
    band.xi3_min = 0.75 * lambda;
    band.xi3_max = 2.0 * lambda;
    band.ratio_min = 0.98;
    band.ratio_max = 1.02;
    return band;
}

// shared between criteria 9 (ceilings) and 10 (slope): one deterministic run
const TauEstimate& shared_tau() {
    static const TauEstimate tau = tau_estimate(
        {{8.0, 0}, {12.0, 0}, {16.0, 0}, {24.0, 0}}, 8.0, 20, kSeed, 1e-8);
    return tau;
}

void criterion_1() {
    begin(1, "elliptic ray decay");
    /* The symbol on this ray decays faster than any power and crosses the
     * double-precision quadrature floor (~1e-15) inside [1e2, 1e4].  The
     * slope gate applies to the radii whose values the quadrature can
     * certify; past those the values must stay pinned at the floor. */
    auto radii = log_spaced(100.0, 10000.0, 25);
    auto vals = decay_values({0.5, 0.0, 1.0}, radii);
    std::size_t nt = 0;
    while (nt < vals.size() && vals[nt] >= 1e-13) ++nt;
    double tail_max = 0.0;
    for (std::size_t i = nt; i < vals.size(); ++i)
        tail_max = std::max(tail_max, vals[i]);
    bool pass = false;
    double slope = 0.0;
    if (nt >= 4) {
        slope = fit_exponent({radii.begin(), radii.begin() + nt},
                             {vals.begin(), vals.begin() + nt})
                    .slope;
        pass = slope <= -4.0 && tail_max <= 1e-12;
    }
    report(1, "elliptic ray decay", pass,
           fmt("ray (0.5,0,1): slope %.2f <= -4 over %zu certified radii, "
               "tail max %.1e <= 1e-12",
               slope, nt, tail_max));
}

void criterion_2() {
    begin(2, "oscillatory ray decay");
    auto radii = log_spaced(100.0, 10000.0, 25);
    ExponentFit f1 = decay_fit({1.5, 0.0, 1.0}, radii, Cutoff{}, 1e-12);
    ExponentFit f2 = decay_fit({2.0, 0.0, 1.0}, radii, Cutoff{}, 1e-12);
    bool pass = std::fabs(f1.slope + 0.5) <= 0.05 &&
                std::fabs(f2.slope + 0.5) <= 0.05;
    report(2, "oscillatory ray decay", pass,
           fmt("slope %.4f on ray (1.5,0,1), %.4f on ray (2,0,1); "
               "gate -0.5 +/- 0.05",
               f1.slope, f2.slope));
}

void criterion_3() {
    begin(3, "stationary phase consistency");
    Vec3 d{1.5, 0.0, 1.0};
    Vec3 u = (1.0 / d.norm()) * d;
    double rel[3];
    int k = 0;
    for (double r : {1e3, 1e4, 1e5}) {
        Vec3 xi = r * u;
        std::complex<double> q = multiplier_quadrature(xi, Cutoff{}, 1e-11).value;
        std::complex<double> sp = multiplier_stationary_phase(xi);
        rel[k++] = std::abs(sp - q) / std::abs(q);
    }
    bool pass = rel[0] <= 0.05 && rel[1] < rel[0] && rel[2] < rel[1];
    report(3, "stationary phase consistency", pass,
           fmt("relative error %.2e -> %.2e -> %.2e at r = 1e3, 1e4, 1e5 "
               "(<= 0.05 and decreasing)",
               rel[0], rel[1], rel[2]));
}

void criterion_4() {
    begin(4, "partition reconstruction");
    double worst = 0.0;
    for (double lambda : {8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 4096.0}) {
        auto [jlo, jhi] = band_range(lambda);
        std::vector<PieceIndex> pieces;
        for (int j = jlo; j <= jhi; ++j)
            for (int m = 0; m < sector_count(lambda, j); ++m)
                pieces.emplace_back(lambda, j, m);
        std::uint64_t key = stream_key(kSeed, lambda, -20, 0, 0);
        std::uint64_t ctr = 0;
        for (int i = 0; i < 10000; ++i) {
            double u1 = counter_uniform(key, ctr++);
            double u2 = counter_uniform(key, ctr++);
            double u3 = counter_uniform(key, ctr++);
            double xi3 = lambda * (1.0 + 0.5 * u1);
            double rho = 0.985 + 0.03 * u2;
            double th = 2.0 * M_PI * u3;
            Vec3 xi{rho * xi3 * std::cos(th), rho * xi3 * std::sin(th), xi3};
            double sum = 0.0;
            for (const PieceIndex& p : pieces) sum += piece_weight(p, xi);
            worst = std::max(worst, std::fabs(sum - 1.0));
        }
    }
    double tele = 0.0;
    std::uint64_t key = stream_key(kSeed, 0.0, -21, 0, 0);
    for (int i = 0; i < 10000; ++i) {
        double x = 2.0 * std::pow(5e5, counter_uniform(key, i));
        double sum = 0.0;
        for (int k = 1; k <= 21; ++k) sum += dyadic_weight(std::pow(2.0, k), x);
        tele = std::max(tele, std::fabs(sum - 1.0));
    }
    bool pass = worst <= 1e-10 && tele <= 1e-12;
    report(4, "partition reconstruction", pass,
           fmt("max |sum - 1| = %.1e over 7 scales x 1e4 points (<= 1e-10); "
               "dyadic telescope %.1e (<= 1e-12)",
               worst, tele));
}

void criterion_5() {
    begin(5, "piece l2 scaling");
    GridSpec g(1024, 4.0);
    std::vector<double> xs, ys;
    for (double lambda : {32.0, 64.0, 128.0, 256.0}) {
        PieceIndex p(lambda, 0, 0);
        xs.push_back(lambda * p.delta());
        ys.push_back(norm_l2(p, g, 1e-8));
    }
    ExponentFit f = fit_exponent(xs, ys);
    bool pass = std::fabs(f.slope + 0.5) <= 0.1;
    report(5, "piece l2 scaling", pass,
           fmt("l2 norm vs lambda*delta slope %.4f (gate -0.5 +/- 0.1, "
               "lambda in {32..256})",
               f.slope));
}

void criterion_6() {
    begin(6, "kernel l1 scaling");
    /* Sheared-lattice kernel estimates: the only instrument whose domain
     * holds the collar needle, so mass capture is a real convergence check
     * rather than a fixed truncation artifact. */
    std::vector<double> xs, ys;
    double C = 0.0, cap_min = 1.0;
    for (double lambda : {48.0, 32.0, 24.0, 16.0, 12.0, 8.0}) {
        PieceIndex p(lambda, 0, 0);
        KernelEstimate ke = kernel_l1_sheared(p);
        xs.push_back(p.delta());
        ys.push_back(ke.l1_norm);
        C = std::max(C, ke.l1_norm / p.delta());
        cap_min = std::min(cap_min, ke.mass_capture);
    }
    ExponentFit f = fit_exponent(xs, ys);
    bool pass = std::fabs(f.slope - 1.0) <= 0.2 && cap_min >= 0.95;
    report(6, "kernel l1 scaling", pass,
           fmt("kernel l1 vs delta slope %.4f (gate 1.0 +/- 0.2); "
               "l1 <= C*delta with C = %.3f; min mass capture %.3f (>= 0.95)",
               f.slope, C, cap_min));
}

void criterion_7() {
    begin(7, "l4 interpolation bracket");
    std::vector<double> lams = {8.0, 12.0, 16.0, 24.0, 32.0, 48.0};
    std::vector<double> deltas, interps;
    double worst_gap = 0.0;
    for (double lambda : lams)
        for (int m = 0; m < 2; ++m) {
            PieceIndex p(lambda, 0, m);
            GridSpec g = collar_grid(lambda);
            NormRecord rec = compute_norm_record(p, g, 20, kSeed, 1e-8);
            worst_gap = std::max(worst_gap, rec.l4_lower / rec.interp_upper);
            if (m == 0) {
                deltas.push_back(rec.delta);
                interps.push_back(rec.interp_upper);
            }
        }
    std::vector<double> ya, xb, yb;
    for (std::size_t i = 0; i < lams.size(); ++i)
        ya.push_back(interps[i] / std::pow(deltas[i], 0.25));
    for (std::size_t i = lams.size(); i-- > 0;) {
        xb.push_back(deltas[i]);
        yb.push_back(interps[i] * std::pow(lams[i], 0.25));
    }
    ExponentFit fa = fit_exponent(lams, ya);
    ExponentFit fb = fit_exponent(xb, yb);
    bool pass = std::fabs(fa.slope + 0.25) <= 0.1 &&
                std::fabs(fb.slope - 0.25) <= 0.1 && worst_gap <= 1.05;
    report(7, "l4 interpolation bracket", pass,
           fmt("interp bound: lambda-exponent %.4f (gate -0.25 +/- 0.1), "
               "delta-exponent %.4f (gate +0.25 +/- 0.1); "
               "max l4_lower/interp_upper %.3f (<= 1.05)",
               fa.slope, fb.slope, worst_gap));
}

void criterion_8() {
    begin(8, "block l4 decay trend");
    std::vector<double> xs, ys;
    for (double lambda : {8.0, 12.0, 16.0, 24.0, 32.0, 48.0}) {
        // same grids as the norm records, so the cached shells are reused
        GridSpec g = collar_grid(lambda);
        xs.push_back(lambda);
        ys.push_back(slambda_norm_l4_lower(lambda, g, 20, kSeed, 1e-8));
    }
    ExponentFit f = fit_exponent(xs, ys);
    bool pass = f.slope <= -1.0 / 6.0 + 0.05;
    report(8, "block l4 decay trend", pass,
           fmt("block l4 lower bound vs lambda slope %.4f (gate <= -1/6 + 0.05 "
               "= -0.1167); improvement below -1/6: %+.4f (reported, not gated)",
               f.slope, -1.0 / 6.0 - f.slope));
}

void criterion_9() {
    begin(9, "square function ceilings");
    double worst_cs = 0.0, worst_pw = 0.0;
    for (double lambda : {8.0, 12.0}) {
        GridSpec g = grid_for_lambda(lambda, 8.0, 64, 512);
        for (int t = 0; t < 3; ++t) {
            auto rf = random_test_field(g, annulus_band(lambda),
                                        stream_key(kSeed, lambda, -6, 0, t));
            SquareFunctionResult r =
                square_function_ratio(lambda, 0, g, rf.field, 1e-8);
            worst_cs = std::max(worst_cs, r.cs_margin);
            worst_pw = std::max(worst_pw, r.pointwise_max);
        }
    }
    for (const TauPoint& pt : shared_tau().points) {
        worst_cs = std::max(worst_cs, pt.cs_margin);
        worst_pw = std::max(worst_pw, pt.pointwise_max);
    }

    GridSpec g(128, 8.0);
    FrequencyBand band;
    band.abs_min = 2.0;
    band.abs_max = 0.85 * g.nyquist();
    std::vector<double> deltas = {0.03125, 0.0625, 0.125, 0.25};
    std::vector<double> ratios;
    for (double delta : deltas) {
        double best = 0.0;
        for (int t = 0; t < 6; ++t) {
            auto rf =
                random_test_field(g, band, stream_key(kSeed, delta, -4, 0, t));
            best = std::max(best, cordoba_ratio(delta, g, rf.field));
        }
        ratios.push_back(best);
    }
    ExponentFit f = fit_exponent(deltas, ratios);
    bool pass = worst_cs <= 1.0 + 1e-10 && worst_pw <= 1.0 + 1e-10 &&
                f.slope >= -0.05;
    report(9, "square function ceilings", pass,
           fmt("max cs_margin %.12f and pointwise %.12f (<= 1 + 1e-10); "
               "sector square function vs delta slope %.4f (gate >= -0.05)",
               worst_cs, worst_pw, f.slope));
}

void criterion_10() {
    begin(10, "tau estimate");
    const TauEstimate& tau = shared_tau();
    bool pass = tau.fit.slope >= -0.30 && tau.fit.slope <= 0.0;
    report(10, "tau estimate", pass,
           fmt("ratio vs delta slope %.4f (gate [-0.30, 0]); empirical "
               "lower-envelope estimate tau_hat = %.4f, sigma_hat = tau_hat/3 "
               "= %.4f",
               tau.fit.slope, tau.tau_hat, tau.sigma_hat));
}

void criterion_11() {
    begin(11, "infrastructure");
    // transform roundtrip and Parseval on a banded random field
    GridSpec g(64, 8.0);
    FrequencyBand band;
    band.abs_min = 2.0;
    band.abs_max = 20.0;
    auto rf = random_test_field(g, band, stream_key(kSeed, 0.0, -30, 0, 0));
    SpectralField f = rf.field;
    double sum_phys = 0.0;
    for (auto v : f.data) sum_phys += std::norm(v);
    forward_transform(f);
    double sum_freq = 0.0;
    for (auto v : f.data) sum_freq += std::norm(v);
    double parseval = std::fabs(sum_freq - sum_phys) / sum_phys;
    inverse_transform(f);
    double roundtrip = 0.0;
    for (std::size_t i = 0; i < f.data.size(); ++i)
        roundtrip = std::max(roundtrip, std::abs(f.data[i] - rf.field.data[i]));

    // torsion determinants of the two model curves
    double tors = 0.0;
    for (double t : {-1.0, -0.3, 0.0, 0.7, 1.0}) {
        tors = std::max(tors, std::fabs(torsion_det(helix(), t) - 1.0));
        tors = std::max(tors, std::fabs(torsion_det(twisted_cubic(), t) - 12.0));
    }

    // shear gain inequality, dense grid on |t| in [10*delta, pi]
    bool shear_ok = true;
    for (double delta : {0.05, 0.1, 0.25}) {
        ShearMap s(delta);
        for (int i = 0; i <= 4000; ++i) {
            double t = 10.0 * delta +
                       (M_PI - 10.0 * delta) * double(i) / 4000.0;
            if (!(s.alpha - std::cos(t) >= t * t / 10.0)) shear_ok = false;
            if (!(s.alpha - std::cos(-t) >= t * t / 10.0)) shear_ok = false;
        }
    }

    // bit-identical reruns under a fixed seed (shell cached by criterion 7)
    GridSpec g8 = collar_grid(8.0);
    NormRecord a = compute_norm_record(PieceIndex(8.0, 0, 0), g8, 6, kSeed, 1e-8);
    NormRecord b = compute_norm_record(PieceIndex(8.0, 0, 0), g8, 6, kSeed, 1e-8);
    bool rerun_ok = a.l2_norm == b.l2_norm && a.linf_upper == b.linf_upper &&
                    a.l4_lower == b.l4_lower && a.interp_upper == b.interp_upper &&
                    a.kernel_l1 == b.kernel_l1 &&
                    a.mass_capture == b.mass_capture && a.seed == b.seed;
    auto rf2 = random_test_field(g, band, stream_key(kSeed, 0.0, -30, 0, 0));
    for (std::size_t i = 0; i < rf2.field.data.size(); ++i)
        if (rf2.field.data[i] != rf.field.data[i]) rerun_ok = false;

    bool pass = parseval <= 1e-10 && roundtrip <= 1e-10 && tors <= 1e-12 &&
                shear_ok && rerun_ok;
    report(11, "infrastructure", pass,
           fmt("parseval %.1e and roundtrip %.1e (<= 1e-10); torsion dets off "
               "by %.1e (<= 1e-12); shear gain inequality %s; reruns %s",
               parseval, roundtrip, tors, shear_ok ? "holds" : "VIOLATED",
               rerun_ok ? "bit-identical" : "DIFFER"));
}

}  // namespace

int main() {
    auto t0 = std::chrono::steady_clock::now();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("%d of 11 criteria passed (%.0fs total)\n", 11 - g_failures,
                total);
    return g_failures;
}
