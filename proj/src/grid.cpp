#include "helixlab/grid.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include "helixlab/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "field export assumes a little-endian host");

namespace helixlab {

GridSpec::GridSpec(int n_, double L_) : n(n_), L(L_) {
    if (n < 16 || (n & (n - 1)) != 0)
        throw std::invalid_argument("GridSpec: n must be a power of two >= 16");
    if (!(L > 0.0)) throw std::invalid_argument("GridSpec: L must be positive");
}

namespace {

/* FFTW planning is not thread safe and FFTW_MEASURE would make plans depend
 * on timing, so plans are created per call under a lock with FFTW_ESTIMATE.
 * FFTW_UNALIGNED keeps the plan independent of where the vector happens to
 * be allocated, so repeated runs use the same codelets bit for bit. */
std::mutex plan_mutex;

void run_fft(SpectralField& f, int sign) {
    auto* ptr = reinterpret_cast<fftw_complex*>(f.data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        plan = fftw_plan_dft_3d(f.grid.n, f.grid.n, f.grid.n, ptr, ptr, sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    if (!plan) throw std::runtime_error("fftw_plan_dft_3d failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(plan);
    }
    double scale = 1.0 / std::pow(static_cast<double>(f.grid.n), 1.5);
    for (auto& v : f.data) v *= scale;
}

}  // namespace

void rectangular_fft(std::vector<std::complex<double>>& data, int n1, int n2,
                     int n3, int sign) {
    if (n1 < 1 || n2 < 1 || n3 < 1 ||
        data.size() != static_cast<std::size_t>(n1) * n2 * n3)
        throw std::invalid_argument("rectangular_fft: size mismatch");
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        plan = fftw_plan_dft_3d(n1, n2, n3, ptr, ptr, sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    if (!plan) throw std::runtime_error("fftw_plan_dft_3d failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(plan);
    }
}

void forward_transform(SpectralField& f) {
    if (f.rep != Rep::Physical)
        throw std::logic_error("forward_transform: field is already spectral");
    run_fft(f, FFTW_FORWARD);
    f.rep = Rep::Frequency;
}

void inverse_transform(SpectralField& f) {
    if (f.rep != Rep::Frequency)
        throw std::logic_error("inverse_transform: field is already physical");
    run_fft(f, FFTW_BACKWARD);
    f.rep = Rep::Physical;
}

void apply_multiplier(SpectralField& f,
                      const std::function<std::complex<double>(Vec3)>& m) {
    if (f.rep != Rep::Physical)
        throw std::logic_error("apply_multiplier: field must be physical");
    forward_transform(f);
    const int n = f.grid.n;
    for (int k1 = 0; k1 < n; ++k1)
        for (int k2 = 0; k2 < n; ++k2)
            for (int k3 = 0; k3 < n; ++k3)
                f.data[f.grid.flat(k1, k2, k3)] *= m(f.grid.xi(k1, k2, k3));
    inverse_transform(f);
}

double lp_norm(const SpectralField& f, double p) {
    if (f.rep != Rep::Physical)
        throw std::logic_error("lp_norm: field must be physical");
    if (std::isinf(p)) {
        double m = 0.0;
        for (const auto& v : f.data) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: need p >= 1");
    double sum = 0.0;
    for (const auto& v : f.data) sum += std::pow(std::abs(v), p);
    return std::pow(sum * f.grid.cell_volume(), 1.0 / p);
}

double sobolev_norm(const SpectralField& f, double s, double p) {
    SpectralField g = f;
    apply_multiplier(g, [s](Vec3 xi) {
        return std::complex<double>{std::pow(1.0 + xi.dot(xi), 0.5 * s), 0.0};
    });
    return lp_norm(g, p);
}

bool FrequencyBand::contains(Vec3 xi) const {
    double a = xi.norm();
    if (a < abs_min || a > abs_max) return false;
    if (xi.z < xi3_min || xi.z > xi3_max) return false;
    if (ratio_min > 0.0 || std::isfinite(ratio_max)) {
        if (xi.z <= 0.0) return false;
        double rho = xi.perp_norm() / xi.z;
        if (rho < ratio_min || rho > ratio_max) return false;
    }
    if (std::isfinite(theta_half)) {
        if (xi.perp_norm() == 0.0) return false;
        double d = std::remainder(std::atan2(xi.y, xi.x) - theta_center, 2.0 * M_PI);
        if (std::fabs(d) > theta_half) return false;
    }
    return true;
}

RandomFieldResult random_frequency_field(GridSpec g, const FrequencyBand& band,
                                         std::uint64_t key) {
    RandomFieldResult out{SpectralField(g, Rep::Frequency), 0, false};
    out.field.seed = key;
    const int n = g.n;
    for (int k1 = 0; k1 < n; ++k1)
        for (int k2 = 0; k2 < n; ++k2)
            for (int k3 = 0; k3 < n; ++k3) {
                if (!band.contains(g.xi(k1, k2, k3))) continue;
                std::size_t idx = g.flat(k1, k2, k3);
                double re, im;
                counter_gaussian_pair(key, idx, re, im);
                out.field.data[idx] = {re, im};
                ++out.support_points;
            }
    out.empty_band = out.support_points == 0;
    return out;
}

RandomFieldResult random_test_field(GridSpec g, const FrequencyBand& band,
                                    std::uint64_t key) {
    RandomFieldResult out = random_frequency_field(g, band, key);
    if (out.empty_band) {
        out.field.rep = Rep::Physical;  // identically zero either way
        return out;
    }
    inverse_transform(out.field);
    double l2 = lp_norm(out.field, 2.0);
    for (auto& v : out.field.data) v /= l2;
    return out;
}

SpectralField knapp_field(const PieceIndex& p, GridSpec g) {
    const double lambda = p.lambda;
    const double delta = p.delta();
    const double aperture = 2.0 * M_PI / p.sectors();
    const double theta = p.m * aperture;

    // center of the piece plateau
    const double xi3c = 1.25 * lambda;  // middle of [1, 3/2] * lambda
    double wc = 0.0;                      // band plateau center in w units
    if (p.j != 0) {
        double sign = (p.j > 0) ? 1.0 : -1.0;
        wc = sign * std::exp2(std::abs(p.j) - 0.75);  // mid of [2^{j-1/2}, 2^j]
    }
    const double rhoc = 1.0 + wc * std::pow(lambda, -2.0 / 3.0);

    const Vec3 er{std::cos(theta), std::sin(theta), 0.0};
    const Vec3 et{-std::sin(theta), std::cos(theta), 0.0};
    const Vec3 e3{0.0, 0.0, 1.0};
    const Vec3 center = (rhoc * xi3c) * er + xi3c * e3;

    // cone generator, tangential, cone-normal axes at the center
    double gn = std::sqrt(1.0 + rhoc * rhoc);
    const Vec3 u1 = (1.0 / gn) * (rhoc * er + e3);
    const Vec3 u2 = et;
    const Vec3 u3 = (1.0 / gn) * (er + (-rhoc) * e3);

    /* half-extents: along the generator the dyadic plateau spans
     * 0.5*lambda in xi3 (times the generator stretch); tangentially the
     * sector plateau half-angle is aperture/4 at radius ~ rhoc*xi3c; in the
     * cone-normal direction the box must sit inside both the band plateau
     * (half-width whalf in w units around wc) and the conic collar plateau
     * |rho - 1| <= 0.015, i.e. |w| <= 0.015*lambda^{2/3}.  The collar is
     * the binding radial constraint for every lambda below ~544. */
    const double h1 = 0.9 * 0.25 * lambda * gn;
    const double h2 = 0.9 * (aperture / 4.0) * rhoc * xi3c;
    double whalf = (p.j == 0) ? 1.0 : 0.5 * (std::exp2(std::abs(p.j)) -
                                             std::exp2(std::abs(p.j) - 0.5));
    const double wcap = 0.015 * std::pow(lambda, 2.0 / 3.0) - std::fabs(wc);
    if (wcap <= 0.0)
        throw std::invalid_argument("knapp_field: band plateau misses the conic plateau");
    whalf = std::min(whalf, wcap);
    const double h3 = 0.9 * whalf * std::pow(lambda, 1.0 / 3.0) * xi3c / (lambda * gn);

    SpectralField f(g, Rep::Frequency);
    const int n = g.n;
    auto window = [](double d, double h) {
        return smooth_step((h - std::fabs(d)) / (0.25 * h));
    };
    for (int k1 = 0; k1 < n; ++k1)
        for (int k2 = 0; k2 < n; ++k2)
            for (int k3 = 0; k3 < n; ++k3) {
                Vec3 d = g.xi(k1, k2, k3) - center;
                double w = window(d.dot(u1), h1);
                if (w == 0.0) continue;
                w *= window(d.dot(u2), h2);
                if (w == 0.0) continue;
                w *= window(d.dot(u3), h3);
                if (w == 0.0) continue;
                f.data[g.flat(k1, k2, k3)] = {w, 0.0};
            }
    inverse_transform(f);
    double l4 = lp_norm(f, 4.0);
    if (l4 == 0.0)
        throw std::invalid_argument("knapp_field: piece box misses the lattice");
    for (auto& v : f.data) v /= l4;
    return f;
}

void save_field(const SpectralField& f, const std::string& path) {
    FILE* raw = std::fopen(path.c_str(), "wb");
    if (!raw) throw std::runtime_error("save_field: cannot open " + path);
    std::vector<float> buf(2 * f.data.size());
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        buf[2 * i] = static_cast<float>(f.data[i].real());
        buf[2 * i + 1] = static_cast<float>(f.data[i].imag());
    }
    std::size_t wrote = std::fwrite(buf.data(), sizeof(float), buf.size(), raw);
    std::fclose(raw);
    if (wrote != buf.size()) throw std::runtime_error("save_field: short write");

    FILE* hdr = std::fopen((path + ".hdr").c_str(), "w");
    if (!hdr) throw std::runtime_error("save_field: cannot open header");
    std::fprintf(hdr, "format = complex64-le\nn = %d\nL = %.17g\nrep = %s\nseed = %llu\n",
                 f.grid.n, f.grid.L,
                 f.rep == Rep::Physical ? "physical" : "frequency",
                 static_cast<unsigned long long>(f.seed));
    std::fclose(hdr);
}

SpectralField load_field(const std::string& path) {
    FILE* hdr = std::fopen((path + ".hdr").c_str(), "r");
    if (!hdr) throw std::runtime_error("load_field: cannot open header");
    int n = 0;
    double L = 0.0;
    char rep[32] = {0};
    unsigned long long seed = 0;
    char fmt[32] = {0};
    int got = std::fscanf(hdr, "format = %31s n = %d L = %lg rep = %31s seed = %llu",
                          fmt, &n, &L, rep, &seed);
    std::fclose(hdr);
    if (got != 5 || std::strcmp(fmt, "complex64-le") != 0)
        throw std::runtime_error("load_field: malformed header");

    SpectralField f(GridSpec(n, L),
                    std::strcmp(rep, "physical") == 0 ? Rep::Physical : Rep::Frequency);
    f.seed = seed;
    FILE* raw = std::fopen(path.c_str(), "rb");
    if (!raw) throw std::runtime_error("load_field: cannot open " + path);
    std::vector<float> buf(2 * f.data.size());
    std::size_t read = std::fread(buf.data(), sizeof(float), buf.size(), raw);
    std::fclose(raw);
    if (read != buf.size()) throw std::runtime_error("load_field: short read");
    for (std::size_t i = 0; i < f.data.size(); ++i)
        f.data[i] = {buf[2 * i], buf[2 * i + 1]};
    return f;
}

}  // namespace helixlab
