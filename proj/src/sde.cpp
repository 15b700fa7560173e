#include "wealthfpk/sde.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace wealthfpk {
namespace sde {

namespace {

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t hash3(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ULL * (a + 1));
    return mix64(h + 0xD1B54A32D192ED03ULL * (b + 1));
}

inline double to_uniform(std::uint64_t h) {
    return (h >> 11) * 0x1.0p-53 + 0x1.0p-54; // (0, 1)
}

// standardized Binomial(64, 1/2): mean 0, variance 1, symmetric; matches
// the Gaussian moments a weak order-one Euler scheme needs, one hash each
inline double weak_increment(std::uint64_t h) {
    return (static_cast<int>(std::popcount(h)) - 32) * 0.25;
}

double normal_from(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    const double u1 = to_uniform(hash3(seed, tag, index));
    const double u2 = to_uniform(hash3(seed, tag + 0x51ED270B, index));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

int thread_count() {
    if (const char* env = std::getenv("WEALTHFPK_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1)
            return static_cast<int>(std::min<long>(v, 64));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

constexpr std::uint64_t kInitTag = 0xC0FFEE11;

} // namespace

InitialLaw InitialLaw::gaussian_law(double mean, double sd) {
    InitialLaw l;
    l.kind = Kind::gaussian;
    l.mean = mean;
    l.sd = sd;
    return l;
}

InitialLaw InitialLaw::box_law(double a, double b) {
    InitialLaw l;
    l.kind = Kind::box;
    l.a = a;
    l.b = b;
    return l;
}

InitialLaw InitialLaw::two_box_debt_law(double rho_minus, double right_width) {
    if (!(rho_minus > 0.0 && rho_minus < 1.0))
        throw std::invalid_argument("two_box_debt: rho_minus must lie in (0, 1)");
    InitialLaw l;
    l.kind = Kind::two_box_debt;
    l.rho_minus = rho_minus;
    l.right_width = right_width;
    const double center = (1.0 + 0.5 * rho_minus) / (1.0 - rho_minus);
    if (center - 0.5 * right_width < 0.0)
        throw std::invalid_argument("two_box_debt: positive box would cross v = 0; reduce its width");
    return l;
}

InitialLaw InitialLaw::equilibrium_law() {
    InitialLaw l;
    l.kind = Kind::equilibrium;
    return l;
}

InitialLaw InitialLaw::point_law(double v) {
    InitialLaw l;
    l.kind = Kind::point;
    l.mean = v;
    return l;
}

double InitialLaw::sample(const ModelParams& p, std::uint64_t seed, std::uint64_t index) const {
    switch (kind) {
    case Kind::gaussian:
        return mean + sd * normal_from(seed, kInitTag, index);
    case Kind::box:
        return a + (b - a) * to_uniform(hash3(seed, kInitTag, index));
    case Kind::two_box_debt: {
        const double u = to_uniform(hash3(seed, kInitTag, index));
        const double center = (1.0 + 0.5 * rho_minus) / (1.0 - rho_minus);
        if (u < rho_minus)
            return -1.0 + u / rho_minus;
        const double w = (u - rho_minus) / (1.0 - rho_minus);
        return center + right_width * (w - 0.5);
    }
    case Kind::equilibrium: {
        const double u = to_uniform(hash3(seed, kInitTag, index));
        const double mu = p.mu();
        return (mu - 1.0) / boost::math::gamma_q_inv(mu, u);
    }
    case Kind::point:
        return mean;
    }
    return mean;
}

double InitialLaw::density(const ModelParams& p, double v) const {
    switch (kind) {
    case Kind::gaussian: {
        const double z = (v - mean) / sd;
        return std::exp(-0.5 * z * z) / (sd * 2.5066282746310002);
    }
    case Kind::box:
        return (v >= a && v <= b) ? 1.0 / (b - a) : 0.0;
    case Kind::two_box_debt: {
        const double center = (1.0 + 0.5 * rho_minus) / (1.0 - rho_minus);
        double d = 0.0;
        if (v >= -1.0 && v <= 0.0)
            d += rho_minus;
        if (v >= center - 0.5 * right_width && v <= center + 0.5 * right_width)
            d += (1.0 - rho_minus) / right_width;
        return d;
    }
    case Kind::equilibrium:
        return equilibrium_pdf(p, v);
    case Kind::point:
        throw std::invalid_argument("InitialLaw: a point mass has no density to project");
    }
    return 0.0;
}

std::vector<EnsembleState> simulate_checkpoints(const ModelParams& p, const InitialLaw& law,
                                                std::size_t n, double dt,
                                                const std::vector<double>& times,
                                                std::uint64_t seed) {
    if (n < 1)
        throw std::invalid_argument("simulate: need at least one particle");
    if (!(dt > 0.0) || p.lambda * dt >= 0.1 || p.sigma * dt >= 0.1)
        throw std::invalid_argument("simulate: dt too large (need lambda*dt < 0.1 and sigma*dt < 0.1)");
    if (times.empty() || !std::is_sorted(times.begin(), times.end()) || times.front() < 0.0)
        throw std::invalid_argument("simulate: checkpoint times must be ascending and nonnegative");

    std::vector<long> step_of(times.size());
    for (std::size_t k = 0; k < times.size(); ++k)
        step_of[k] = std::lround(times[k] / dt);
    const long total_steps = step_of.back();

    std::vector<EnsembleState> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        out[k].particles.resize(n);
        out[k].t = step_of[k] * dt;
        out[k].rng_seed = seed;
    }

    const double lam_dt = p.lambda * dt;
    const double noise = std::sqrt(p.sigma * dt);

    // fixed-size chunks claimed off an atomic counter; every particle is a
    // pure function of (seed, index), so the thread split cannot change
    // the result
    const std::size_t chunk = 16384;
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::atomic<std::size_t> next{0};
    std::atomic<long> bad_particle{-1};

    auto worker = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks)
                return;
            const std::size_t lo = c * chunk, hi = std::min(n, lo + chunk);
            for (std::size_t k = lo; k < hi; ++k) {
                double v = law.sample(p, seed, k);
                long step = 0;
                for (std::size_t cp = 0; cp < step_of.size(); ++cp) {
                    for (; step < step_of[cp]; ++step)
                        v += -lam_dt * (v - 1.0) + noise * v * weak_increment(hash3(seed, k, step));
                    out[cp].particles[k] = v;
                }
                if (!std::isfinite(v))
                    bad_particle.store(static_cast<long>(k));
            }
        }
    };

    const int nt = std::min<int>(thread_count(), static_cast<int>(n_chunks));
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nt; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (bad_particle.load() >= 0)
        throw std::runtime_error("simulate: particle " + std::to_string(bad_particle.load()) +
                                 " became non-finite by t = " + std::to_string(total_steps * dt) +
                                 " (seed " + std::to_string(seed) + ")");
    return out;
}

EnsembleState simulate(const ModelParams& p, const InitialLaw& law, std::size_t n,
                       double dt, double t_end, std::uint64_t seed) {
    auto snaps = simulate_checkpoints(p, law, n, dt, {t_end}, seed);
    return std::move(snaps.front());
}

DensityOnGrid empirical_density(const EnsembleState& state, const GridPtr& grid) {
    DensityOnGrid f;
    f.grid = grid;
    f.values.assign(grid->n_cells(), 0.0);
    const auto& e = grid->edges;
    for (double v : state.particles) {
        if (v < e.front() || v >= e.back())
            continue;
        const auto it = std::upper_bound(e.begin(), e.end(), v);
        f.values[static_cast<std::size_t>(it - e.begin()) - 1] += 1.0;
    }
    const double inv_n = 1.0 / static_cast<double>(state.n());
    for (std::size_t i = 0; i < f.values.size(); ++i)
        f.values[i] *= inv_n / grid->widths[i];
    return f;
}

EnsembleMoments ensemble_moments(const EnsembleState& state) {
    const std::size_t n = state.n();
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (double v : state.particles) {
        s1 += v;
        s2 += v * v;
        s4 += v * v * v * v;
    }
    EnsembleMoments m;
    m.mean = s1 / n;
    m.m2 = s2 / n;
    const double var_v = std::max(0.0, s2 / n - m.mean * m.mean);
    const double var_v2 = std::max(0.0, s4 / n - m.m2 * m.m2);
    m.mean_se = std::sqrt(var_v / n);
    m.m2_se = std::sqrt(var_v2 / n);
    return m;
}

} // namespace sde
} // namespace wealthfpk
