#include "handsel/cmp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "handsel/error.hpp"

namespace handsel {

namespace {

void validate_params(const CmpParams& p) {
    if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) {
        throw Error(ErrorCode::domain, "cmp: lambda must be positive, got " +
                                           std::to_string(p.lambda));
    }
    if (!(p.nu >= 0.0) || !std::isfinite(p.nu)) {
        throw Error(ErrorCode::domain, "cmp: nu must be non-negative, got " +
                                           std::to_string(p.nu));
    }
    if (p.nu == 0.0 && p.lambda >= 1.0) {
        throw Error(ErrorCode::divergence,
                    "cmp: the series diverges for nu = 0 with lambda >= 1");
    }
}

// log of the j-th series term lambda^j / (j!)^nu
double log_term(const CmpParams& p, double log_lambda, int j) {
    return j * log_lambda - p.nu * std::lgamma(static_cast<double>(j) + 1.0);
}

// Index past which terms are strictly decreasing.
double term_mode(const CmpParams& p) {
    return p.nu > 0.0 ? std::pow(p.lambda, 1.0 / p.nu) : 0.0;
}

} // namespace

void FitConfig::validate() const {
    if (!(tolerance > 0.0)) throw Error(ErrorCode::config, "fit config: tolerance must be > 0");
    if (max_terms < 100) throw Error(ErrorCode::config, "fit config: max_terms must be >= 100");
    if (!(nu_cap > 0.0)) throw Error(ErrorCode::config, "fit config: nu_cap must be > 0");
    if (max_iterations < 1) throw Error(ErrorCode::config, "fit config: max_iterations must be >= 1");
    if (min_samples < 2) throw Error(ErrorCode::config, "fit config: min_samples must be >= 2");
}

double log_normalizer(const CmpParams& params, const FitConfig& config) {
    config.validate();
    validate_params(params);
    const double log_lambda = std::log(params.lambda);
    const double mode = term_mode(params);

    // streaming log-sum-exp: running max m, s = sum of exp(t - m)
    double m = 0.0; // term j = 0 is 1
    double s = 1.0;
    for (int j = 1; j < config.max_terms; ++j) {
        const double t = log_term(params, log_lambda, j);
        if (t > m) {
            s = s * std::exp(m - t) + 1.0;
            m = t;
        } else {
            s += std::exp(t - m);
        }
        if (j > mode) {
            // Tail bound: terms past the mode shrink at least geometrically
            // with ratio r, so tail <= term * r / (1 - r).
            const double r = params.lambda / std::pow(j + 1.0, params.nu);
            const double rel = std::exp(t - m) / s; // term / partial sum
            if (rel / std::max(1.0 - r, 1e-3) < config.tolerance) {
                return m + std::log(s);
            }
        }
    }
    throw Error(ErrorCode::truncation_failure,
                "cmp: normalizer did not converge within " + std::to_string(config.max_terms) +
                    " terms (lambda=" + std::to_string(params.lambda) +
                    ", nu=" + std::to_string(params.nu) + ")");
}

double log_pmf(const CmpParams& params, int k, const FitConfig& config) {
    if (k < 0) throw Error(ErrorCode::domain, "cmp: k must be non-negative");
    const double log_z = log_normalizer(params, config);
    return log_term(params, std::log(params.lambda), k) - log_z;
}

double pmf(const CmpParams& params, int k, const FitConfig& config) {
    return std::exp(log_pmf(params, k, config));
}

Moments mean_variance(const CmpParams& params, const FitConfig& config) {
    const double log_z = log_normalizer(params, config);
    const double log_lambda = std::log(params.lambda);
    const double mode = term_mode(params);
    double s1 = 0.0;
    double s2 = 0.0;
    for (int j = 0; j < config.max_terms; ++j) {
        const double w = std::exp(log_term(params, log_lambda, j) - log_z);
        s1 += j * w;
        s2 += static_cast<double>(j) * j * w;
        if (j > mode) {
            const double r = params.lambda / std::pow(j + 1.0, params.nu);
            const double tail = w * (j + 1.0) * (j + 1.0) / std::max(1.0 - r, 1e-3);
            if (tail < config.tolerance * std::max(1.0, s2)) {
                return {s1, s2 - s1 * s1};
            }
        }
    }
    throw Error(ErrorCode::truncation_failure, "cmp: moment series did not converge");
}

double dispersion_index(std::span<const int> samples) {
    if (samples.size() < 2) {
        throw Error(ErrorCode::degenerate_sample,
                    "dispersion index needs at least 2 samples");
    }
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (int v : samples) mean += v;
    mean /= n;
    if (mean == 0.0) {
        throw Error(ErrorCode::degenerate_sample, "dispersion index undefined for zero mean");
    }
    double ss = 0.0;
    for (int v : samples) ss += (v - mean) * (v - mean);
    const double variance = ss / (n - 1.0); // unbiased
    return variance / mean;
}

namespace {

struct Histogram {
    std::vector<int> counts;      // counts[k] = multiplicity of value k
    std::vector<double> log_fact; // lgamma(k + 1)
    int n = 0;
};

Histogram make_histogram(std::span<const int> samples) {
    Histogram h;
    int max_k = 0;
    for (int v : samples) {
        if (v < 0) throw Error(ErrorCode::domain, "cmp: samples must be non-negative");
        max_k = std::max(max_k, v);
    }
    h.counts.assign(max_k + 1, 0);
    for (int v : samples) ++h.counts[v];
    h.log_fact.resize(max_k + 1);
    for (int k = 0; k <= max_k; ++k) h.log_fact[k] = std::lgamma(k + 1.0);
    h.n = static_cast<int>(samples.size());
    return h;
}

// Total negative log-likelihood; +inf when the normalizer fails.
double neg_log_likelihood(const Histogram& h, double log_lambda_coord, double log_nu_coord,
                          const FitConfig& config) {
    const double lambda = std::exp(log_lambda_coord);
    const double nu = std::clamp(std::exp(log_nu_coord), 1e-3, config.nu_cap);
    if (!std::isfinite(lambda) || lambda <= 0.0 || lambda > 1e15) {
        return std::numeric_limits<double>::infinity();
    }
    double log_z;
    try {
        log_z = log_normalizer({lambda, nu}, config);
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
    double ll = -static_cast<double>(h.n) * log_z;
    for (int k = 0; k < static_cast<int>(h.counts.size()); ++k) {
        if (h.counts[k] == 0) continue;
        ll += h.counts[k] * (k * log_lambda_coord - nu * h.log_fact[k]);
    }
    return -ll;
}

} // namespace

FitResult fit_mle(std::span<const int> samples, const FitConfig& config) {
    config.validate();
    if (static_cast<int>(samples.size()) < config.min_samples) {
        throw Error(ErrorCode::degenerate_sample,
                    "fit_mle needs at least " + std::to_string(config.min_samples) +
                        " samples, got " + std::to_string(samples.size()));
    }
    const bool all_equal = std::all_of(samples.begin(), samples.end(),
                                       [&](int v) { return v == samples[0]; });
    if (all_equal) {
        throw Error(ErrorCode::degenerate_sample,
                    "fit_mle: zero-variance sample, nu is unbounded");
    }

    const Histogram hist = make_histogram(samples);
    double mean = 0.0;
    for (int v : samples) mean += v;
    mean /= static_cast<double>(samples.size());

    const auto f = [&](const std::array<double, 2>& v) {
        return neg_log_likelihood(hist, v[0], v[1], config);
    };

    // Nelder-Mead on (log lambda, log nu), moment-matched start.
    using Vertex = std::array<double, 2>;
    std::array<Vertex, 3> simplex = {
        Vertex{std::log(std::max(mean, 1e-12)), 0.0},
        Vertex{std::log(std::max(mean, 1e-12)) + 0.5, 0.0},
        Vertex{std::log(std::max(mean, 1e-12)), 0.5},
    };
    std::array<double, 3> fv = {f(simplex[0]), f(simplex[1]), f(simplex[2])};

    constexpr double kAlpha = 1.0, kGamma = 2.0, kRho = 0.5, kSigma = 0.5;
    constexpr double kDiameterTol = 1e-8;
    bool converged = false;

    const auto order = [&] {
        std::array<int, 3> idx = {0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        std::array<Vertex, 3> sx;
        std::array<double, 3> sf;
        for (int i = 0; i < 3; ++i) {
            sx[i] = simplex[idx[i]];
            sf[i] = fv[idx[i]];
        }
        simplex = sx;
        fv = sf;
    };

    const auto diameter = [&] {
        double d = 0.0;
        for (int a = 0; a < 3; ++a) {
            for (int b = a + 1; b < 3; ++b) {
                d = std::max(d, std::hypot(simplex[a][0] - simplex[b][0],
                                           simplex[a][1] - simplex[b][1]));
            }
        }
        return d;
    };

    for (int iter = 0; iter < config.max_iterations; ++iter) {
        order();
        if (diameter() < kDiameterTol) {
            converged = true;
            break;
        }
        const Vertex centroid = {(simplex[0][0] + simplex[1][0]) / 2.0,
                                 (simplex[0][1] + simplex[1][1]) / 2.0};
        const auto blend = [&](double coeff) {
            return Vertex{centroid[0] + coeff * (centroid[0] - simplex[2][0]),
                          centroid[1] + coeff * (centroid[1] - simplex[2][1])};
        };
        const Vertex refl = blend(kAlpha);
        const double f_refl = f(refl);
        if (f_refl < fv[0]) {
            const Vertex expd = blend(kGamma);
            const double f_expd = f(expd);
            if (f_expd < f_refl) {
                simplex[2] = expd;
                fv[2] = f_expd;
            } else {
                simplex[2] = refl;
                fv[2] = f_refl;
            }
        } else if (f_refl < fv[1]) {
            simplex[2] = refl;
            fv[2] = f_refl;
        } else {
            const Vertex contr = f_refl < fv[2] ? blend(kRho) : blend(-kRho);
            const double f_contr = f(contr);
            if (f_contr < std::min(f_refl, fv[2])) {
                simplex[2] = contr;
                fv[2] = f_contr;
            } else {
                for (int i = 1; i < 3; ++i) {
                    simplex[i] = {simplex[0][0] + kSigma * (simplex[i][0] - simplex[0][0]),
                                  simplex[0][1] + kSigma * (simplex[i][1] - simplex[0][1])};
                    fv[i] = f(simplex[i]);
                }
            }
        }
    }
    order();

    FitResult result;
    result.params.lambda = std::exp(simplex[0][0]);
    result.params.nu = std::clamp(std::exp(simplex[0][1]), 1e-3, config.nu_cap);
    result.log_likelihood = -fv[0];
    result.n_samples = static_cast<int>(samples.size());
    result.converged = converged;
    result.nu_capped = result.params.nu >= config.nu_cap;
    return result;
}

int sample_cmp(const CmpParams& params, Rng& rng, const FitConfig& config) {
    const double log_z = log_normalizer(params, config);
    const double log_lambda = std::log(params.lambda);
    const double u = rng.u01();
    double cdf = 0.0;
    int k = 0;
    for (; k < config.max_terms; ++k) {
        cdf += std::exp(log_term(params, log_lambda, k) - log_z);
        if (u < cdf) return k;
        if (cdf >= 1.0 - 1e-12 && k > term_mode(params)) break;
    }
    return k; // u fell in the truncated tail
}

std::vector<int> sample_cmp(const CmpParams& params, int n, std::uint64_t seed,
                            const FitConfig& config) {
    Rng rng(seed);
    std::vector<int> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(sample_cmp(params, rng, config));
    return out;
}

} // namespace handsel
