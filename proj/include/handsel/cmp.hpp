#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "handsel/rng.hpp"

namespace handsel {

// Conway-Maxwell-Poisson law with mass proportional to lambda^k / (k!)^nu.
// nu = 1 is Poisson, nu > 1 under-dispersed, nu < 1 over-dispersed, and
// nu = 0 is geometric (which only sums for lambda < 1).
struct CmpParams {
    double lambda = 1.0; // rate-like parameter, > 0
    double nu = 1.0;     // dispersion parameter, >= 0

    bool operator==(const CmpParams&) const = default;
};

struct FitConfig {
    double tolerance = 1e-12;  // relative truncation tolerance for the normalizer
    int max_terms = 10000;     // hard cap on series terms
    double nu_cap = 50.0;      // fits beyond this are numerically a point mass
    int max_iterations = 500;  // simplex iteration budget
    int min_samples = 5;       // fewest samples accepted by fit_mle

    void validate() const;
};

struct FitResult {
    CmpParams params;
    double log_likelihood = 0.0;
    int n_samples = 0;
    bool converged = false;
    bool nu_capped = false; // nu landed on the cap; treat the fit with suspicion
};

// log of Z(lambda, nu) = sum_j lambda^j / (j!)^nu, accumulated in log space.
// Throws divergence for nu = 0, lambda >= 1 and truncation_failure when
// max_terms is reached before the tail is negligible.
double log_normalizer(const CmpParams& params, const FitConfig& config = {});

double log_pmf(const CmpParams& params, int k, const FitConfig& config = {});
double pmf(const CmpParams& params, int k, const FitConfig& config = {});

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

Moments mean_variance(const CmpParams& params, const FitConfig& config = {});

// Sample variance over sample mean (unbiased variance); < 1 flags
// under-dispersion. Needs >= 2 samples and a non-zero mean.
double dispersion_index(std::span<const int> samples);

// Maximum likelihood in (log lambda, log nu) via Nelder-Mead, started from
// the moment match lambda = sample mean, nu = 1. nu is clamped to
// [1e-3, nu_cap]. Rejects degenerate samples (all equal) since nu would be
// unbounded.
FitResult fit_mle(std::span<const int> samples, const FitConfig& config = {});

// Inverse-CDF sampler used by the synthetic generator and the test suites.
int sample_cmp(const CmpParams& params, Rng& rng, const FitConfig& config = {});
std::vector<int> sample_cmp(const CmpParams& params, int n, std::uint64_t seed,
                            const FitConfig& config = {});

} // namespace handsel
