// skyjoin/bayes.hpp - Fisher-model match evidence in log space
//
// A detection is a direction on the unit sphere with a concentration weight
// w = 1/sigma^2 (sigma = circular 1-sigma positional error in radians).  The
// evidence that n detections share one true position, relative to them being
// unrelated, is
//
//     B = sinh(w)/w * prod_i w_i/sinh(w_i),   w = |sum_i w_i x_i|.
//
// Survey-grade errors (sigma ~ 0.1 arcsec) put w near 4e12, far past where
// sinh can be evaluated directly, so everything here works with log B.
#pragma once

#include <vector>

#include "skyjoin/double_double.hpp"
#include "skyjoin/errors.hpp"
#include "skyjoin/geometry.hpp"

namespace skyjoin::bayes {

inline constexpr double kLn2 = 0.6931471805599453;

/// Concentration weight of a detection.  Factories validate positivity and
/// finiteness and throw DomainError otherwise.
struct Precision {
    double w = 0.0;
    double sigma_rad = 0.0;

    static Precision from_sigma_rad(double sigma_rad);
    static Precision from_sigma_arcsec(double sigma_arcsec);
    static Precision from_w(double w);
};

/// log(sinh(w)) for w > 0, valid across the full double range.  Above w = 34
/// it switches to w - log 2 + log1p(-exp(-2w)); the two forms agree to better
/// than 1e-13 relative at the seam.  Throws DomainError for w <= 0.
double logsinh(double w);

/// Running weighted sum of detection directions plus the log-product of the
/// per-detection normalization terms, both compensated so that log_bayes_factor
/// is independent of accumulation order to ~1e-30 relative.
struct MatchAccumulator {
    int n = 0;
    DoubleDouble sx, sy, sz;     // sum w_i x_i
    DoubleDouble sum_w;          // sum w_i
    DoubleDouble sum_log_terms;  // sum log(w_i / sinh(w_i))
    // sum w_i (|x_i|^2 - 1): stored directions are unit only to rounding, and
    // at survey weights that rounding enters |sum w_i x_i| multiplied by w.
    // |W|^2 - sum_w * norm_dev restores the exactly-unit value (see
    // log_bayes_factor), keeping the evidence consistent with the closed
    // pair form at the 1e-12 level instead of w*eps.
    DoubleDouble norm_dev;

    void add(const sphere::UnitVector& x, const Precision& p);
};

MatchAccumulator accumulate(MatchAccumulator acc, const sphere::UnitVector& x,
                            const Precision& p);

/// log B of everything accumulated so far.  Exactly 0 for a single detection;
/// DomainError for an empty accumulator; DegenerateConfiguration when the
/// weighted directions cancel (no meaningful combined position — callers treat
/// the tuple as un-matchable).
double log_bayes_factor(const MatchAccumulator& acc);

/// Direction of sum w_i x_i — the maximum-likelihood common position.
/// Throws like log_bayes_factor on empty/degenerate input.
sphere::UnitVector best_position(const MatchAccumulator& acc);

/// Two-detection log B as a closed form in (w1, w2, separation).  Stable for
/// any weight magnitude: for large weights the dominant cancellation
/// w - w1 - w2 is computed as -4 w1 w2 sin^2(psi/2) / (w + w1 + w2).
double pair_log_bf_w(double w1, double w2, double psi_rad);
double pair_log_bf(const Precision& a, const Precision& b, double psi_rad);

/// log B of n coincident detections — the largest value any geometry admits.
double coincident_log_bf(const std::vector<double>& ws);

/// Flat-sky limit of the two-detection log B:
/// log(2/(s1^2+s2^2)) - psi^2 / (2 (s1^2+s2^2)).  Requires exactly two
/// detections (DomainError otherwise); accurate for sigma, psi << 1 rad.
double gaussian_limit_log_bf(const std::vector<double>& sigmas_rad,
                             const std::vector<sphere::UnitVector>& positions);

/// Largest separation at which pair_log_bf_w(w1, w2, psi) can still reach
/// `log_limit`.  Returns 0 when even coincident detections fall short and pi
/// when no separation falls short (log_limit = -inf is the explicit
/// everything-qualifies sentinel).  The returned radius errs on the large
/// side (sound for pruning) and is tight to ~1e-13 rad.
double cutoff_radius_w(double w1, double w2, double log_limit);
double cutoff_radius(double sigma_a_rad, double sigma_b_rad, double log_limit);

}  // namespace skyjoin::bayes
