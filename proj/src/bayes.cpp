#include "skyjoin/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace skyjoin::bayes {

namespace {

constexpr DoubleDouble kLn2DD{6.931471805599452862e-01, 2.3190468138462995584e-17};

// Above this, sinh(w) = e^w / 2 to full double precision arithmetic-wise and
// the asymptotic branch is both safe and exact.
constexpr double kLogSinhSwitch = 34.0;

DoubleDouble logsinh_dd(const DoubleDouble& w) {
    if (w.hi > kLogSinhSwitch) {
        DoubleDouble r = dd::sub(w, kLn2DD);
        const double tail = (w.hi < 350.0) ? std::log1p(-std::exp(-2.0 * w.hi)) : 0.0;
        return dd::add(r, tail);
    }
    const double base = std::log(std::sinh(w.hi));
    const double corr = w.lo / std::tanh(w.hi);  // d/dw log(sinh) = coth
    return dd::add(DoubleDouble::from(base), corr);
}

DoubleDouble log_dd(const DoubleDouble& w) {
    return dd::add(DoubleDouble::from(std::log(w.hi)), w.lo / w.hi);
}

// log(w / sinh(w)) assembled so the linear-in-w part is carried exactly; the
// accumulator relies on it cancelling against logsinh(|sum w x|) for large
// weights.
DoubleDouble log_w_over_sinh_dd(double w) {
    if (w > kLogSinhSwitch) {
        DoubleDouble r = dd::add(DoubleDouble::from(std::log(w)), -w);
        r = dd::add(r, kLn2DD);
        if (w < 350.0) r = dd::add(r, -std::log1p(-std::exp(-2.0 * w)));
        return r;
    }
    return DoubleDouble::from(std::log(w) - std::log(std::sinh(w)));
}

void require_positive_finite(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(what) + " must be positive and finite");
    }
}

// |sum w_i x_i| with every x_i pinned to unit length: the raw norm carries
// sum_w * norm_dev of direction-normalization noise (identity:
// |W|^2_raw = S^2 + S * sum w_i(|x_i|^2 - 1) - sum_{i<j} w_i w_j |x_i - x_j|^2).
DoubleDouble weight_norm_dd(const MatchAccumulator& acc) {
    DoubleDouble n2 = dd::mul(acc.sx, acc.sx);
    n2 = dd::add(n2, dd::mul(acc.sy, acc.sy));
    n2 = dd::add(n2, dd::mul(acc.sz, acc.sz));
    n2 = dd::sub(n2, dd::mul(acc.sum_w, acc.norm_dev));
    if (n2.hi < 0.0) return {};
    return dd::sqrt(n2);
}

}  // namespace

Precision Precision::from_sigma_rad(double sigma_rad) {
    require_positive_finite(sigma_rad, "sigma");
    const double w = 1.0 / (sigma_rad * sigma_rad);
    if (!std::isfinite(w)) throw DomainError("sigma is too small: weight overflows");
    return Precision{w, sigma_rad};
}

Precision Precision::from_sigma_arcsec(double sigma_arcsec) {
    require_positive_finite(sigma_arcsec, "sigma");
    return from_sigma_rad(sigma_arcsec * sphere::kArcsecRad);
}

Precision Precision::from_w(double w) {
    require_positive_finite(w, "weight");
    return Precision{w, 1.0 / std::sqrt(w)};
}

double logsinh(double w) {
    if (!(w > 0.0) || !std::isfinite(w)) {
        throw DomainError("logsinh requires w > 0");
    }
    if (w > kLogSinhSwitch) {
        return w - kLn2 + std::log1p(-std::exp(-2.0 * w));
    }
    return std::log(std::sinh(w));
}

void MatchAccumulator::add(const sphere::UnitVector& x, const Precision& p) {
    require_positive_finite(p.w, "weight");
    sx = dd::add(sx, dd::two_prod(p.w, x.x));
    sy = dd::add(sy, dd::two_prod(p.w, x.y));
    sz = dd::add(sz, dd::two_prod(p.w, x.z));
    sum_w = dd::add(sum_w, p.w);
    sum_log_terms = dd::add(sum_log_terms, log_w_over_sinh_dd(p.w));
    DoubleDouble nsq = dd::two_prod(x.x, x.x);
    nsq = dd::add(nsq, dd::two_prod(x.y, x.y));
    nsq = dd::add(nsq, dd::two_prod(x.z, x.z));
    norm_dev = dd::add(norm_dev, dd::mul(dd::add(nsq, -1.0), p.w));
    ++n;
}

MatchAccumulator accumulate(MatchAccumulator acc, const sphere::UnitVector& x,
                            const Precision& p) {
    acc.add(x, p);
    return acc;
}

double log_bayes_factor(const MatchAccumulator& acc) {
    if (acc.n < 1) throw DomainError("log_bayes_factor on an empty accumulator");
    if (acc.n == 1) return 0.0;
    const DoubleDouble w = weight_norm_dd(acc);
    if (!(w.hi > acc.sum_w.hi * 1e-12)) {
        throw DegenerateConfiguration("weighted detection directions cancel");
    }
    DoubleDouble r = logsinh_dd(w);
    r = dd::sub(r, log_dd(w));
    r = dd::add(r, acc.sum_log_terms);
    return r.value();
}

sphere::UnitVector best_position(const MatchAccumulator& acc) {
    if (acc.n < 1) throw DomainError("best_position on an empty accumulator");
    const DoubleDouble w = weight_norm_dd(acc);
    if (!(w.hi > acc.sum_w.hi * 1e-12)) {
        throw DegenerateConfiguration("weighted detection directions cancel");
    }
    return sphere::UnitVector::of(acc.sx.value() / w.hi, acc.sy.value() / w.hi,
                                  acc.sz.value() / w.hi);
}

double pair_log_bf_w(double w1, double w2, double psi_rad) {
    require_positive_finite(w1, "weight");
    require_positive_finite(w2, "weight");
    if (!(psi_rad >= 0.0) || !std::isfinite(psi_rad)) {
        throw DomainError("separation must be in [0, pi]");
    }
    const double psi = std::min(psi_rad, sphere::kPi);
    const double sh = std::sin(0.5 * psi);
    const double ch = std::cos(0.5 * psi);
    // w^2 = w1^2 + w2^2 + 2 w1 w2 cos(psi), rearranged to stay positive and
    // cancellation-free over the whole range.
    const double d = w1 - w2;
    const double wsq = d * d + 4.0 * w1 * w2 * ch * ch;
    const double w = std::sqrt(wsq);
    const double s = w1 + w2;
    if (w < 1e-6) {
        // sinh(w)/w = 1 + w^2/6 + w^4/120 + ...
        return std::log1p(wsq / 6.0 * (1.0 + wsq / 20.0)) + std::log(w1) - logsinh(w1) +
               std::log(w2) - logsinh(w2);
    }
    if (w1 > 40.0 && w2 > 40.0 && w > 40.0) {
        // All logsinh terms are in the asymptotic regime; the near-total
        // cancellation w - w1 - w2 is computed exactly from
        // w^2 - s^2 = -4 w1 w2 sin^2(psi/2).
        const double dw = -4.0 * w1 * w2 * sh * sh / (w + s);
        return dw + kLn2 + std::log(w1) + std::log(w2) - std::log(w);
    }
    return logsinh(w) - std::log(w) + std::log(w1) - logsinh(w1) + std::log(w2) -
           logsinh(w2);
}

double pair_log_bf(const Precision& a, const Precision& b, double psi_rad) {
    return pair_log_bf_w(a.w, b.w, psi_rad);
}

double coincident_log_bf(const std::vector<double>& ws) {
    if (ws.empty()) throw DomainError("coincident_log_bf needs at least one weight");
    MatchAccumulator acc;
    const sphere::UnitVector x{1.0, 0.0, 0.0};
    for (double w : ws) acc.add(x, Precision::from_w(w));
    return acc.n == 1 ? 0.0 : log_bayes_factor(acc);
}

double gaussian_limit_log_bf(const std::vector<double>& sigmas_rad,
                             const std::vector<sphere::UnitVector>& positions) {
    if (sigmas_rad.size() != 2 || positions.size() != 2) {
        throw DomainError("the flat-sky closed form is defined for exactly two detections");
    }
    require_positive_finite(sigmas_rad[0], "sigma");
    require_positive_finite(sigmas_rad[1], "sigma");
    const double psi = sphere::angular_distance(positions[0], positions[1]);
    const double s = sigmas_rad[0] * sigmas_rad[0] + sigmas_rad[1] * sigmas_rad[1];
    return std::log(2.0 / s) - psi * psi / (2.0 * s);
}

double cutoff_radius_w(double w1, double w2, double log_limit) {
    require_positive_finite(w1, "weight");
    require_positive_finite(w2, "weight");
    if (std::isnan(log_limit)) throw DomainError("log limit must not be NaN");
    if (log_limit == -std::numeric_limits<double>::infinity()) return sphere::kPi;
    if (!(pair_log_bf_w(w1, w2, 0.0) >= log_limit)) return 0.0;
    if (pair_log_bf_w(w1, w2, sphere::kPi) >= log_limit) return sphere::kPi;
    double lo = 0.0;    // qualifies
    double hi = sphere::kPi;  // does not
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        if (pair_log_bf_w(w1, w2, mid) >= log_limit) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;  // the large side: pruning beyond it is sound
}

double cutoff_radius(double sigma_a_rad, double sigma_b_rad, double log_limit) {
    const Precision a = Precision::from_sigma_rad(sigma_a_rad);
    const Precision b = Precision::from_sigma_rad(sigma_b_rad);
    return cutoff_radius_w(a.w, b.w, log_limit);
}

}  // namespace skyjoin::bayes
