#pragma once

// Statistics the experiments report: Pearson correlation with least-squares
// fit and a two-tailed p from the t distribution, plus the one-sample and
// paired t tests used by the acceptance comparisons. Everything is a pure
// function of its inputs.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace evodrift {

// Pearson product-moment correlation plus the least-squares line y = a + b*x.
// `defined` is false when either input has zero variance; consumers must
// check it instead of reading r from a degenerate sample.
struct CorrelationResult {
    bool defined = false;
    double r = 0.0;
    double p = 1.0;  // two-tailed
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t n = 0;
};

namespace detail {

// Regularized incomplete beta I_x(a,b) by continued fraction (Lentz).
inline double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// P(|T| > |t|) for Student's t with df degrees of freedom.
inline double student_t_two_tailed(double t, double df) {
    if (df <= 0.0) return 1.0;
    return detail::inc_beta(df / 2.0, 0.5, df / (df + t * t));
}

// One-sided upper-tail p for a t statistic: P(T > t).
inline double student_t_upper_tail(double t, double df) {
    const double two = student_t_two_tailed(t, df);
    return t >= 0.0 ? two / 2.0 : 1.0 - two / 2.0;
}

inline double mean_of(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

// Sample standard error of the mean (n-1 denominator); 0 for n < 2 and for a
// sample of identical values (no rounding residue from the summed mean).
inline double standard_error(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    bool identical = true;
    for (double x : xs) {
        if (x != xs[0]) {
            identical = false;
            break;
        }
    }
    if (identical) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

inline CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    CorrelationResult out;
    out.n = x.size();
    if (out.n < 3) return out;
    const double n = static_cast<double>(out.n);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < out.n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < out.n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return out;  // zero variance: flagged undefined
    out.defined = true;
    out.r = sxy / std::sqrt(sxx * syy);
    if (out.r > 1.0) out.r = 1.0;
    if (out.r < -1.0) out.r = -1.0;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    const double df = n - 2.0;
    const double denom = 1.0 - out.r * out.r;
    if (denom <= 0.0) {
        out.p = 0.0;
    } else {
        const double t = out.r * std::sqrt(df / denom);
        out.p = student_t_two_tailed(t, df);
    }
    return out;
}

// One-pass bivariate moment accumulator (Welford update), for correlations
// over pooled data too large to hold as vectors. Merging order is up to the
// caller; batteries fold runs in index order so results are schedule-free.
class StreamingCorrelation {
  public:
    void add(double x, double y) {
        ++n_;
        const double dx = x - mean_x_;
        const double dy = y - mean_y_;
        mean_x_ += dx / static_cast<double>(n_);
        mean_y_ += dy / static_cast<double>(n_);
        sxx_ += dx * (x - mean_x_);
        syy_ += dy * (y - mean_y_);
        sxy_ += dx * (y - mean_y_);
    }

    std::size_t count() const { return n_; }

    CorrelationResult result() const {
        CorrelationResult out;
        out.n = n_;
        if (n_ < 3 || sxx_ <= 0.0 || syy_ <= 0.0) return out;
        out.defined = true;
        out.r = sxy_ / std::sqrt(sxx_ * syy_);
        if (out.r > 1.0) out.r = 1.0;
        if (out.r < -1.0) out.r = -1.0;
        out.slope = sxy_ / sxx_;
        out.intercept = mean_y_ - out.slope * mean_x_;
        const double df = static_cast<double>(n_) - 2.0;
        const double denom = 1.0 - out.r * out.r;
        if (denom <= 0.0) {
            out.p = 0.0;
        } else {
            out.p = student_t_two_tailed(out.r * std::sqrt(df / denom), df);
        }
        return out;
    }

  private:
    std::size_t n_ = 0;
    double mean_x_ = 0.0, mean_y_ = 0.0;
    double sxx_ = 0.0, syy_ = 0.0, sxy_ = 0.0;
};

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p_upper = 1.0;  // one-sided P(T > t): small when the sample mean is above mu0
    double mean = 0.0;
};

// One-sample t test of H0: mean == mu0 against mean > mu0.
inline TTestResult one_sample_t(std::span<const double> xs, double mu0) {
    TTestResult res;
    const std::size_t n = xs.size();
    if (n < 2) return res;
    res.mean = mean_of(xs);
    const double se = standard_error(xs);
    res.df = static_cast<double>(n - 1);
    if (se <= 0.0) {
        res.t = res.mean > mu0 ? std::numeric_limits<double>::infinity()
                               : (res.mean < mu0 ? -std::numeric_limits<double>::infinity() : 0.0);
        res.p_upper = res.mean > mu0 ? 0.0 : 1.0;
        return res;
    }
    res.t = (res.mean - mu0) / se;
    res.p_upper = student_t_upper_tail(res.t, res.df);
    return res;
}

// Paired t test of H0: mean(a - b) == 0 against mean(a - b) > 0.
inline TTestResult paired_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("paired_t: length mismatch");
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    return one_sample_t(diff, 0.0);
}

}  // namespace evodrift
