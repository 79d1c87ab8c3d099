#include "quotlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace quotlab {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
    double front = std::exp(ln_front);
    // use the symmetry that keeps the continued fraction convergent
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) return 1.0;
    if (std::isinf(t)) return 0.0;
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    double x = df / (df + t * t);
    double p = incomplete_beta(0.5 * df, 0.5, x);
    return std::clamp(p, 0.0, 1.0);
}

namespace {

// midranks of the pooled sample plus the tie-size inventory
struct PooledRanks {
    std::vector<double> ranks;          // parallel to the pooled values
    std::vector<long long> tie_sizes;   // one entry per tied group
};

PooledRanks midranks(const std::vector<double>& pooled) {
    size_t n = pooled.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t i, size_t j) { return pooled[i] < pooled[j]; });

    PooledRanks out;
    out.ranks.resize(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        double rank = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (size_t k = i; k <= j; ++k) out.ranks[order[k]] = rank;
        out.tie_sizes.push_back(static_cast<long long>(j - i + 1));
        i = j + 1;
    }
    return out;
}

double u_of_first_sample(std::span<const double> a, const std::vector<double>& ranks) {
    double rank_sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) rank_sum += ranks[i];
    double n1 = static_cast<double>(a.size());
    return rank_sum - n1 * (n1 + 1.0) / 2.0;
}

} // namespace

RankSumResult wilcoxon_ranksum(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DegenerateSamples("empty sample");

    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    PooledRanks pr = midranks(pooled);

    double n1 = static_cast<double>(a.size());
    double n2 = static_cast<double>(b.size());
    double n = n1 + n2;
    double u = u_of_first_sample(a, pr.ranks);
    double mu = n1 * n2 / 2.0;

    double tie_term = 0.0;
    for (long long t : pr.tie_sizes)
        tie_term += static_cast<double>(t) * t * t - static_cast<double>(t);
    double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var <= 0.0)
        throw DegenerateSamples("all pooled values identical; rank-sum test undefined");

    double shift = std::max(std::fabs(u - mu) - 0.5, 0.0);  // continuity correction
    double z = shift / std::sqrt(var);
    if (u < mu) z = -z;
    double p = std::clamp(2.0 * (1.0 - normal_cdf(std::fabs(z))), 0.0, 1.0);
    return {u, z, p};
}

double wilcoxon_exact_p(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DegenerateSamples("empty sample");

    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    PooledRanks pr = midranks(pooled);

    size_t n = pooled.size();
    size_t n1 = a.size();
    double mu = static_cast<double>(n1) * static_cast<double>(n - n1) / 2.0;
    double u_obs = u_of_first_sample(a, pr.ranks);
    double dev_obs = std::fabs(u_obs - mu);

    // iterate over all subsets of size n1 via a selection mask
    std::vector<char> mask(n, 0);
    std::fill(mask.begin(), mask.begin() + static_cast<long>(n1), 1);
    std::sort(mask.begin(), mask.end(), std::greater<char>());

    long long total = 0, extreme = 0;
    do {
        double rank_sum = 0.0;
        for (size_t i = 0; i < n; ++i)
            if (mask[i]) rank_sum += pr.ranks[i];
        double u = rank_sum - static_cast<double>(n1) * (n1 + 1.0) / 2.0;
        ++total;
        if (std::fabs(u - mu) >= dev_obs - 1e-12) ++extreme;
    } while (std::prev_permutation(mask.begin(), mask.end()));

    return static_cast<double>(extreme) / static_cast<double>(total);
}

std::vector<double> bonferroni(std::span<const double> pvals, int m) {
    if (m < static_cast<int>(pvals.size()))
        throw Error("bonferroni: family size m smaller than the number of tests");
    std::vector<double> out;
    out.reserve(pvals.size());
    for (double p : pvals) out.push_back(std::min(1.0, static_cast<double>(m) * p));
    return out;
}

} // namespace quotlab
