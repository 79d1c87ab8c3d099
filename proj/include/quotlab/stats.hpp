#pragma once

#include <span>
#include <vector>

#include "quotlab/errors.hpp"

namespace quotlab {

double normal_cdf(double x);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

// Two-sided p for a t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

struct RankSumResult {
    double u;  // Mann-Whitney U of the first sample
    double z;  // normal approximation with tie correction and continuity
    double p;  // two-sided
};

// Mann-Whitney / Wilcoxon rank-sum with midranks for ties. Throws
// DegenerateSamples when every pooled value is identical.
RankSumResult wilcoxon_ranksum(std::span<const double> a, std::span<const double> b);

// Exact two-sided p by enumerating all assignments of the pooled values into
// groups of size |a| and |b|: P(|U' - mu| >= |U - mu|). Cost grows as
// C(|a|+|b|, |a|); intended for small samples.
double wilcoxon_exact_p(std::span<const double> a, std::span<const double> b);

// p_adj = min(1, m * p). Requires m >= pvals.size().
std::vector<double> bonferroni(std::span<const double> pvals, int m);

} // namespace quotlab
