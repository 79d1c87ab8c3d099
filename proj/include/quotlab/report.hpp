#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "quotlab/corpus.hpp"
#include "quotlab/quotative.hpp"
#include "quotlab/stats.hpp"

namespace quotlab {

struct FrequencyRow {
    std::string name;
    long long count = 0;
    double pct = 0.0;
};

// Top-k by count (descending), names alphabetical within ties. Percentages
// are of the full count mass, so they sum to at most 100.
std::vector<FrequencyRow> frequency_table(const std::map<std::string, long long>& counts,
                                          size_t k);

enum class FrequencyKey : char { Quotative, Speaker, Outlet };

// Counts records by quotative lemma, resolved speaker, or outlet domain.
// Quotative counting consumes the extraction results (dictionary-resolved
// lemmas only unless `include_unresolved`).
std::map<std::string, long long> count_by(const std::vector<QuoteRecord>& records,
                                          const std::vector<QuotativeResult>& results,
                                          FrequencyKey key, bool include_unresolved = false);

struct MonthlySeries {
    struct Point {
        int month_index = 0;
        double rate = 0.0;  // nonobjective / classified
        long long n_quotes = 0;
    };
    std::string key;
    std::vector<Point> points;  // strictly increasing month_index
};

// Per-outlet monthly nonobjective rates from classified records. Records and
// results run in lockstep (same order, Unresolved skipped).
std::vector<MonthlySeries> monthly_series_by_outlet(const std::vector<QuoteRecord>& records,
                                                    const std::vector<QuotativeResult>& results);

enum class CenterLevel : char { Outlet, Category, All };

// Subtracts each unit's own (unweighted) mean rate; Category/All levels then
// average the demeaned points per month, weighted by quote counts. The
// outlet -> category names map drives the Category grouping.
std::vector<MonthlySeries> center_series(const std::vector<MonthlySeries>& series,
                                         CenterLevel level,
                                         const std::map<std::string, std::string>& category_of);

struct ShiftEntry {
    std::string lemma;
    double pct_point_change = 0.0;
    double odds_ratio = 1.0;
    enum class Direction : char { Up, Down } direction = Direction::Up;
};

// Renders "1 -> 17.04" for rising lemmas and "4.89 -> 1" for falling ones.
std::string render_odds_shift(const ShiftEntry& e);

// Per-lemma share changes between two windows: percentage-point change and
// within-window odds ratio. Lemmas missing from one window get add-one
// smoothing in both. Sorted by |change| descending, then lemma.
std::vector<ShiftEntry> quotative_shift(const std::map<std::string, long long>& first12,
                                        const std::map<std::string, long long>& last12);

// Records whose quote appears in at least one left-family outlet (left or
// left-center) AND one right-family outlet. Least-biased rows are excluded
// from the result. Matching is by quote_id; `match_by_text` switches to a
// normalized-text key for corpora without shared ids.
std::vector<QuoteRecord> matched_subset(const std::vector<QuoteRecord>& corpus,
                                        bool match_by_text = false);

// Index form of matched_subset, for callers keeping parallel arrays aligned.
std::vector<size_t> matched_subset_indices(const std::vector<QuoteRecord>& corpus,
                                           bool match_by_text = false);

// casefold, collapse runs of whitespace, strip terminal punctuation
std::string normalize_quote_text(std::string_view text);

struct PairwiseTest {
    std::string category_a, category_b;
    double u = 0.0, z = 0.0, p = 0.0, p_adj = 1.0;
};

// Wilcoxon rank-sum over outlet-level mean rates for every category pair,
// Bonferroni-adjusted with family size m (10 for the five-category family).
std::vector<PairwiseTest> category_pairwise_tests(
    const std::map<std::string, std::vector<double>>& outlet_rates_by_category, int m = 10);

} // namespace quotlab
