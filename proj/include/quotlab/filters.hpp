#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "quotlab/corpus.hpp"
#include "quotlab/deptree.hpp"

namespace quotlab {

// Stages in pipeline order; the first failing stage is the one recorded.
enum class FilterStage : char { Window, Title, Completeness, Outlet, SpeakerExcluded };

std::string_view to_string(FilterStage s);

struct FilterDecision {
    std::string quote_id;
    FilterStage stage;
    bool kept;
};

struct TitleFilterConfig {
    double threshold = 0.7;  // drop when capitalized-token ratio reaches this
    int min_tokens = 4;      // but never for shorter quotes
};

// Keep unless the quote looks like a title: at least `min_tokens` alphabetic
// tokens and a capitalized-first-letter ratio of `threshold` or more.
bool title_filter(std::string_view text, const TitleFilterConfig& cfg = {});

// Keep iff the root is verb-like (VERB/AUX upos, or carries a copular
// dependent) and some direct root dependent is a subject (nsubj/csubj,
// subtypes included).
bool completeness_filter(const DepTree& tree);

enum class WindowMode : char { Fixed, Rolling };

// Quote volume of one outlet keyed by month index.
struct OutletMonthCounts {
    std::string domain;
    std::vector<std::pair<int, long long>> by_month;  // sorted by month index
};

// True when some 12-month window holds strictly more than `min_quotes`
// quotes. Fixed mode aligns windows to the corpus origin (May-April years);
// rolling mode slides over every consecutive 12 months.
bool has_active_window(const OutletMonthCounts& counts, WindowMode mode, long long min_quotes);

// Domains kept by the outlet filter: rated, US-based, and above the volume
// floor in at least one 12-month window. Records must be metadata-joined.
std::set<std::string> outlet_filter(const std::vector<QuoteRecord>& corpus,
                                    WindowMode mode = WindowMode::Fixed,
                                    long long min_quotes = 20);

// Corpus minus all quotes resolved to `entity_id`.
std::vector<QuoteRecord> exclude_speaker(std::vector<QuoteRecord> corpus,
                                         std::string_view entity_id);

} // namespace quotlab
