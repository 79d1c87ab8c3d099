#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "quotlab/errors.hpp"

namespace quotlab {

enum class Bias : char { Left, LeftCenter, LeastBiased, RightCenter, Right, Unknown };
enum class Party : char { Democratic, Republican, Other, Unknown };

std::string_view to_string(Bias b);
std::string_view to_string(Party p);
Bias bias_from_string(std::string_view s);    // "left" | "left-center" | ...
Party party_from_string(std::string_view s);  // "D" | "R" | "O"
std::string ascii_lower_domain(std::string_view s);

// Months since May 2013; negative before that.
constexpr int kOriginYear = 2013;
constexpr int kOriginMonth = 5;
constexpr int kDefaultWindowEnd = 83;  // April 2020

constexpr int month_index_of(int year, int month) {
    return 12 * (year - kOriginYear) + (month - kOriginMonth);
}

struct QuoteRecord {
    std::string quote_id;
    std::string text;
    int year = 0, month = 0, day = 0;
    std::string outlet_domain;  // lowercased hostname
    std::vector<std::string> speaker_candidates;
    std::string resolved_speaker;  // empty until resolution
    int month_index = 0;

    // filled by join_metadata; Unknown until then
    Bias bias = Bias::Unknown;
    std::string country;
    Party party = Party::Unknown;

    bool in_window(int first = 0, int last = kDefaultWindowEnd) const {
        return month_index >= first && month_index <= last;
    }
};

struct OutletMeta {
    std::string domain;
    Bias bias = Bias::Unknown;
    std::string country;  // ISO-3166 alpha-2
};

struct SpeakerMeta {
    std::string entity_id;
    Party party = Party::Unknown;
    std::string display_name;
};

// One serialized quote object per line: quote_id, text, date "YYYY-MM-DD",
// outlet_domain, speaker_candidates. Throws MalformedRecord.
QuoteRecord parse_quote_line(std::string_view line);

std::string to_quote_line(const QuoteRecord& q);  // one JSON object, no newline

enum class SpeakerOrdering { Lexicographic, NumericSuffix };

// The candidate smallest under byte-wise lexicographic order (default), or
// under (letter prefix, numeric suffix) when configured. Deterministic and
// permutation-invariant. Throws EmptyCandidates.
const std::string& resolve_speaker(std::span<const std::string> candidates,
                                   SpeakerOrdering ordering = SpeakerOrdering::Lexicographic);

// CSV loaders. Headers are validated; bias/party values must come from the
// documented vocabularies.
std::vector<OutletMeta> load_outlet_ratings(std::istream& in);
std::vector<SpeakerMeta> load_speakers(std::istream& in);

using RatingsTable = std::unordered_map<std::string, OutletMeta>;
using SpeakersTable = std::unordered_map<std::string, SpeakerMeta>;

RatingsTable index_ratings(std::vector<OutletMeta> rows);     // throws on duplicate domain
SpeakersTable index_speakers(std::vector<SpeakerMeta> rows);  // throws on duplicate id

// Resolves each record's speaker and attaches outlet bias/country and speaker
// party. Unknown outlets or speakers are tagged Unknown, never dropped.
void join_metadata(std::vector<QuoteRecord>& quotes, const RatingsTable& ratings,
                   const SpeakersTable& speakers,
                   SpeakerOrdering ordering = SpeakerOrdering::Lexicographic);
void join_metadata(QuoteRecord& q, const RatingsTable& ratings, const SpeakersTable& speakers,
                   SpeakerOrdering ordering = SpeakerOrdering::Lexicographic);

} // namespace quotlab
