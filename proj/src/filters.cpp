#include "quotlab/filters.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace quotlab {

std::string_view to_string(FilterStage s) {
    switch (s) {
    case FilterStage::Window: return "window";
    case FilterStage::Title: return "title";
    case FilterStage::Completeness: return "completeness";
    case FilterStage::Outlet: return "outlet";
    case FilterStage::SpeakerExcluded: return "speaker-excluded";
    }
    return "?";
}

bool title_filter(std::string_view text, const TitleFilterConfig& cfg) {
    int alpha_tokens = 0;
    int capitalized = 0;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i == start) break;
        std::string_view tok = text.substr(start, i - start);
        // strip surrounding punctuation so "terrorists," counts as a word
        while (!tok.empty() && !std::isalnum(static_cast<unsigned char>(tok.front())))
            tok.remove_prefix(1);
        while (!tok.empty() && !std::isalnum(static_cast<unsigned char>(tok.back())))
            tok.remove_suffix(1);
        if (tok.empty() || !std::isalpha(static_cast<unsigned char>(tok.front()))) continue;
        ++alpha_tokens;
        if (std::isupper(static_cast<unsigned char>(tok.front()))) ++capitalized;
    }
    if (alpha_tokens < cfg.min_tokens) return true;
    double ratio = static_cast<double>(capitalized) / alpha_tokens;
    return ratio < cfg.threshold;
}

bool completeness_filter(const DepTree& tree) {
    const DepToken& root = root_of(tree);

    bool root_verbish = is_verb_like(root);
    bool has_subject = false;
    for (const DepToken& t : tree.tokens) {
        if (t.head != root.index) continue;
        std::string_view rel = t.deprel;
        std::string_view base = rel.substr(0, rel.find(':'));
        if (!root_verbish && rel == "cop") root_verbish = true;
        if (base == "nsubj" || base == "csubj") has_subject = true;
    }
    return root_verbish && has_subject;
}

bool has_active_window(const OutletMonthCounts& counts, WindowMode mode, long long min_quotes) {
    if (counts.by_month.empty()) return false;

    if (mode == WindowMode::Fixed) {
        // windows [12k, 12k+11]; floor-divide handles negative month indices
        std::map<int, long long> per_window;
        for (auto [m, n] : counts.by_month) {
            int k = m >= 0 ? m / 12 : -((-m + 11) / 12);
            per_window[k] += n;
        }
        for (auto [k, n] : per_window)
            if (n > min_quotes) return true;
        return false;
    }

    // Rolling: two-pointer sum over the sorted month counts.
    const auto& bm = counts.by_month;
    long long sum = 0;
    size_t lo = 0;
    for (size_t hi = 0; hi < bm.size(); ++hi) {
        sum += bm[hi].second;
        while (bm[hi].first - bm[lo].first >= 12) sum -= bm[lo++].second;
        if (sum > min_quotes) return true;
    }
    return false;
}

std::set<std::string> outlet_filter(const std::vector<QuoteRecord>& corpus, WindowMode mode,
                                    long long min_quotes) {
    // domain -> month -> count, in deterministic key order
    std::map<std::string, std::map<int, long long>> volume;
    std::map<std::string, std::pair<Bias, std::string>> meta;
    for (const QuoteRecord& q : corpus) {
        volume[q.outlet_domain][q.month_index] += 1;
        meta.emplace(q.outlet_domain, std::make_pair(q.bias, q.country));
    }

    std::set<std::string> retained;
    for (const auto& [domain, months] : volume) {
        const auto& [bias, country] = meta.at(domain);
        if (bias == Bias::Unknown || country != "US") continue;
        OutletMonthCounts counts{domain, {months.begin(), months.end()}};
        if (has_active_window(counts, mode, min_quotes)) retained.insert(domain);
    }
    return retained;
}

std::vector<QuoteRecord> exclude_speaker(std::vector<QuoteRecord> corpus,
                                         std::string_view entity_id) {
    std::erase_if(corpus,
                  [&](const QuoteRecord& q) { return q.resolved_speaker == entity_id; });
    return corpus;
}

} // namespace quotlab
