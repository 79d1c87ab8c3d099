#include "quotlab/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace quotlab {

std::vector<FrequencyRow> frequency_table(const std::map<std::string, long long>& counts,
                                          size_t k) {
    long long total = 0;
    for (const auto& [name, n] : counts) total += n;

    std::vector<FrequencyRow> rows;
    rows.reserve(counts.size());
    for (const auto& [name, n] : counts)
        rows.push_back({name, n, total > 0 ? 100.0 * static_cast<double>(n) / total : 0.0});
    std::sort(rows.begin(), rows.end(), [](const FrequencyRow& a, const FrequencyRow& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.name < b.name;
    });
    if (rows.size() > k) rows.resize(k);
    return rows;
}

std::map<std::string, long long> count_by(const std::vector<QuoteRecord>& records,
                                          const std::vector<QuotativeResult>& results,
                                          FrequencyKey key, bool include_unresolved) {
    std::map<std::string, long long> counts;
    for (size_t i = 0; i < records.size(); ++i) {
        const QuotativeResult* r = i < results.size() ? &results[i] : nullptr;
        if (key == FrequencyKey::Quotative) {
            if (!r) continue;
            if (r->label == QuotLabel::Unresolved && !include_unresolved) continue;
            counts[r->lemma] += 1;
        } else if (key == FrequencyKey::Speaker) {
            counts[records[i].resolved_speaker] += 1;
        } else {
            counts[records[i].outlet_domain] += 1;
        }
    }
    return counts;
}

std::vector<MonthlySeries> monthly_series_by_outlet(const std::vector<QuoteRecord>& records,
                                                    const std::vector<QuotativeResult>& results) {
    // (outlet, month) -> (nonobjective, classified)
    std::map<std::string, std::map<int, std::pair<long long, long long>>> acc;
    for (size_t i = 0; i < records.size() && i < results.size(); ++i) {
        if (results[i].label == QuotLabel::Unresolved) continue;
        auto& cell = acc[records[i].outlet_domain][records[i].month_index];
        cell.second += 1;
        if (results[i].label == QuotLabel::Nonobjective) cell.first += 1;
    }

    std::vector<MonthlySeries> out;
    for (const auto& [outlet, months] : acc) {
        MonthlySeries s;
        s.key = outlet;
        for (const auto& [m, cell] : months)
            s.points.push_back(
                {m, static_cast<double>(cell.first) / static_cast<double>(cell.second),
                 cell.second});
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

double unit_mean_rate(const MonthlySeries& s) {
    double sum = 0.0;
    for (const auto& p : s.points) sum += p.rate;
    return s.points.empty() ? 0.0 : sum / static_cast<double>(s.points.size());
}

} // namespace

std::vector<MonthlySeries> center_series(const std::vector<MonthlySeries>& series,
                                         CenterLevel level,
                                         const std::map<std::string, std::string>& category_of) {
    std::vector<MonthlySeries> demeaned;
    demeaned.reserve(series.size());
    for (const MonthlySeries& s : series) {
        MonthlySeries d = s;
        double mean = unit_mean_rate(s);
        for (auto& p : d.points) p.rate -= mean;
        demeaned.push_back(std::move(d));
    }
    if (level == CenterLevel::Outlet) return demeaned;

    // group demeaned outlet points by month, weighting by quote counts
    std::map<std::string, std::map<int, std::pair<double, long long>>> acc;
    for (const MonthlySeries& s : demeaned) {
        std::string group = "all";
        if (level == CenterLevel::Category) {
            auto it = category_of.find(s.key);
            group = it != category_of.end() ? it->second : "unknown";
        }
        for (const auto& p : s.points) {
            auto& cell = acc[group][p.month_index];
            cell.first += p.rate * static_cast<double>(p.n_quotes);
            cell.second += p.n_quotes;
        }
    }

    std::vector<MonthlySeries> out;
    for (const auto& [group, months] : acc) {
        MonthlySeries s;
        s.key = group;
        for (const auto& [m, cell] : months)
            s.points.push_back(
                {m, cell.second > 0 ? cell.first / static_cast<double>(cell.second) : 0.0,
                 cell.second});
        out.push_back(std::move(s));
    }
    return out;
}

std::string render_odds_shift(const ShiftEntry& e) {
    char buf[64];
    if (e.odds_ratio >= 1.0)
        std::snprintf(buf, sizeof buf, "1 -> %.4g", e.odds_ratio);
    else
        std::snprintf(buf, sizeof buf, "%.4g -> 1", 1.0 / e.odds_ratio);
    return buf;
}

std::vector<ShiftEntry> quotative_shift(const std::map<std::string, long long>& first12,
                                        const std::map<std::string, long long>& last12) {
    long long n1 = 0, n2 = 0;
    for (const auto& [l, c] : first12) n1 += c;
    for (const auto& [l, c] : last12) n2 += c;

    std::set<std::string> lemmas;
    for (const auto& [l, c] : first12) lemmas.insert(l);
    for (const auto& [l, c] : last12) lemmas.insert(l);

    std::vector<ShiftEntry> out;
    for (const std::string& lemma : lemmas) {
        auto it1 = first12.find(lemma);
        auto it2 = last12.find(lemma);
        double c1 = it1 != first12.end() ? static_cast<double>(it1->second) : 0.0;
        double c2 = it2 != last12.end() ? static_cast<double>(it2->second) : 0.0;
        double d1 = static_cast<double>(n1), d2 = static_cast<double>(n2);
        if (c1 == 0.0 || c2 == 0.0) {  // add-one smoothing, both windows
            c1 += 1.0;
            c2 += 1.0;
            d1 += 1.0;
            d2 += 1.0;
        }
        ShiftEntry e;
        e.lemma = lemma;
        e.pct_point_change = 100.0 * c2 / d2 - 100.0 * c1 / d1;
        e.odds_ratio = (c2 * (d1 - c1)) / (c1 * (d2 - c2));
        e.direction =
            e.pct_point_change >= 0.0 ? ShiftEntry::Direction::Up : ShiftEntry::Direction::Down;
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), [](const ShiftEntry& a, const ShiftEntry& b) {
        double ma = std::fabs(a.pct_point_change), mb = std::fabs(b.pct_point_change);
        if (ma != mb) return ma > mb;
        return a.lemma < b.lemma;
    });
    return out;
}

std::string normalize_quote_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    while (!out.empty() && std::ispunct(static_cast<unsigned char>(out.back())))
        out.pop_back();
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::vector<size_t> matched_subset_indices(const std::vector<QuoteRecord>& corpus,
                                           bool match_by_text) {
    auto family = [](Bias b) -> int {
        switch (b) {
        case Bias::Left:
        case Bias::LeftCenter: return -1;
        case Bias::Right:
        case Bias::RightCenter: return +1;
        default: return 0;
        }
    };
    auto key_of = [&](const QuoteRecord& q) {
        return match_by_text ? normalize_quote_text(q.text) : q.quote_id;
    };

    std::map<std::string, std::pair<bool, bool>> seen;  // key -> (left, right)
    for (const QuoteRecord& q : corpus) {
        int fam = family(q.bias);
        if (fam == 0) continue;
        auto& flags = seen[key_of(q)];
        (fam < 0 ? flags.first : flags.second) = true;
    }

    std::vector<size_t> out;
    for (size_t i = 0; i < corpus.size(); ++i) {
        const QuoteRecord& q = corpus[i];
        if (family(q.bias) == 0) continue;  // least-biased/unknown rows stay out
        auto it = seen.find(key_of(q));
        if (it != seen.end() && it->second.first && it->second.second) out.push_back(i);
    }
    return out;
}

std::vector<QuoteRecord> matched_subset(const std::vector<QuoteRecord>& corpus,
                                        bool match_by_text) {
    std::vector<QuoteRecord> out;
    for (size_t i : matched_subset_indices(corpus, match_by_text)) out.push_back(corpus[i]);
    return out;
}

std::vector<PairwiseTest> category_pairwise_tests(
    const std::map<std::string, std::vector<double>>& outlet_rates_by_category, int m) {
    std::vector<PairwiseTest> out;
    std::vector<double> pvals;
    for (auto ia = outlet_rates_by_category.begin(); ia != outlet_rates_by_category.end(); ++ia) {
        for (auto ib = std::next(ia); ib != outlet_rates_by_category.end(); ++ib) {
            PairwiseTest t;
            t.category_a = ia->first;
            t.category_b = ib->first;
            RankSumResult r = wilcoxon_ranksum(ia->second, ib->second);
            t.u = r.u;
            t.z = r.z;
            t.p = r.p;
            out.push_back(t);
            pvals.push_back(r.p);
        }
    }
    std::vector<double> adj = bonferroni(pvals, m);
    for (size_t i = 0; i < out.size(); ++i) out[i].p_adj = adj[i];
    return out;
}

} // namespace quotlab
