#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "quotlab/deptree.hpp"

namespace quotlab {

enum class QuotLabel : char { Objective, Nonobjective, Unresolved };
enum class ExtractStage : char { Root, ParallelDisambiguated };

std::string_view to_string(QuotLabel l);
std::string_view to_string(ExtractStage s);

// Corpus-level counts of root-verb lemmas (extraction pass 1).
struct VerbDistribution {
    std::map<std::string, long long> counts;
    long long total = 0;

    void add(const std::string& lemma, long long n = 1) {
        counts[lemma] += n;
        total += n;
    }
    // add-zero smoothing: unseen lemmas have probability 0
    double p(const std::string& lemma) const {
        if (total == 0) return 0.0;
        auto it = counts.find(lemma);
        return it == counts.end() ? 0.0 : static_cast<double>(it->second) / total;
    }
    void merge(const VerbDistribution& other) {
        for (const auto& [k, v] : other.counts) counts[k] += v;
        total += other.total;
    }
};

struct QuotativeDictionary {
    std::set<std::string> objective;
    std::set<std::string> nonobjective;

    // Reads objective.txt / nonobjective.txt (one lemma per line) and checks
    // the 32/152/disjoint invariant. Throws DictionaryInvariantViolated.
    static QuotativeDictionary load(const std::filesystem::path& dir);
    static QuotativeDictionary from_streams(std::istream& objective_in,
                                            std::istream& nonobjective_in);

    QuotLabel classify(const std::string& lemma) const;
};

struct QuotativeResult {
    std::string quote_id;
    std::string lemma;
    QuotLabel label = QuotLabel::Unresolved;
    ExtractStage stage = ExtractStage::Root;
};

// The token's supplied lemma (case-folded) or, when the parse did not give
// one, the rule-based lemma of its surface form.
std::string effective_lemma(const DepToken& tok);

// Pass-1 contribution of one tree: counts the root lemma when the root is a
// verb or auxiliary.
void accumulate_root_verb(const DepTree& tree, VerbDistribution& dist);

struct Extraction {
    std::string lemma;
    ExtractStage stage;
};

// Pass 2: picks the quotative among the root and its parallel candidates by
// pass-1 probability. The root wins ties; auxiliaries compete only when no
// lexical verb is present. Throws NoVerbFound.
Extraction extract_quotative(const DepTree& tree, const VerbDistribution& dist,
                             int parallel_depth = 1);

} // namespace quotlab
