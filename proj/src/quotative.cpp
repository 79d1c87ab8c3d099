#include "quotlab/quotative.hpp"

#include <fstream>
#include <vector>

#include "quotlab/lemmatizer.hpp"

namespace quotlab {

std::string_view to_string(QuotLabel l) {
    switch (l) {
    case QuotLabel::Objective: return "objective";
    case QuotLabel::Nonobjective: return "nonobjective";
    case QuotLabel::Unresolved: return "unresolved";
    }
    return "?";
}

std::string_view to_string(ExtractStage s) {
    return s == ExtractStage::Root ? "root" : "parallel";
}

namespace {

std::set<std::string> read_lemma_file(std::istream& in) {
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        out.insert(ascii_lower(line));
    }
    return out;
}

} // namespace

QuotativeDictionary QuotativeDictionary::from_streams(std::istream& objective_in,
                                                      std::istream& nonobjective_in) {
    QuotativeDictionary dict;
    dict.objective = read_lemma_file(objective_in);
    dict.nonobjective = read_lemma_file(nonobjective_in);

    if (dict.objective.size() != 32)
        throw DictionaryInvariantViolated("objective list has " +
                                          std::to_string(dict.objective.size()) +
                                          " lemmas, expected 32");
    if (dict.nonobjective.size() != 152)
        throw DictionaryInvariantViolated("nonobjective list has " +
                                          std::to_string(dict.nonobjective.size()) +
                                          " lemmas, expected 152");
    for (const std::string& lemma : dict.objective)
        if (dict.nonobjective.count(lemma))
            throw DictionaryInvariantViolated("lemma in both lists: " + lemma);
    return dict;
}

QuotativeDictionary QuotativeDictionary::load(const std::filesystem::path& dir) {
    std::ifstream obj(dir / "objective.txt");
    std::ifstream non(dir / "nonobjective.txt");
    if (!obj) throw DictionaryInvariantViolated("cannot open " + (dir / "objective.txt").string());
    if (!non)
        throw DictionaryInvariantViolated("cannot open " + (dir / "nonobjective.txt").string());
    return from_streams(obj, non);
}

QuotLabel QuotativeDictionary::classify(const std::string& lemma) const {
    if (objective.count(lemma)) return QuotLabel::Objective;
    if (nonobjective.count(lemma)) return QuotLabel::Nonobjective;
    return QuotLabel::Unresolved;
}

std::string effective_lemma(const DepToken& tok) {
    if (!tok.lemma.empty()) return ascii_lower(tok.lemma);
    return lemmatize_verb(tok.form);
}

void accumulate_root_verb(const DepTree& tree, VerbDistribution& dist) {
    const DepToken& root = root_of(tree);
    if (is_verb_like(root)) dist.add(effective_lemma(root));
}

Extraction extract_quotative(const DepTree& tree, const VerbDistribution& dist,
                             int parallel_depth) {
    const DepToken& root = root_of(tree);
    std::vector<const DepToken*> pool;
    if (is_verb_like(root)) pool.push_back(&root);
    for (const DepToken* cand : parallel_candidates(tree, parallel_depth))
        pool.push_back(cand);

    if (pool.empty())
        throw NoVerbFound("no verb among root and parallel candidates of quote " +
                          tree.quote_id);

    // Quotatives are lexical verbs; auxiliaries compete only by themselves.
    bool any_lexical = false;
    for (const DepToken* t : pool) any_lexical |= t->upos == "VERB";
    if (any_lexical)
        std::erase_if(pool, [](const DepToken* t) { return t->upos != "VERB"; });

    const DepToken* winner = pool.front();
    double best = dist.p(effective_lemma(*winner));
    for (size_t i = 1; i < pool.size(); ++i) {
        double p = dist.p(effective_lemma(*pool[i]));
        // strict improvement only: the root (when verb-like it is pool[0])
        // and then the leftmost token win ties
        if (p > best) {
            best = p;
            winner = pool[i];
        }
    }
    ExtractStage stage =
        winner == &root ? ExtractStage::Root : ExtractStage::ParallelDisambiguated;
    return {effective_lemma(*winner), stage};
}

} // namespace quotlab
