#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "quotlab/errors.hpp"

namespace quotlab {

// One token of a dependency parse. Indices are 1-based; head 0 marks the root.
struct DepToken {
    int index = 0;
    std::string form;
    std::string lemma;  // empty when the parse did not supply one
    std::string upos;
    int head = 0;
    std::string deprel;
};

// A validated dependency tree for one sentence: exactly one root, all head
// references in range, no cycles.
struct DepTree {
    std::vector<DepToken> tokens;
    std::string sentence_text;
    std::string quote_id;  // from a "# quote_id = <id>" comment, if present

    bool empty() const { return tokens.empty(); }
};

// Throws InvalidTree unless `tree` satisfies the tree invariants.
void validate_tree(const DepTree& tree);

// Parses CoNLL-U text into one DepTree per sentence. Multiword-token ranges
// ("2-4") and empty nodes ("8.1") are skipped. Retains ID, FORM, LEMMA, UPOS,
// HEAD, DEPREL. Throws MalformedConllu on structural problems with the text
// and InvalidTree when a sentence is not a tree.
std::vector<DepTree> parse_conllu(std::string_view text);

// Serializes to CoNLL-U (10 columns, "_" for columns we do not track).
std::string to_conllu(const DepTree& tree);

// The unique token with head 0.
const DepToken& root_of(const DepTree& tree);

bool is_verb_like(const DepToken& tok);

// Verb/AUX tokens hanging off the root through one of the clause-linking
// relations (csubj, ccomp, xcomp, advcl, acl, parataxis, conj, cc, relcl),
// in surface order. Subtyped labels ("acl:relcl") match through their base
// or subtype. `max_depth` widens the search below direct root dependents.
std::vector<const DepToken*> parallel_candidates(const DepTree& tree, int max_depth = 1);

// True when `deprel` names one of the nine clause-linking relations.
bool is_parallel_relation(std::string_view deprel);

// Streams sentence blocks out of a CoNLL-U file without loading it whole.
class ConlluReader {
public:
    explicit ConlluReader(std::istream& in) : in_(&in) {}

    // Fills `out` with the next sentence; false at end of input.
    bool next(DepTree& out);

private:
    std::istream* in_;
    std::string pending_;
};

} // namespace quotlab
