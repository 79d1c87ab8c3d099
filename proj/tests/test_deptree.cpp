#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "quotlab/deptree.hpp"

using namespace quotlab;

namespace {

// compact builder for hand-made parses: {index, form, lemma, upos, head, deprel}
DepTree make_tree(std::vector<DepToken> tokens, std::string quote_id = "") {
    DepTree t;
    t.tokens = std::move(tokens);
    t.quote_id = std::move(quote_id);
    validate_tree(t);
    return t;
}

const char* kTwoSentences =
    "# quote_id = q1\n"
    "# text = She said hi\n"
    "1\tShe\tshe\tPRON\t_\t_\t2\tnsubj\t_\t_\n"
    "2\tsaid\tsay\tVERB\t_\t_\t0\troot\t_\t_\n"
    "3\thi\thi\tINTJ\t_\t_\t2\tobj\t_\t_\n"
    "\n"
    "# quote_id = q2\n"
    "1\tHi\thi\tINTJ\t_\t_\t0\troot\t_\t_\n";

} // namespace

TEST_CASE("single token sentence parses to a one-token tree") {
    auto trees = parse_conllu("1\tHi\thi\tINTJ\t_\t_\t0\troot\t_\t_\n");
    REQUIRE(trees.size() == 1);
    CHECK(trees[0].tokens.size() == 1);
    CHECK(trees[0].tokens[0].form == "Hi");
    CHECK(trees[0].tokens[0].lemma == "hi");
}

TEST_CASE("blank line separates sentences") {
    auto trees = parse_conllu(kTwoSentences);
    REQUIRE(trees.size() == 2);
    CHECK(trees[0].quote_id == "q1");
    CHECK(trees[0].sentence_text == "She said hi");
    CHECK(trees[1].quote_id == "q2");
    CHECK(trees[1].tokens.size() == 1);
}

TEST_CASE("multiword ranges and empty nodes are skipped") {
    auto trees = parse_conllu(
        "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
        "1\tdo\tdo\tAUX\t_\t_\t3\taux\t_\t_\n"
        "2\tn't\tnot\tPART\t_\t_\t3\tadvmod\t_\t_\n"
        "3\tgo\tgo\tVERB\t_\t_\t0\troot\t_\t_\n"
        "3.1\telided\t_\t_\t_\t_\t_\t_\t_\t_\n");
    REQUIRE(trees.size() == 1);
    CHECK(trees[0].tokens.size() == 3);
}

TEST_CASE("malformed input is rejected") {
    CHECK_THROWS_AS(parse_conllu("1\tonly-four\tcols\tX\n"), MalformedConllu);
    CHECK_THROWS_AS(parse_conllu("1\tHi\thi\tINTJ\t_\t_\tNOPE\troot\t_\t_\n"),
                    MalformedConllu);
}

TEST_CASE("self-headed token is an invalid tree") {
    CHECK_THROWS_AS(parse_conllu("1\tHi\thi\tINTJ\t_\t_\t1\troot\t_\t_\n"), InvalidTree);
}

TEST_CASE("zero or multiple roots rejected") {
    CHECK_THROWS_AS(parse_conllu("1\ta\ta\tDET\t_\t_\t2\tdet\t_\t_\n"
                                 "2\tb\tb\tNOUN\t_\t_\t1\tnmod\t_\t_\n"),
                    InvalidTree);
    CHECK_THROWS_AS(parse_conllu("1\ta\ta\tDET\t_\t_\t0\troot\t_\t_\n"
                                 "2\tb\tb\tNOUN\t_\t_\t0\troot\t_\t_\n"),
                    InvalidTree);
}

TEST_CASE("two-cycle below the root rejected") {
    CHECK_THROWS_AS(parse_conllu("1\ta\ta\tVERB\t_\t_\t0\troot\t_\t_\n"
                                 "2\tb\tb\tNOUN\t_\t_\t3\tnmod\t_\t_\n"
                                 "3\tc\tc\tNOUN\t_\t_\t2\tnmod\t_\t_\n"),
                    InvalidTree);
}

TEST_CASE("root_of finds the head-0 token") {
    auto trees = parse_conllu(kTwoSentences);
    CHECK(root_of(trees[0]).form == "said");
    CHECK(root_of(trees[1]).form == "Hi");

    // POS-agnostic: a noun root is still the root
    DepTree noun = make_tree({{1, "apple", "apple", "NOUN", 0, "root"}});
    CHECK(root_of(noun).form == "apple");
}

TEST_CASE("round trip preserves the retained columns") {
    auto trees = parse_conllu(kTwoSentences);
    for (const DepTree& t : trees) {
        auto back = parse_conllu(to_conllu(t));
        REQUIRE(back.size() == 1);
        CHECK(back[0].quote_id == t.quote_id);
        CHECK(back[0].sentence_text == t.sentence_text);
        REQUIRE(back[0].tokens.size() == t.tokens.size());
        for (size_t i = 0; i < t.tokens.size(); ++i) {
            CHECK(back[0].tokens[i].index == t.tokens[i].index);
            CHECK(back[0].tokens[i].form == t.tokens[i].form);
            CHECK(back[0].tokens[i].lemma == t.tokens[i].lemma);
            CHECK(back[0].tokens[i].upos == t.tokens[i].upos);
            CHECK(back[0].tokens[i].head == t.tokens[i].head);
            CHECK(back[0].tokens[i].deprel == t.tokens[i].deprel);
        }
    }
}

TEST_CASE("parallel candidates: no verbs besides the root") {
    auto trees = parse_conllu(kTwoSentences);
    CHECK(parallel_candidates(trees[0]).empty());
}

TEST_CASE("parallel candidates: parataxis verb off a non-verb root") {
    // "New York is not afraid of terrorists," boasted Rep. Jerrold Nadler
    DepTree t = make_tree({
        {1, "New", "new", "ADJ", 2, "amod"},
        {2, "York", "York", "PROPN", 5, "nsubj"},
        {3, "is", "be", "AUX", 5, "cop"},
        {4, "not", "not", "PART", 5, "advmod"},
        {5, "afraid", "afraid", "ADJ", 0, "root"},
        {6, "of", "of", "ADP", 7, "case"},
        {7, "terrorists", "terrorist", "NOUN", 5, "obl"},
        {8, "boasted", "boast", "VERB", 5, "parataxis"},
        {9, "Nadler", "Nadler", "PROPN", 8, "nsubj"},
    });
    auto cands = parallel_candidates(t);
    REQUIRE(cands.size() == 1);
    CHECK(cands[0]->form == "boasted");
}

TEST_CASE("parallel candidates: conj verb in, nmod noun out") {
    DepTree t = make_tree({
        {1, "He", "he", "PRON", 2, "nsubj"},
        {2, "smiled", "smile", "VERB", 0, "root"},
        {3, "and", "and", "CCONJ", 4, "cc"},
        {4, "added", "add", "VERB", 2, "conj"},
        {5, "emphasis", "emphasis", "NOUN", 2, "nmod"},
    });
    auto cands = parallel_candidates(t);
    REQUIRE(cands.size() == 1);
    CHECK(cands[0]->form == "added");
}

TEST_CASE("candidates never include the root and stay inside the relation set") {
    DepTree t = make_tree({
        {1, "She", "she", "PRON", 2, "nsubj"},
        {2, "said", "say", "VERB", 0, "root"},
        {3, "that", "that", "SCONJ", 5, "mark"},
        {4, "he", "he", "PRON", 5, "nsubj"},
        {5, "lied", "lie", "VERB", 2, "ccomp"},
        {6, "smiling", "smile", "VERB", 2, "advcl"},
    });
    auto cands = parallel_candidates(t);
    REQUIRE(cands.size() == 2);
    for (const DepToken* c : cands) {
        CHECK(c->head == 2);
        CHECK(is_parallel_relation(c->deprel));
        CHECK(c->index != root_of(t).index);
    }
    // surface order
    CHECK(cands[0]->form == "lied");
    CHECK(cands[1]->form == "smiling");
}

TEST_CASE("subtyped relations match through base or subtype") {
    CHECK(is_parallel_relation("acl:relcl"));
    CHECK(is_parallel_relation("conj"));
    CHECK(is_parallel_relation("cc"));
    CHECK_FALSE(is_parallel_relation("nmod"));
    CHECK_FALSE(is_parallel_relation("nsubj"));
}

TEST_CASE("depth knob reaches verbs below direct dependents") {
    DepTree t = make_tree({
        {1, "declared", "declare", "VERB", 0, "root"},
        {2, "saying", "say", "VERB", 1, "ccomp"},
        {3, "winking", "wink", "VERB", 2, "advcl"},
    });
    CHECK(parallel_candidates(t, 1).size() == 1);
    CHECK(parallel_candidates(t, 2).size() == 2);
}

TEST_CASE("streaming reader yields the same trees as whole-buffer parsing") {
    std::istringstream in(kTwoSentences);
    ConlluReader reader(in);
    DepTree t;
    std::vector<DepTree> streamed;
    while (reader.next(t)) streamed.push_back(t);
    auto parsed = parse_conllu(kTwoSentences);
    REQUIRE(streamed.size() == parsed.size());
    for (size_t i = 0; i < streamed.size(); ++i) {
        CHECK(streamed[i].quote_id == parsed[i].quote_id);
        CHECK(streamed[i].tokens.size() == parsed[i].tokens.size());
    }
}
