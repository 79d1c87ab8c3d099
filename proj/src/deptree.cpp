#include "quotlab/deptree.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <sstream>
#include <unordered_map>

namespace quotlab {

namespace {

constexpr std::array<std::string_view, 9> kParallelRelations = {
    "csubj", "ccomp", "xcomp", "advcl", "acl", "parataxis", "conj", "cc", "relcl"};

bool in_relation_set(std::string_view rel) {
    return std::find(kParallelRelations.begin(), kParallelRelations.end(), rel) !=
           kParallelRelations.end();
}

std::string_view trim_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

bool parse_int(std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

// Parses the token lines of one sentence block. Comment handling is done by
// the caller; `lines` holds only non-comment, non-blank lines.
void parse_token_line(std::string_view line, DepTree& tree) {
    std::array<std::string_view, 10> cols;
    size_t ncols = 0;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == '\t') {
            if (ncols >= cols.size())
                throw MalformedConllu("too many columns: " + std::string(line));
            cols[ncols++] = line.substr(start, i - start);
            start = i + 1;
        }
    }
    if (ncols != 10)
        throw MalformedConllu("expected 10 tab-separated columns, got " +
                              std::to_string(ncols) + ": " + std::string(line));

    std::string_view id = cols[0];
    // Multiword-token ranges ("2-4") and empty nodes ("8.1") carry no head.
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos)
        return;

    DepToken tok;
    if (!parse_int(id, tok.index) || tok.index < 1)
        throw MalformedConllu("bad token ID: " + std::string(id));
    tok.form = std::string(cols[1]);
    tok.lemma = cols[2] == "_" ? std::string() : std::string(cols[2]);
    tok.upos = std::string(cols[3]);
    if (!parse_int(cols[6], tok.head) || tok.head < 0)
        throw MalformedConllu("non-integer HEAD: " + std::string(cols[6]));
    tok.deprel = std::string(cols[7]);
    tree.tokens.push_back(std::move(tok));
}

void parse_comment_line(std::string_view line, DepTree& tree) {
    line.remove_prefix(1);  // '#'
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    for (std::string_view key : {std::string_view("quote_id"), std::string_view("text")}) {
        if (line.substr(0, key.size()) != key) continue;
        std::string_view rest = line.substr(key.size());
        size_t eq = rest.find('=');
        if (eq == std::string_view::npos) continue;
        std::string_view before = rest.substr(0, eq);
        if (before.find_first_not_of(' ') != std::string_view::npos) continue;
        std::string_view value = rest.substr(eq + 1);
        while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
        if (key == "quote_id")
            tree.quote_id = std::string(value);
        else
            tree.sentence_text = std::string(value);
        return;
    }
}

void finalize_sentence(DepTree& tree) {
    if (tree.sentence_text.empty()) {
        std::string joined;
        for (const DepToken& t : tree.tokens) {
            if (!joined.empty()) joined += ' ';
            joined += t.form;
        }
        tree.sentence_text = std::move(joined);
    }
    validate_tree(tree);
}

} // namespace

void validate_tree(const DepTree& tree) {
    if (tree.tokens.empty()) throw InvalidTree("empty sentence");

    std::unordered_map<int, size_t> slot;
    slot.reserve(tree.tokens.size());
    int roots = 0;
    for (size_t i = 0; i < tree.tokens.size(); ++i) {
        const DepToken& t = tree.tokens[i];
        if (!slot.emplace(t.index, i).second)
            throw InvalidTree("duplicate token index " + std::to_string(t.index));
        if (t.head == t.index)
            throw InvalidTree("token " + std::to_string(t.index) + " is its own head");
        if (t.head == 0) ++roots;
    }
    if (roots != 1)
        throw InvalidTree(std::to_string(roots) + " roots (expected exactly 1)");

    for (const DepToken& t : tree.tokens) {
        if (t.head != 0 && !slot.count(t.head))
            throw InvalidTree("head " + std::to_string(t.head) + " of token " +
                              std::to_string(t.index) + " not in sentence");
        // Walk to the root; more steps than tokens means a cycle.
        int cur = t.head;
        size_t steps = 0;
        while (cur != 0) {
            if (++steps > tree.tokens.size())
                throw InvalidTree("cycle through token " + std::to_string(t.index));
            cur = tree.tokens[slot.at(cur)].head;
        }
    }
}

std::vector<DepTree> parse_conllu(std::string_view text) {
    std::vector<DepTree> out;
    DepTree cur;
    bool in_sentence = false;

    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = trim_cr(text.substr(pos, eol - pos));
        pos = eol + 1;

        if (line.empty()) {
            if (in_sentence) {
                finalize_sentence(cur);
                out.push_back(std::move(cur));
                cur = DepTree{};
                in_sentence = false;
            }
            if (pos > text.size()) break;
            continue;
        }
        in_sentence = true;
        if (line.front() == '#')
            parse_comment_line(line, cur);
        else
            parse_token_line(line, cur);
        if (pos > text.size()) break;
    }
    if (in_sentence) {
        finalize_sentence(cur);
        out.push_back(std::move(cur));
    }
    return out;
}

std::string to_conllu(const DepTree& tree) {
    std::ostringstream os;
    if (!tree.quote_id.empty()) os << "# quote_id = " << tree.quote_id << '\n';
    os << "# text = " << tree.sentence_text << '\n';
    for (const DepToken& t : tree.tokens) {
        os << t.index << '\t' << t.form << '\t' << (t.lemma.empty() ? "_" : t.lemma)
           << '\t' << t.upos << "\t_\t_\t" << t.head << '\t' << t.deprel << "\t_\t_\n";
    }
    os << '\n';
    return os.str();
}

const DepToken& root_of(const DepTree& tree) {
    for (const DepToken& t : tree.tokens)
        if (t.head == 0) return t;
    throw InvalidTree("no root token");
}

bool is_verb_like(const DepToken& tok) {
    return tok.upos == "VERB" || tok.upos == "AUX";
}

bool is_parallel_relation(std::string_view deprel) {
    if (in_relation_set(deprel)) return true;
    size_t colon = deprel.find(':');
    if (colon == std::string_view::npos) return false;
    // "acl:relcl" qualifies through either half.
    return in_relation_set(deprel.substr(0, colon)) ||
           in_relation_set(deprel.substr(colon + 1));
}

std::vector<const DepToken*> parallel_candidates(const DepTree& tree, int max_depth) {
    const DepToken& root = root_of(tree);

    // depth of each token below the root, capped at max_depth
    std::unordered_map<int, int> depth;
    depth.reserve(tree.tokens.size());
    depth[root.index] = 0;
    for (int d = 1; d <= max_depth; ++d) {
        for (const DepToken& t : tree.tokens) {
            auto it = depth.find(t.head);
            if (it != depth.end() && it->second == d - 1 && !depth.count(t.index))
                depth[t.index] = d;
        }
    }

    std::vector<const DepToken*> out;
    for (const DepToken& t : tree.tokens) {
        if (t.head == 0) continue;
        auto it = depth.find(t.index);
        if (it == depth.end() || it->second > max_depth) continue;
        if (is_verb_like(t) && is_parallel_relation(t.deprel)) out.push_back(&t);
    }
    // tokens are kept in surface order already, but be explicit about it
    std::sort(out.begin(), out.end(),
              [](const DepToken* a, const DepToken* b) { return a->index < b->index; });
    return out;
}

bool ConlluReader::next(DepTree& out) {
    out = DepTree{};
    bool in_sentence = false;
    std::string line;
    while (true) {
        if (!pending_.empty()) {
            line = std::move(pending_);
            pending_.clear();
        } else if (!std::getline(*in_, line)) {
            break;
        }
        std::string_view sv = trim_cr(line);
        if (sv.empty()) {
            if (in_sentence) {
                finalize_sentence(out);
                return true;
            }
            continue;
        }
        in_sentence = true;
        if (sv.front() == '#')
            parse_comment_line(sv, out);
        else
            parse_token_line(sv, out);
    }
    if (in_sentence) {
        finalize_sentence(out);
        return true;
    }
    return false;
}

} // namespace quotlab
