#include "quotlab/lemmatizer.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

namespace quotlab {

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }
bool is_vowel_y(char c) { return is_vowel(c) || c == 'y'; }

bool ends_with(std::string_view w, std::string_view suf) {
    return w.size() >= suf.size() && w.substr(w.size() - suf.size()) == suf;
}

// Irregular pasts/participles plus the dictionary verbs whose -ed/-ing/-s
// forms the generic suffix rules cannot invert (mostly silent-e stems).
const std::unordered_map<std::string_view, std::string_view>& exception_table() {
    static const std::unordered_map<std::string_view, std::string_view> table = {
    {"added", "add"}, {"adding", "add"}, {"arisen", "arise"}, {"arose", "arise"},
    {"articulated", "articulate"}, {"articulating", "articulate"}, {"assured", "assure"}, {"assuring", "assure"},
    {"ate", "eat"}, {"awoke", "awake"}, {"awoken", "awake"}, {"bade", "bid"},
    {"beat", "beat"}, {"beaten", "beat"}, {"became", "become"}, {"been", "be"},
    {"began", "begin"}, {"begun", "begin"}, {"being", "be"}, {"bent", "bend"},
    {"bet", "bet"}, {"bit", "bite"}, {"bitten", "bite"}, {"bled", "bleed"},
    {"blew", "blow"}, {"blown", "blow"}, {"bore", "bear"}, {"borne", "bear"},
    {"bought", "buy"}, {"bound", "bind"}, {"bred", "breed"}, {"broke", "break"},
    {"broken", "break"}, {"brought", "bring"}, {"built", "build"}, {"came", "come"},
    {"caught", "catch"}, {"ceded", "cede"}, {"ceding", "cede"}, {"challenged", "challenge"},
    {"challenging", "challenge"}, {"chided", "chide"}, {"chiding", "chide"}, {"chimed", "chime"},
    {"chiming", "chime"}, {"chose", "choose"}, {"chosen", "choose"}, {"chuckled", "chuckle"},
    {"chuckling", "chuckle"}, {"cited", "cite"}, {"citing", "cite"}, {"clung", "cling"},
    {"conceded", "concede"}, {"conceding", "concede"}, {"concluded", "conclude"}, {"concluding", "conclude"},
    {"confided", "confide"}, {"confiding", "confide"}, {"cost", "cost"}, {"crept", "creep"},
    {"cut", "cut"}, {"dealt", "deal"}, {"declared", "declare"}, {"declaring", "declare"},
    {"derided", "deride"}, {"deriding", "deride"}, {"described", "describe"}, {"describing", "describe"},
    {"did", "do"}, {"died", "die"}, {"dies", "die"}, {"disagreed", "disagree"},
    {"done", "do"}, {"dove", "dive"}, {"drank", "drink"}, {"drawn", "draw"},
    {"dreamt", "dream"}, {"drew", "draw"}, {"driven", "drive"}, {"drove", "drive"},
    {"drunk", "drink"}, {"dug", "dig"}, {"dying", "die"}, {"eaten", "eat"},
    {"elaborated", "elaborate"}, {"elaborating", "elaborate"}, {"exploded", "explode"}, {"exploding", "explode"},
    {"fed", "feed"}, {"fell", "fall"}, {"felt", "feel"}, {"fired", "fire"},
    {"firing", "fire"}, {"fled", "flee"}, {"flew", "fly"}, {"flown", "fly"},
    {"flung", "fling"}, {"forbade", "forbid"}, {"forbidden", "forbid"}, {"forgave", "forgive"},
    {"forgiven", "forgive"}, {"forgot", "forget"}, {"forgotten", "forget"}, {"fought", "fight"},
    {"found", "find"}, {"froze", "freeze"}, {"frozen", "freeze"}, {"fumed", "fume"},
    {"fuming", "fume"}, {"gave", "give"}, {"given", "give"}, {"gone", "go"},
    {"got", "get"}, {"gotten", "get"}, {"grew", "grow"}, {"griped", "gripe"},
    {"griping", "gripe"}, {"ground", "grind"}, {"grown", "grow"}, {"grumbled", "grumble"},
    {"grumbling", "grumble"}, {"had", "have"}, {"has", "have"}, {"heard", "hear"},
    {"held", "hold"}, {"hid", "hide"}, {"hidden", "hide"}, {"hung", "hang"},
    {"hurt", "hurt"}, {"implored", "implore"}, {"imploring", "implore"}, {"indicated", "indicate"},
    {"indicating", "indicate"}, {"interrogated", "interrogate"}, {"interrogating", "interrogate"}, {"intoned", "intone"},
    {"intoning", "intone"}, {"is", "be"}, {"joked", "joke"}, {"joking", "joke"},
    {"kept", "keep"}, {"knelt", "kneel"}, {"knew", "know"}, {"known", "know"},
    {"laid", "lay"}, {"lain", "lie"}, {"lay", "lie"}, {"leapt", "leap"},
    {"lectured", "lecture"}, {"lecturing", "lecture"}, {"led", "lead"}, {"left", "leave"},
    {"lent", "lend"}, {"let", "let"}, {"lied", "lie"}, {"lies", "lie"},
    {"lit", "light"}, {"lost", "lose"}, {"lying", "lie"}, {"made", "make"},
    {"meant", "mean"}, {"met", "meet"}, {"noted", "note"}, {"noting", "note"},
    {"paid", "pay"}, {"piled", "pile"}, {"piling", "pile"}, {"punctuated", "punctuate"},
    {"punctuating", "punctuate"}, {"put", "put"}, {"quit", "quit"}, {"quoted", "quote"},
    {"quoting", "quote"}, {"ran", "run"}, {"rang", "ring"}, {"reassured", "reassure"},
    {"reassuring", "reassure"}, {"rebuked", "rebuke"}, {"rebuking", "rebuke"}, {"recited", "recite"},
    {"reciting", "recite"}, {"reiterated", "reiterate"}, {"reiterating", "reiterate"}, {"restated", "restate"},
    {"restating", "restate"}, {"ridden", "ride"}, {"risen", "rise"}, {"rode", "ride"},
    {"rose", "rise"}, {"rung", "ring"}, {"said", "say"}, {"sang", "sing"},
    {"sank", "sink"}, {"sat", "sit"}, {"saw", "see"}, {"seen", "see"},
    {"sent", "send"}, {"set", "set"}, {"shaken", "shake"}, {"shared", "share"},
    {"sharing", "share"}, {"shed", "shed"}, {"shone", "shine"}, {"shook", "shake"},
    {"shot", "shoot"}, {"shown", "show"}, {"shrank", "shrink"}, {"shrunk", "shrink"},
    {"shut", "shut"}, {"slept", "sleep"}, {"slid", "slide"}, {"slung", "sling"},
    {"smiled", "smile"}, {"smiling", "smile"}, {"sold", "sell"}, {"sought", "seek"},
    {"spat", "spit"}, {"speculated", "speculate"}, {"speculating", "speculate"}, {"sped", "speed"},
    {"spent", "spend"}, {"split", "split"}, {"spoke", "speak"}, {"spoken", "speak"},
    {"sprang", "spring"}, {"spread", "spread"}, {"sprung", "spring"}, {"spun", "spin"},
    {"stated", "state"}, {"stating", "state"}, {"stole", "steal"}, {"stolen", "steal"},
    {"stood", "stand"}, {"struck", "strike"}, {"stuck", "stick"}, {"stung", "sting"},
    {"sung", "sing"}, {"sunk", "sink"}, {"swam", "swim"}, {"swept", "sweep"},
    {"swore", "swear"}, {"sworn", "swear"}, {"swum", "swim"}, {"swung", "swing"},
    {"taken", "take"}, {"taught", "teach"}, {"teed", "tee"}, {"thought", "think"},
    {"threw", "throw"}, {"thrown", "throw"}, {"tied", "tie"}, {"ties", "tie"},
    {"told", "tell"}, {"took", "take"}, {"tore", "tear"}, {"torn", "tear"},
    {"trod", "tread"}, {"tying", "tie"}, {"underscored", "underscore"}, {"underscoring", "underscore"},
    {"understood", "understand"}, {"was", "be"}, {"went", "go"}, {"wept", "weep"},
    {"were", "be"}, {"whined", "whine"}, {"whining", "whine"}, {"woke", "wake"},
    {"woken", "wake"}, {"won", "win"}, {"wore", "wear"}, {"worn", "wear"},
    {"wound", "wind"}, {"wove", "weave"}, {"woven", "weave"}, {"writing", "write"},
    {"written", "write"}, {"wrote", "write"}, {"wrung", "wring"},
    };
    return table;
}

// Repairs a stem left by stripping -ed/-ing: undouble a doubled final
// consonant (quipp -> quip) and restore a silent e where the ending forces
// it (announc -> announce, continu -> continue, summariz -> summarize).
std::string fix_stripped_stem(std::string stem) {
    size_t n = stem.size();
    if (n >= 3 && stem[n - 1] == stem[n - 2]) {
        switch (stem[n - 1]) {
        case 'b': case 'd': case 'g': case 'm':
        case 'n': case 'p': case 'r': case 't':
            stem.pop_back();
            return stem;
        default:
            break;
        }
    }
    char last = stem.empty() ? '\0' : stem.back();
    char prev = n >= 2 ? stem[n - 2] : '\0';
    if (last == 'c' || last == 'u' || last == 'v') return stem + 'e';
    if (last == 'z' && prev != 'z') return stem + 'e';
    if (last == 's' && prev != 's') return stem + 'e';
    if (last == 'g' && prev != 'g' &&
        (prev == 'd' || prev == 'r' || prev == 'u' || prev == 'l'))
        return stem + 'e';
    return stem;
}

} // namespace

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string lemmatize_verb(std::string_view form) {
    std::string w = ascii_lower(form);
    const auto& table = exception_table();
    if (auto it = table.find(w); it != table.end()) return std::string(it->second);

    size_t n = w.size();
    if (ends_with(w, "ies") && n > 4) return w.substr(0, n - 3) + 'y';
    if (ends_with(w, "ied") && n > 4) return w.substr(0, n - 3) + 'y';
    if (ends_with(w, "ing") && n >= 6) {
        std::string stem = w.substr(0, n - 3);
        if (std::any_of(stem.begin(), stem.end(), is_vowel_y))
            return fix_stripped_stem(std::move(stem));
        return w;
    }
    if (ends_with(w, "ed") && !ends_with(w, "eed") && n >= 4)
        return fix_stripped_stem(w.substr(0, n - 2));
    if (ends_with(w, "es") && n >= 4) {
        std::string_view stem = std::string_view(w).substr(0, n - 2);
        if (ends_with(stem, "ss") || ends_with(stem, "x") || ends_with(stem, "zz") ||
            ends_with(stem, "ch") || ends_with(stem, "sh") || ends_with(stem, "o"))
            return std::string(stem);
    }
    if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") &&
        !ends_with(w, "is") && n > 3)
        return w.substr(0, n - 1);
    return w;
}

} // namespace quotlab
