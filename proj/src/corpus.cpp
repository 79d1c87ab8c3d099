#include "quotlab/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <istream>

#include <json.hpp>

namespace quotlab {

using nlohmann::json;

std::string_view to_string(Bias b) {
    switch (b) {
    case Bias::Left: return "left";
    case Bias::LeftCenter: return "left-center";
    case Bias::LeastBiased: return "least-biased";
    case Bias::RightCenter: return "right-center";
    case Bias::Right: return "right";
    case Bias::Unknown: break;
    }
    return "unknown";
}

std::string_view to_string(Party p) {
    switch (p) {
    case Party::Democratic: return "D";
    case Party::Republican: return "R";
    case Party::Other: return "O";
    case Party::Unknown: break;
    }
    return "unknown";
}

Bias bias_from_string(std::string_view s) {
    if (s == "left") return Bias::Left;
    if (s == "left-center") return Bias::LeftCenter;
    if (s == "least-biased") return Bias::LeastBiased;
    if (s == "right-center") return Bias::RightCenter;
    if (s == "right") return Bias::Right;
    throw MalformedRecord("unknown bias value: " + std::string(s));
}

Party party_from_string(std::string_view s) {
    if (s == "D") return Party::Democratic;
    if (s == "R") return Party::Republican;
    if (s == "O") return Party::Other;
    throw MalformedRecord("unknown party value: " + std::string(s));
}

std::string ascii_lower_domain(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

namespace {

// Annotated artifacts may carry "unknown"; raw ratings/speakers may not.
Bias bias_from_annotation(std::string_view s) {
    return s == "unknown" ? Bias::Unknown : bias_from_string(s);
}

Party party_from_annotation(std::string_view s) {
    return s == "unknown" ? Party::Unknown : party_from_string(s);
}

void parse_date(std::string_view date, QuoteRecord& q) {
    auto field = [&](size_t pos, size_t len, int& out) {
        auto sub = date.substr(pos, len);
        auto [p, ec] = std::from_chars(sub.data(), sub.data() + sub.size(), out);
        if (ec != std::errc{} || p != sub.data() + sub.size())
            throw MalformedRecord("bad date: " + std::string(date));
    };
    if (date.size() != 10 || date[4] != '-' || date[7] != '-')
        throw MalformedRecord("bad date (want YYYY-MM-DD): " + std::string(date));
    field(0, 4, q.year);
    field(5, 2, q.month);
    field(8, 2, q.day);
    if (q.month < 1 || q.month > 12 || q.day < 1 || q.day > 31)
        throw MalformedRecord("date out of range: " + std::string(date));
    q.month_index = month_index_of(q.year, q.month);
}

} // namespace

QuoteRecord parse_quote_line(std::string_view line) {
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
        throw MalformedRecord("not a JSON object: " + std::string(line.substr(0, 80)));

    QuoteRecord q;
    try {
        q.quote_id = obj.at("quote_id").get<std::string>();
        q.text = obj.at("text").get<std::string>();
        parse_date(obj.at("date").get<std::string>(), q);
        q.outlet_domain = ascii_lower_domain(obj.at("outlet_domain").get<std::string>());
        for (const auto& c : obj.at("speaker_candidates"))
            q.speaker_candidates.push_back(c.get<std::string>());
    } catch (const json::exception& e) {
        throw MalformedRecord(std::string("quote record: ") + e.what());
    }
    if (q.text.empty()) throw MalformedRecord("quote " + q.quote_id + ": empty text");
    if (q.speaker_candidates.empty())
        throw MalformedRecord("quote " + q.quote_id + ": no speaker candidates");

    if (obj.contains("resolved_speaker"))
        q.resolved_speaker = obj["resolved_speaker"].get<std::string>();
    if (obj.contains("bias")) q.bias = bias_from_annotation(obj["bias"].get<std::string>());
    if (obj.contains("country")) q.country = obj["country"].get<std::string>();
    if (obj.contains("party")) q.party = party_from_annotation(obj["party"].get<std::string>());
    return q;
}

std::string to_quote_line(const QuoteRecord& q) {
    json obj;
    obj["quote_id"] = q.quote_id;
    obj["text"] = q.text;
    char date[16];
    std::snprintf(date, sizeof date, "%04d-%02d-%02d", q.year, q.month, q.day);
    obj["date"] = date;
    obj["outlet_domain"] = q.outlet_domain;
    obj["speaker_candidates"] = q.speaker_candidates;
    if (!q.resolved_speaker.empty()) obj["resolved_speaker"] = q.resolved_speaker;
    if (q.bias != Bias::Unknown || !q.country.empty() || q.party != Party::Unknown) {
        obj["bias"] = std::string(to_string(q.bias));
        obj["country"] = q.country;
        obj["party"] = std::string(to_string(q.party));
    }
    return obj.dump();
}

namespace {

// NumericSuffix ordering: split "Q1234" into prefix and numeric tail, compare
// (prefix, value, full string) so ids without digits still order totally.
std::tuple<std::string_view, long long, std::string_view> numeric_key(const std::string& id) {
    size_t i = id.size();
    while (i > 0 && id[i - 1] >= '0' && id[i - 1] <= '9') --i;
    long long value = -1;
    if (i < id.size())
        std::from_chars(id.data() + i, id.data() + id.size(), value);
    return {std::string_view(id).substr(0, i), value, std::string_view(id)};
}

} // namespace

const std::string& resolve_speaker(std::span<const std::string> candidates,
                                   SpeakerOrdering ordering) {
    if (candidates.empty()) throw EmptyCandidates("no speaker candidates");
    if (ordering == SpeakerOrdering::Lexicographic)
        return *std::min_element(candidates.begin(), candidates.end());
    return *std::min_element(candidates.begin(), candidates.end(),
                             [](const std::string& a, const std::string& b) {
                                 return numeric_key(a) < numeric_key(b);
                             });
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line, size_t max_fields) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || (line[i] == ',' && out.size() + 1 < max_fields)) {
            out.emplace_back(line.substr(start, i - start));
            start = i + 1;
            if (i == line.size()) break;
        }
    }
    return out;
}

std::string read_header(std::istream& in, std::string_view expect) {
    std::string line;
    if (!std::getline(in, line)) throw MalformedRecord("empty CSV input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expect)
        throw MalformedRecord("bad CSV header, want \"" + std::string(expect) + "\", got \"" +
                              line + "\"");
    return line;
}

} // namespace

std::vector<OutletMeta> load_outlet_ratings(std::istream& in) {
    read_header(in, "domain,bias,country");
    std::vector<OutletMeta> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line, 3);
        if (fields.size() != 3)
            throw MalformedRecord("ratings row needs 3 fields: " + line);
        OutletMeta m;
        m.domain = ascii_lower_domain(fields[0]);
        m.bias = bias_from_string(fields[1]);
        m.country = fields[2];
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<SpeakerMeta> load_speakers(std::istream& in) {
    read_header(in, "entity_id,party,name");
    std::vector<SpeakerMeta> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line, 3);  // name may contain commas
        if (fields.size() != 3)
            throw MalformedRecord("speakers row needs 3 fields: " + line);
        SpeakerMeta m;
        m.entity_id = fields[0];
        m.party = party_from_string(fields[1]);
        m.display_name = fields[2];
        out.push_back(std::move(m));
    }
    return out;
}

RatingsTable index_ratings(std::vector<OutletMeta> rows) {
    RatingsTable table;
    table.reserve(rows.size());
    for (auto& r : rows) {
        std::string key = r.domain;
        if (!table.emplace(key, std::move(r)).second)
            throw MalformedRecord("duplicate domain in ratings: " + key);
    }
    return table;
}

SpeakersTable index_speakers(std::vector<SpeakerMeta> rows) {
    SpeakersTable table;
    table.reserve(rows.size());
    for (auto& r : rows) {
        std::string key = r.entity_id;
        if (!table.emplace(key, std::move(r)).second)
            throw MalformedRecord("duplicate entity_id in speakers: " + key);
    }
    return table;
}

void join_metadata(QuoteRecord& q, const RatingsTable& ratings, const SpeakersTable& speakers,
                   SpeakerOrdering ordering) {
    if (q.resolved_speaker.empty())
        q.resolved_speaker = resolve_speaker(q.speaker_candidates, ordering);
    if (auto it = ratings.find(q.outlet_domain); it != ratings.end()) {
        q.bias = it->second.bias;
        q.country = it->second.country;
    } else {
        q.bias = Bias::Unknown;
        q.country.clear();
    }
    if (auto it = speakers.find(q.resolved_speaker); it != speakers.end())
        q.party = it->second.party;
    else
        q.party = Party::Unknown;
}

void join_metadata(std::vector<QuoteRecord>& quotes, const RatingsTable& ratings,
                   const SpeakersTable& speakers, SpeakerOrdering ordering) {
    for (QuoteRecord& q : quotes) join_metadata(q, ratings, speakers, ordering);
}

} // namespace quotlab
