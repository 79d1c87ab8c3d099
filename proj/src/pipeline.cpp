#include "quotlab/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "quotlab/deptree.hpp"
#include "quotlab/lemmatizer.hpp"
#include "quotlab/report.hpp"
#include "quotlab/stats.hpp"

namespace quotlab {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// digests

namespace {

constexpr uint64_t kFnvOffset = 1469598103934665603ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

std::string fnv_to_hex(uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace

std::string fnv1a64_hex(std::istream& in) {
    uint64_t h = kFnvOffset;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= kFnvPrime;
        }
        if (!in) break;
    }
    return fnv_to_hex(h);
}

std::string fnv1a64_hex_of_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingUpstreamArtifact("cannot open " + path.string());
    return fnv1a64_hex(in);
}

std::string fnv1a64_hex_of_string(std::string_view s) {
    uint64_t h = kFnvOffset;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= kFnvPrime;
    }
    return fnv_to_hex(h);
}

// ---------------------------------------------------------------------------
// logging

namespace {

int log_level() {
    static int level = [] {
        const char* env = std::getenv("QUOTLAB_LOG");
        if (!env) return 1;
        std::string v = env;
        if (v == "quiet" || v == "0") return 0;
        if (v == "debug" || v == "2") return 2;
        return 1;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "[quotlab] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::fprintf(stderr, "[quotlab] %s\n", msg.c_str());
}

// ---------------------------------------------------------------------------
// deterministic chunked parallelism: results are consumed in input order no
// matter how many worker threads ran

template <typename Result>
void map_lines_chunked(std::istream& in, int threads,
                       const std::function<Result(const std::string&)>& fn,
                       const std::function<void(const std::string&, Result&&)>& consume) {
    threads = std::max(1, threads);
    const size_t chunk_target = static_cast<size_t>(threads) * 4096;

    std::vector<std::string> lines;
    lines.reserve(chunk_target);
    std::vector<Result> results;

    auto flush = [&] {
        if (lines.empty()) return;
        results.resize(lines.size());
        if (threads == 1 || lines.size() < 512) {
            for (size_t i = 0; i < lines.size(); ++i) results[i] = fn(lines[i]);
        } else {
            std::vector<std::thread> pool;
            size_t per = (lines.size() + threads - 1) / threads;
            for (int t = 0; t < threads; ++t) {
                size_t lo = per * static_cast<size_t>(t);
                size_t hi = std::min(lines.size(), lo + per);
                if (lo >= hi) break;
                pool.emplace_back([&, lo, hi] {
                    for (size_t i = lo; i < hi; ++i) results[i] = fn(lines[i]);
                });
            }
            for (auto& th : pool) th.join();
        }
        for (size_t i = 0; i < lines.size(); ++i) consume(lines[i], std::move(results[i]));
        lines.clear();
    };

    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        lines.push_back(line);
        if (lines.size() >= chunk_target) flush();
    }
    flush();
}

// ---------------------------------------------------------------------------
// artifact helpers

constexpr std::string_view kAnnotatedSchema = R"({"schema":"quotlab.annotated.v1"})";
constexpr std::string_view kFilteredSchema = R"({"schema":"quotlab.filtered.v1"})";

std::ifstream open_artifact(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingUpstreamArtifact("missing upstream artifact: " + path.string());
    return in;
}

std::ifstream open_input(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(std::string(what) + " not readable: " + path);
    return in;
}

void expect_schema(std::istream& in, std::string_view schema, const fs::path& path) {
    std::string first;
    if (!std::getline(in, first)) return;  // empty artifact: zero records
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (first != schema)
        throw MissingUpstreamArtifact("unexpected schema line in " + path.string() + ": " +
                                      first);
}

std::ofstream create_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot create " + path.string());
    return out;
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == sep) {
            out.emplace_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

// shortest round-trip representation, locale-free
std::string fmt_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace

// ---------------------------------------------------------------------------
// RunConfig

RunConfig RunConfig::from_json(std::istream& in) {
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError("config is not a JSON object");
    RunConfig cfg;
    auto str = [&](const char* key, std::string& out) {
        if (j.contains(key)) out = j.at(key).get<std::string>();
    };
    str("quotes", cfg.quotes_path);
    str("parses", cfg.parses_path);
    str("ratings", cfg.ratings_path);
    str("speakers", cfg.speakers_path);
    str("dict_dir", cfg.dict_dir);
    str("out", cfg.out_dir);
    if (j.contains("title_threshold")) cfg.title_threshold = j.at("title_threshold");
    if (j.contains("title_min_tokens")) cfg.title_min_tokens = j.at("title_min_tokens");
    if (j.contains("window"))
        cfg.window_mode =
            j.at("window") == "rolling" ? WindowMode::Rolling : WindowMode::Fixed;
    if (j.contains("outlet_min")) cfg.outlet_min = j.at("outlet_min");
    if (j.contains("window_first")) cfg.window_first = j.at("window_first");
    if (j.contains("window_last")) cfg.window_last = j.at("window_last");
    if (j.contains("parallel_depth")) cfg.parallel_depth = j.at("parallel_depth");
    if (j.contains("models")) cfg.models = j.at("models").get<std::vector<std::string>>();
    if (j.contains("exclude_speakers"))
        cfg.exclude_speakers = j.at("exclude_speakers").get<std::vector<std::string>>();
    if (j.contains("speaker_ordering"))
        cfg.speaker_ordering = j.at("speaker_ordering") == "numeric"
                                   ? SpeakerOrdering::NumericSuffix
                                   : SpeakerOrdering::Lexicographic;
    if (j.contains("seed")) cfg.seed = j.at("seed");
    if (j.contains("audit")) cfg.audit = j.at("audit");
    if (j.contains("match_by_text")) cfg.match_by_text = j.at("match_by_text");
    if (j.contains("include_unresolved_in_shift"))
        cfg.include_unresolved_in_shift = j.at("include_unresolved_in_shift");
    return cfg;
}

RunConfig RunConfig::from_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return from_json(in);
}

std::string RunConfig::to_json() const {
    // threads are an execution knob, not semantic config; leaving them out
    // keeps manifests identical across thread counts
    json j;
    j["quotes"] = quotes_path;
    j["parses"] = parses_path;
    j["ratings"] = ratings_path;
    j["speakers"] = speakers_path;
    j["dict_dir"] = dict_dir;
    j["out"] = out_dir;
    j["title_threshold"] = title_threshold;
    j["title_min_tokens"] = title_min_tokens;
    j["window"] = window_mode == WindowMode::Rolling ? "rolling" : "fixed";
    j["outlet_min"] = outlet_min;
    j["window_first"] = window_first;
    j["window_last"] = window_last;
    j["parallel_depth"] = parallel_depth;
    j["models"] = models;
    j["exclude_speakers"] = exclude_speakers;
    j["speaker_ordering"] =
        speaker_ordering == SpeakerOrdering::NumericSuffix ? "numeric" : "lexicographic";
    j["seed"] = seed;
    j["audit"] = audit;
    j["match_by_text"] = match_by_text;
    j["include_unresolved_in_shift"] = include_unresolved_in_shift;
    return j.dump(2);
}

void RunConfig::validate() const {
    if (!(title_threshold > 0.0 && title_threshold <= 1.0))
        throw ConfigError("title_threshold must lie in (0, 1]");
    if (title_min_tokens < 1) throw ConfigError("title_min_tokens must be positive");
    if (outlet_min < 0) throw ConfigError("outlet_min must be nonnegative");
    if (window_first > window_last) throw ConfigError("window_first exceeds window_last");
    if (out_dir.empty()) throw ConfigError("output directory not set");
    for (const auto& [path, what] :
         std::initializer_list<std::pair<std::string, const char*>>{
             {quotes_path, "quotes"},
             {parses_path, "parses"},
             {ratings_path, "ratings"},
             {speakers_path, "speakers"}}) {
        if (!path.empty() && !fs::exists(path))
            throw ConfigError(std::string(what) + " path does not exist: " + path);
    }
    if (!dict_dir.empty() && !fs::exists(dict_dir))
        throw ConfigError("dict_dir does not exist: " + dict_dir);
    static const std::set<std::string> kKnown = {"eq1", "eq2", "eq3", "pooled", "matched"};
    for (const std::string& m : models)
        if (!kKnown.count(m)) throw ConfigError("unknown model: " + m);
}

// ---------------------------------------------------------------------------
// RunManifest

std::string RunManifest::to_json() const {
    json j;
    j["schema"] = "quotlab.manifest.v1";
    j["inputs"] = input_digests;
    j["config"] = json::parse(config_echo);
    json st = json::array();
    for (const auto& [name, c] : stages)
        st.push_back({{"stage", name}, {"input", c.input}, {"kept", c.kept}});
    j["stages"] = st;
    j["outputs"] = output_digests;
    j["quotes_for_fit"] = quotes_for_fit;
    j["fits_attempted"] = fits_attempted;
    return j.dump(2) + "\n";
}

std::string RunManifest::digest() const { return fnv1a64_hex_of_string(to_json()); }

// ---------------------------------------------------------------------------
// stage: ingest

StageCounts stage_ingest(const RunConfig& cfg, RunManifest& manifest) {
    auto quotes_in = open_input(cfg.quotes_path, "quotes");
    auto ratings_in = open_input(cfg.ratings_path, "ratings");
    auto speakers_in = open_input(cfg.speakers_path, "speakers");

    RatingsTable ratings = index_ratings(load_outlet_ratings(ratings_in));
    SpeakersTable speakers = index_speakers(load_speakers(speakers_in));
    log_info("ingest: " + std::to_string(ratings.size()) + " outlet ratings, " +
             std::to_string(speakers.size()) + " speakers");

    fs::path out_path = fs::path(cfg.out_dir) / artifact::kAnnotated;
    auto out = create_output(out_path);
    out << kAnnotatedSchema << '\n';

    StageCounts counts;
    long long line_no = 1;  // after the schema line of the output
    map_lines_chunked<std::string>(
        quotes_in, cfg.threads,
        [&cfg, &ratings, &speakers](const std::string& line) {
            QuoteRecord q = parse_quote_line(line);
            join_metadata(q, ratings, speakers, cfg.speaker_ordering);
            return to_quote_line(q);
        },
        [&](const std::string&, std::string&& annotated) {
            out << annotated << '\n';
            ++counts.input;
            ++counts.kept;
            ++line_no;
        });

    out.close();
    manifest.stages.push_back({"ingest", counts});
    manifest.output_digests[artifact::kAnnotated] = fnv1a64_hex_of_file(out_path);
    return counts;
}

// ---------------------------------------------------------------------------
// stage: filter

namespace {

struct FilterVerdict {
    bool window = false, title = false, completeness = false;
    std::string quote_id;
    std::string domain;
    int month = 0;
    Bias bias = Bias::Unknown;
    std::string country;
    std::string speaker;
};

FilterVerdict judge_record(const RunConfig& cfg,
                           const std::unordered_map<std::string, bool>& completeness,
                           const std::string& line) {
    QuoteRecord q = parse_quote_line(line);
    FilterVerdict v;
    v.quote_id = q.quote_id;
    v.domain = q.outlet_domain;
    v.month = q.month_index;
    v.bias = q.bias;
    v.country = q.country;
    v.speaker = q.resolved_speaker;
    v.window = q.in_window(cfg.window_first, cfg.window_last);
    v.title = title_filter(
        q.text, TitleFilterConfig{cfg.title_threshold, cfg.title_min_tokens});
    auto it = completeness.find(q.quote_id);
    v.completeness = it != completeness.end() && it->second;
    return v;
}

} // namespace

std::vector<StageCounts> stage_filter(const RunConfig& cfg, RunManifest& manifest) {
    fs::path annotated_path = fs::path(cfg.out_dir) / artifact::kAnnotated;

    // pass 0: one completeness verdict per quote_id (first parse wins)
    std::unordered_map<std::string, bool> completeness;
    {
        auto parses_in = open_input(cfg.parses_path, "parses");
        ConlluReader reader(parses_in);
        DepTree tree;
        while (reader.next(tree)) {
            if (tree.quote_id.empty()) continue;
            completeness.emplace(tree.quote_id, completeness_filter(tree));
        }
        log_debug("filter: parsed completeness for " + std::to_string(completeness.size()) +
                  " quotes");
    }

    // pass 1: survivors of window/title/completeness feed the outlet volumes
    std::map<std::string, std::map<int, long long>> volume;
    std::map<std::string, std::pair<Bias, std::string>> domain_meta;
    {
        auto in = open_artifact(annotated_path);
        expect_schema(in, kAnnotatedSchema, annotated_path);
        map_lines_chunked<FilterVerdict>(
            in, cfg.threads,
            [&](const std::string& line) { return judge_record(cfg, completeness, line); },
            [&](const std::string&, FilterVerdict&& v) {
                if (!(v.window && v.title && v.completeness)) return;
                volume[v.domain][v.month] += 1;
                domain_meta.emplace(v.domain, std::make_pair(v.bias, v.country));
            });
    }

    std::set<std::string> retained_domains;
    for (const auto& [domain, months] : volume) {
        const auto& [bias, country] = domain_meta.at(domain);
        if (bias == Bias::Unknown || country != "US") continue;
        OutletMonthCounts counts{domain, {months.begin(), months.end()}};
        if (has_active_window(counts, cfg.window_mode, cfg.outlet_min))
            retained_domains.insert(domain);
    }
    log_info("filter: " + std::to_string(retained_domains.size()) + " outlets retained");

    std::unordered_set<std::string> excluded(cfg.exclude_speakers.begin(),
                                             cfg.exclude_speakers.end());

    // pass 2: final verdicts, filtered artifact, audit log
    fs::path filtered_path = fs::path(cfg.out_dir) / artifact::kFiltered;
    auto out = create_output(filtered_path);
    out << kFilteredSchema << '\n';

    std::ofstream audit;
    if (cfg.audit) {
        audit = create_output(fs::path(cfg.out_dir) / artifact::kAudit);
        audit << "quote_id,stage,kept\n";
    }

    StageCounts window_c, title_c, comp_c, outlet_c, speaker_c;
    {
        auto in = open_artifact(annotated_path);
        expect_schema(in, kAnnotatedSchema, annotated_path);
        map_lines_chunked<FilterVerdict>(
            in, cfg.threads,
            [&](const std::string& line) { return judge_record(cfg, completeness, line); },
            [&](const std::string& line, FilterVerdict&& v) {
                ++window_c.input;
                const char* drop_stage = nullptr;
                if (!v.window) {
                    drop_stage = "window";
                } else {
                    ++window_c.kept;
                    ++title_c.input;
                    if (!v.title) {
                        drop_stage = "title";
                    } else {
                        ++title_c.kept;
                        ++comp_c.input;
                        if (!v.completeness) {
                            drop_stage = "completeness";
                        } else {
                            ++comp_c.kept;
                            ++outlet_c.input;
                            if (!retained_domains.count(v.domain)) {
                                drop_stage = "outlet";
                            } else {
                                ++outlet_c.kept;
                                ++speaker_c.input;
                                if (excluded.count(v.speaker)) {
                                    drop_stage = "speaker-excluded";
                                } else {
                                    ++speaker_c.kept;
                                }
                            }
                        }
                    }
                }
                if (!drop_stage) {
                    out << line << '\n';
                    if (cfg.audit) audit << v.quote_id << ",,true\n";
                } else if (cfg.audit) {
                    audit << v.quote_id << ',' << drop_stage << ",false\n";
                }
            });
    }
    out.close();

    manifest.stages.push_back({"window", window_c});
    manifest.stages.push_back({"title", title_c});
    manifest.stages.push_back({"completeness", comp_c});
    manifest.stages.push_back({"outlet", outlet_c});
    if (!cfg.exclude_speakers.empty())
        manifest.stages.push_back({"speaker-excluded", speaker_c});
    manifest.output_digests[artifact::kFiltered] = fnv1a64_hex_of_file(filtered_path);
    if (cfg.audit) {
        audit.close();
        manifest.output_digests[artifact::kAudit] =
            fnv1a64_hex_of_file(fs::path(cfg.out_dir) / artifact::kAudit);
    }
    return {window_c, title_c, comp_c, outlet_c, speaker_c};
}

// ---------------------------------------------------------------------------
// stage: extract

namespace {

struct ExtractionRow {
    std::string lemma;  // empty when no verb was found
    ExtractStage stage = ExtractStage::Root;
};

} // namespace

StageCounts stage_extract(const RunConfig& cfg, RunManifest& manifest) {
    fs::path filtered_path = fs::path(cfg.out_dir) / artifact::kFiltered;
    QuotativeDictionary dict = QuotativeDictionary::load(cfg.dict_dir);

    // ordered kept ids (the output order) and the kept set
    std::vector<std::string> kept_ids;
    {
        auto in = open_artifact(filtered_path);
        expect_schema(in, kFilteredSchema, filtered_path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            kept_ids.push_back(parse_quote_line(line).quote_id);
        }
    }
    std::unordered_set<std::string> kept(kept_ids.begin(), kept_ids.end());

    // pass 1: root-verb distribution over kept quotes (first parse per id)
    VerbDistribution dist;
    {
        std::unordered_set<std::string> seen;
        auto parses_in = open_input(cfg.parses_path, "parses");
        ConlluReader reader(parses_in);
        DepTree tree;
        while (reader.next(tree)) {
            if (tree.quote_id.empty() || !kept.count(tree.quote_id)) continue;
            if (!seen.insert(tree.quote_id).second) continue;
            accumulate_root_verb(tree, dist);
        }
    }
    log_info("extract: pass-1 distribution over " + std::to_string(dist.total) +
             " root verbs, " + std::to_string(dist.counts.size()) + " lemmas");

    // pass 2: per-quote extraction (chunked, deterministic merge)
    std::unordered_map<std::string, ExtractionRow> rows;
    rows.reserve(kept_ids.size());
    {
        std::unordered_set<std::string> seen;
        auto parses_in = open_input(cfg.parses_path, "parses");
        ConlluReader reader(parses_in);

        std::vector<DepTree> batch;
        std::vector<ExtractionRow> batch_rows;
        const size_t batch_target = static_cast<size_t>(std::max(1, cfg.threads)) * 2048;

        auto flush = [&] {
            if (batch.empty()) return;
            batch_rows.resize(batch.size());
            auto work = [&](size_t lo, size_t hi) {
                for (size_t i = lo; i < hi; ++i) {
                    try {
                        Extraction e = extract_quotative(batch[i], dist, cfg.parallel_depth);
                        batch_rows[i] = {e.lemma, e.stage};
                    } catch (const NoVerbFound&) {
                        batch_rows[i] = {std::string(), ExtractStage::Root};
                    }
                }
            };
            int threads = std::max(1, cfg.threads);
            if (threads == 1 || batch.size() < 256) {
                work(0, batch.size());
            } else {
                std::vector<std::thread> pool;
                size_t per = (batch.size() + threads - 1) / threads;
                for (int t = 0; t < threads; ++t) {
                    size_t lo = per * static_cast<size_t>(t);
                    size_t hi = std::min(batch.size(), lo + per);
                    if (lo >= hi) break;
                    pool.emplace_back(work, lo, hi);
                }
                for (auto& th : pool) th.join();
            }
            for (size_t i = 0; i < batch.size(); ++i)
                rows.emplace(batch[i].quote_id, std::move(batch_rows[i]));
            batch.clear();
        };

        DepTree tree;
        while (reader.next(tree)) {
            if (tree.quote_id.empty() || !kept.count(tree.quote_id)) continue;
            if (!seen.insert(tree.quote_id).second) continue;
            batch.push_back(std::move(tree));
            if (batch.size() >= batch_target) flush();
        }
        flush();
    }

    // emit in filtered order; classify against the dictionary
    fs::path out_path = fs::path(cfg.out_dir) / artifact::kExtraction;
    auto out = create_output(out_path);
    out << "quote_id,lemma,label,stage\n";
    StageCounts counts;
    for (const std::string& id : kept_ids) {
        ++counts.input;
        auto it = rows.find(id);
        std::string lemma = it != rows.end() ? it->second.lemma : std::string();
        QuotLabel label = lemma.empty() ? QuotLabel::Unresolved : dict.classify(lemma);
        ExtractStage stage = it != rows.end() ? it->second.stage : ExtractStage::Root;
        if (label != QuotLabel::Unresolved) ++counts.kept;
        out << id << ',' << lemma << ',' << to_string(label) << ',' << to_string(stage)
            << '\n';
    }
    out.close();

    manifest.stages.push_back({"dictionary", counts});
    manifest.output_digests[artifact::kExtraction] = fnv1a64_hex_of_file(out_path);

    if (cfg.audit) {
        // join the filter audit with extraction results: one row per input quote
        fs::path audit_path = fs::path(cfg.out_dir) / artifact::kAudit;
        auto audit_in = open_artifact(audit_path);
        std::string header;
        std::getline(audit_in, header);

        fs::path xaudit_path = fs::path(cfg.out_dir) / artifact::kExtractAudit;
        auto xout = create_output(xaudit_path);
        xout << "quote_id,stage,kept,lemma,label,extract_stage\n";
        std::string line;
        while (std::getline(audit_in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto fields = split_fields(line, ',');
            if (fields.size() != 3)
                throw MissingUpstreamArtifact("bad audit row: " + line);
            xout << line;
            auto it = fields[2] == "true" ? rows.find(fields[0]) : rows.end();
            if (it != rows.end() && !it->second.lemma.empty()) {
                xout << ',' << it->second.lemma << ','
                     << to_string(dict.classify(it->second.lemma)) << ','
                     << to_string(it->second.stage);
            } else {
                xout << ",,,";
            }
            xout << '\n';
        }
        xout.close();
        manifest.output_digests[artifact::kExtractAudit] = fnv1a64_hex_of_file(xaudit_path);
    }
    return counts;
}

// ---------------------------------------------------------------------------
// classified corpus + observations

ClassifiedCorpus load_classified(const fs::path& out_dir) {
    fs::path filtered_path = out_dir / artifact::kFiltered;
    fs::path extraction_path = out_dir / artifact::kExtraction;

    ClassifiedCorpus corpus;
    auto fin = open_artifact(filtered_path);
    expect_schema(fin, kFilteredSchema, filtered_path);
    auto xin = open_artifact(extraction_path);
    std::string header;
    std::getline(xin, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header != "quote_id,lemma,label,stage" && !header.empty())
        throw MissingUpstreamArtifact("unexpected extraction header: " + header);

    std::string fline, xline;
    while (std::getline(fin, fline)) {
        if (!fline.empty() && fline.back() == '\r') fline.pop_back();
        if (fline.empty()) continue;
        do {
            if (!std::getline(xin, xline))
                throw MissingUpstreamArtifact(
                    "extraction rows fewer than filtered records");
            if (!xline.empty() && xline.back() == '\r') xline.pop_back();
        } while (xline.empty());

        QuoteRecord q = parse_quote_line(fline);
        auto fields = split_fields(xline, ',');
        if (fields.size() != 4 || fields[0] != q.quote_id)
            throw MissingUpstreamArtifact("extraction row out of step at quote " +
                                          q.quote_id + ": " + xline);
        QuotativeResult r;
        r.quote_id = fields[0];
        r.lemma = fields[1];
        r.label = fields[2] == "objective"      ? QuotLabel::Objective
                  : fields[2] == "nonobjective" ? QuotLabel::Nonobjective
                                                : QuotLabel::Unresolved;
        r.stage = fields[3] == "parallel" ? ExtractStage::ParallelDisambiguated
                                          : ExtractStage::Root;
        corpus.records.push_back(std::move(q));
        corpus.results.push_back(std::move(r));
    }
    return corpus;
}

ObservationSet observations_from(const ClassifiedCorpus& corpus, bool merge_bias_families) {
    ObservationSet obs;
    for (size_t i = 0; i < corpus.records.size(); ++i) {
        const QuoteRecord& q = corpus.records[i];
        const QuotativeResult& r = corpus.results[i];
        if (r.label == QuotLabel::Unresolved) continue;
        if (q.party == Party::Unknown) continue;  // speaker off the politician list
        Bias b = q.bias;
        if (merge_bias_families) {
            if (b == Bias::LeftCenter) b = Bias::Left;
            else if (b == Bias::RightCenter) b = Bias::Right;
            else if (b != Bias::Left && b != Bias::Right) continue;
        }
        if (b == Bias::Unknown) continue;
        obs.add(r.label == QuotLabel::Nonobjective ? 1.0 : 0.0, q.outlet_domain, b, q.party,
                q.month_index);
    }
    return obs;
}

// ---------------------------------------------------------------------------
// stage: fit

namespace {

json fit_to_json(const ModelFit& mf) {
    json j;
    j["form"] = std::string(to_string(mf.spec.form));
    j["absorb_outlet_fe"] = mf.spec.absorb_outlet_fe;
    j["n_obs"] = mf.fit.n_obs;
    j["n_params"] = mf.fit.n_params;
    j["n_clusters"] = mf.fit.n_clusters;
    j["dropped_columns"] = mf.fit.dropped_columns;
    json coefs = json::array();
    long df = mf.fit.n_clusters - 1;
    for (Eigen::Index i = 0; i < mf.fit.beta.size(); ++i) {
        double se = std::sqrt(std::max(0.0, mf.fit.vcov(i, i)));
        double t = se > 0 ? mf.fit.beta[i] / se : 0.0;
        coefs.push_back({{"name", mf.fit.coef_names[static_cast<size_t>(i)]},
                         {"estimate", mf.fit.beta[i]},
                         {"se", se},
                         {"t", t},
                         {"p", student_t_two_sided_p(t, static_cast<double>(df))}});
    }
    j["coefficients"] = coefs;
    json cons = json::array();
    for (const NamedContrast& nc : mf.contrasts)
        cons.push_back({{"name", nc.name},
                        {"estimate", nc.value.estimate},
                        {"se", nc.value.se},
                        {"t", nc.value.t_stat},
                        {"p", nc.value.p_value},
                        {"df", nc.value.df}});
    j["contrasts"] = cons;
    j["diagnostics"] = {{"rss", mf.fit.rss},
                        {"fitted_min", mf.fit.fitted_min},
                        {"fitted_max", mf.fit.fitted_max}};
    return j;
}

} // namespace

void stage_fit(const RunConfig& cfg, RunManifest& manifest) {
    ClassifiedCorpus corpus = load_classified(cfg.out_dir);
    ObservationSet main_obs = observations_from(corpus, false);
    manifest.quotes_for_fit = static_cast<long long>(main_obs.size());

    json models = json::object();
    for (const std::string& name : cfg.models) {
        try {
            if (name == "matched") {
                std::vector<size_t> idx =
                    matched_subset_indices(corpus.records, cfg.match_by_text);
                ClassifiedCorpus sub;
                for (size_t i : idx) {
                    sub.records.push_back(corpus.records[i]);
                    sub.results.push_back(corpus.results[i]);
                }
                ObservationSet obs = observations_from(sub, true);
                json m = fit_to_json(fit_model(obs, ModelSpec::category_party()));
                m["matched_quotes"] = static_cast<long long>(obs.size());
                models[name] = std::move(m);
            } else if (name == "eq1") {
                models[name] = fit_to_json(fit_model(main_obs, ModelSpec::trend_by_category()));
            } else if (name == "eq2") {
                models[name] = fit_to_json(fit_model(main_obs, ModelSpec::category_party()));
            } else if (name == "eq3") {
                models[name] =
                    fit_to_json(fit_model(main_obs, ModelSpec::trend_by_category_party()));
            } else if (name == "pooled") {
                models[name] = fit_to_json(fit_model(main_obs, ModelSpec::pooled()));
            }
            manifest.fits_attempted = true;
        } catch (const Error& e) {
            models[name] = json{{"error", e.what()}};
        }
    }

    json j;
    j["schema"] = "quotlab.fits.v1";
    j["models"] = std::move(models);

    fs::path out_path = fs::path(cfg.out_dir) / artifact::kFits;
    auto out = create_output(out_path);
    out << j.dump(2) << '\n';
    out.close();
    manifest.output_digests[artifact::kFits] = fnv1a64_hex_of_file(out_path);
}

// ---------------------------------------------------------------------------
// stage: report

namespace {

void write_frequency_csv(const fs::path& path, const std::vector<FrequencyRow>& rows,
                         const char* key_header, RunManifest& manifest,
                         const std::string& artifact_name) {
    auto out = create_output(path);
    out << key_header << ",count,pct\n";
    for (const FrequencyRow& r : rows)
        out << r.name << ',' << r.count << ',' << fmt_double(r.pct) << '\n';
    out.close();
    manifest.output_digests[artifact_name] = fnv1a64_hex_of_file(path);
}

json series_to_json(const std::vector<MonthlySeries>& series) {
    json arr = json::array();
    for (const MonthlySeries& s : series) {
        json pts = json::array();
        for (const auto& p : s.points)
            pts.push_back({{"month_index", p.month_index},
                           {"rate", p.rate},
                           {"n_quotes", p.n_quotes}});
        arr.push_back({{"key", s.key}, {"points", pts}});
    }
    return arr;
}

} // namespace

void stage_report(const RunConfig& cfg, RunManifest& manifest) {
    ClassifiedCorpus corpus = load_classified(cfg.out_dir);
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir / "tables");
    fs::create_directories(dir / "series");

    // frequency tables
    write_frequency_csv(dir / "tables" / "top_quotatives.csv",
                        frequency_table(count_by(corpus.records, corpus.results,
                                                 FrequencyKey::Quotative),
                                        10),
                        "lemma", manifest, "tables/top_quotatives.csv");
    write_frequency_csv(dir / "tables" / "top_speakers.csv",
                        frequency_table(count_by(corpus.records, corpus.results,
                                                 FrequencyKey::Speaker),
                                        10),
                        "speaker", manifest, "tables/top_speakers.csv");

    {  // top outlets inside each bias category
        std::map<std::string, std::map<std::string, long long>> per_category;
        for (const QuoteRecord& q : corpus.records)
            per_category[std::string(to_string(q.bias))][q.outlet_domain] += 1;
        fs::path path = dir / "tables" / "top_outlets_by_category.csv";
        auto out = create_output(path);
        out << "category,domain,count,pct\n";
        for (const auto& [cat, counts] : per_category)
            for (const FrequencyRow& r : frequency_table(counts, 10))
                out << cat << ',' << r.name << ',' << r.count << ',' << fmt_double(r.pct)
                    << '\n';
        out.close();
        manifest.output_digests["tables/top_outlets_by_category.csv"] =
            fnv1a64_hex_of_file(path);
    }

    {  // quotative shifts, first vs last 12 months of the window
        std::map<std::string, long long> first12, last12;
        for (size_t i = 0; i < corpus.records.size(); ++i) {
            const QuotativeResult& r = corpus.results[i];
            if (r.label == QuotLabel::Unresolved && !cfg.include_unresolved_in_shift)
                continue;
            if (r.lemma.empty()) continue;
            int m = corpus.records[i].month_index;
            if (m >= cfg.window_first && m <= cfg.window_first + 11)
                first12[r.lemma] += 1;
            if (m >= cfg.window_last - 11 && m <= cfg.window_last)
                last12[r.lemma] += 1;
        }
        fs::path path = dir / "tables" / "quotative_shift.csv";
        auto out = create_output(path);
        out << "lemma,pct_point_change,odds_ratio,rendered,direction\n";
        if (!first12.empty() && !last12.empty()) {
            for (const ShiftEntry& e : quotative_shift(first12, last12))
                out << e.lemma << ',' << fmt_double(e.pct_point_change) << ','
                    << fmt_double(e.odds_ratio) << ',' << render_odds_shift(e) << ','
                    << (e.direction == ShiftEntry::Direction::Up ? "up" : "down") << '\n';
        }
        out.close();
        manifest.output_digests["tables/quotative_shift.csv"] = fnv1a64_hex_of_file(path);
    }

    // monthly series, centered
    std::vector<MonthlySeries> by_outlet =
        monthly_series_by_outlet(corpus.records, corpus.results);
    std::map<std::string, std::string> category_of;
    for (const QuoteRecord& q : corpus.records)
        category_of.emplace(q.outlet_domain, std::string(to_string(q.bias)));

    {
        json j;
        j["schema"] = "quotlab.series.v1";
        j["overall"] = series_to_json(center_series(by_outlet, CenterLevel::All, category_of));
        j["by_category"] =
            series_to_json(center_series(by_outlet, CenterLevel::Category, category_of));
        fs::path path = dir / "series" / "monthly_centered.json";
        auto out = create_output(path);
        out << j.dump(2) << '\n';
        out.close();
        manifest.output_digests["series/monthly_centered.json"] = fnv1a64_hex_of_file(path);
    }

    {  // gnuplot-friendly dump of the overall centered series
        std::vector<MonthlySeries> overall =
            center_series(by_outlet, CenterLevel::All, category_of);
        fs::path path = dir / "series" / "monthly_overall.dat";
        auto out = create_output(path);
        out << "# month_index rate n_quotes\n";
        if (!overall.empty())
            for (const auto& p : overall.front().points)
                out << p.month_index << ' ' << fmt_double(p.rate) << ' ' << p.n_quotes
                    << '\n';
        out.close();
        manifest.output_digests["series/monthly_overall.dat"] = fnv1a64_hex_of_file(path);
    }

    {  // outlet-level mean rates per category + pairwise rank-sum tests
        std::map<std::string, std::vector<double>> rates_by_cat;
        for (const MonthlySeries& s : by_outlet) {
            double nonobj = 0, classified = 0;
            for (const auto& p : s.points) {
                nonobj += p.rate * static_cast<double>(p.n_quotes);
                classified += static_cast<double>(p.n_quotes);
            }
            if (classified == 0) continue;
            auto it = category_of.find(s.key);
            std::string cat = it != category_of.end() ? it->second : "unknown";
            rates_by_cat[cat].push_back(nonobj / classified);
        }
        json j;
        j["schema"] = "quotlab.category_tests.v1";
        json cats = json::object();
        for (auto& [cat, rates] : rates_by_cat) {
            std::sort(rates.begin(), rates.end());
            double mean = 0;
            for (double r : rates) mean += r;
            mean = rates.empty() ? 0.0 : mean / static_cast<double>(rates.size());
            cats[cat] = {{"n_outlets", rates.size()}, {"mean_rate", mean}};
        }
        j["categories"] = cats;
        json tests = json::array();
        if (rates_by_cat.size() >= 2) {
            bool degenerate = false;
            std::vector<PairwiseTest> pw;
            try {
                pw = category_pairwise_tests(rates_by_cat, 10);
            } catch (const DegenerateSamples&) {
                degenerate = true;
            }
            if (!degenerate)
                for (const PairwiseTest& t : pw)
                    tests.push_back({{"a", t.category_a},
                                     {"b", t.category_b},
                                     {"u", t.u},
                                     {"z", t.z},
                                     {"p", t.p},
                                     {"p_adj", t.p_adj}});
        }
        j["pairwise"] = tests;
        fs::path path = dir / "series" / "category_tests.json";
        auto out = create_output(path);
        out << j.dump(2) << '\n';
        out.close();
        manifest.output_digests["series/category_tests.json"] = fnv1a64_hex_of_file(path);
    }
}

// ---------------------------------------------------------------------------
// run_pipeline

RunManifest run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);

    RunManifest manifest;
    manifest.config_echo = cfg.to_json();
    for (const std::string& path :
         {cfg.quotes_path, cfg.parses_path, cfg.ratings_path, cfg.speakers_path}) {
        if (!path.empty()) manifest.input_digests[path] = fnv1a64_hex_of_file(path);
    }
    if (!cfg.dict_dir.empty()) {
        for (const char* f : {"objective.txt", "nonobjective.txt"}) {
            fs::path p = fs::path(cfg.dict_dir) / f;
            manifest.input_digests[p.string()] = fnv1a64_hex_of_file(p);
        }
    }

    stage_ingest(cfg, manifest);
    stage_filter(cfg, manifest);
    StageCounts extracted = stage_extract(cfg, manifest);

    if (extracted.input > 0) {
        stage_fit(cfg, manifest);
        stage_report(cfg, manifest);
    } else {
        log_info("no quotes survived filtering; skipping fit and report");
    }

    fs::path manifest_path = fs::path(cfg.out_dir) / artifact::kManifest;
    auto out = create_output(manifest_path);
    out << manifest.to_json();
    out.close();
    return manifest;
}

} // namespace quotlab
