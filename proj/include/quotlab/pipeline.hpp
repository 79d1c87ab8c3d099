#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quotlab/corpus.hpp"
#include "quotlab/econometrics.hpp"
#include "quotlab/filters.hpp"
#include "quotlab/quotative.hpp"

namespace quotlab {

// Everything a run needs; JSON config file + flag overrides build one of
// these. validate() checks paths and thresholds up front.
struct RunConfig {
    std::string quotes_path;
    std::string parses_path;
    std::string ratings_path;
    std::string speakers_path;
    std::string dict_dir;
    std::string out_dir;

    double title_threshold = 0.7;
    int title_min_tokens = 4;
    WindowMode window_mode = WindowMode::Fixed;
    long long outlet_min = 20;
    int window_first = 0;
    int window_last = kDefaultWindowEnd;
    int parallel_depth = 1;

    std::vector<std::string> models = {"eq1", "eq2", "eq3", "pooled", "matched"};
    std::vector<std::string> exclude_speakers;
    SpeakerOrdering speaker_ordering = SpeakerOrdering::Lexicographic;

    int threads = 1;
    unsigned long long seed = 0;  // echoed into the manifest
    bool audit = false;
    bool match_by_text = false;
    bool include_unresolved_in_shift = false;

    static RunConfig from_json(std::istream& in);
    static RunConfig from_json_file(const std::filesystem::path& path);
    std::string to_json() const;

    void validate() const;  // throws ConfigError
};

struct StageCounts {
    long long input = 0;
    long long kept = 0;
};

struct RunManifest {
    std::map<std::string, std::string> input_digests;          // path -> fnv1a64
    std::string config_echo;                                   // canonical config JSON
    std::vector<std::pair<std::string, StageCounts>> stages;   // pipeline order
    std::map<std::string, std::string> output_digests;         // file -> fnv1a64
    long long quotes_for_fit = 0;
    bool fits_attempted = false;

    std::string to_json() const;
    std::string digest() const;  // digest of the canonical serialization
};

// FNV-1a 64-bit digest, hex-encoded. Identity for the determinism contract,
// not a cryptographic hash.
std::string fnv1a64_hex(std::istream& in);
std::string fnv1a64_hex_of_file(const std::filesystem::path& path);
std::string fnv1a64_hex_of_string(std::string_view s);

// Stage entry points; each reads the previous stage's artifacts from
// cfg.out_dir and writes its own. Missing upstream files raise
// MissingUpstreamArtifact.
StageCounts stage_ingest(const RunConfig& cfg, RunManifest& manifest);
std::vector<StageCounts> stage_filter(const RunConfig& cfg, RunManifest& manifest);
StageCounts stage_extract(const RunConfig& cfg, RunManifest& manifest);
void stage_fit(const RunConfig& cfg, RunManifest& manifest);
void stage_report(const RunConfig& cfg, RunManifest& manifest);

// ingest -> filter -> extract -> fit -> report, plus the manifest on disk.
// Fit and report are skipped (and the manifest says so) when nothing
// survives filtering.
RunManifest run_pipeline(const RunConfig& cfg);

// Artifact names inside out_dir.
namespace artifact {
inline constexpr const char* kAnnotated = "annotated.jsonl";
inline constexpr const char* kFiltered = "filtered.jsonl";
inline constexpr const char* kAudit = "audit.csv";
inline constexpr const char* kExtraction = "extraction.csv";
inline constexpr const char* kExtractAudit = "extract_audit.csv";
inline constexpr const char* kFits = "fits.json";
inline constexpr const char* kManifest = "manifest.json";
} // namespace artifact

// Loads filtered records and their extraction rows in lockstep. Used by the
// fit and report stages; exposed for tests.
struct ClassifiedCorpus {
    std::vector<QuoteRecord> records;
    std::vector<QuotativeResult> results;  // parallel to records
};
ClassifiedCorpus load_classified(const std::filesystem::path& out_dir);

// Regression rows from classified records (Unresolved rows skipped).
// `merge_bias_families` folds left-center into left and right-center into
// right and drops least-biased rows (the matched analysis coding).
ObservationSet observations_from(const ClassifiedCorpus& corpus,
                                 bool merge_bias_families = false);

} // namespace quotlab
