// quotlab command line front end: stages of the quotative analysis pipeline
// as subcommands, a JSON config file with flag overrides, reproducible runs.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quotlab/pipeline.hpp"

namespace {

using quotlab::RunConfig;
using quotlab::RunManifest;

struct CliOptions {
    std::string config_path;
    RunConfig flags;  // only explicitly set flags override the config file
    bool threads_set = false;
};

void add_common_flags(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON config file (flags win)");
    cmd->add_option("--quotes", cfg.quotes_path, "quotes JSONL");
    cmd->add_option("--parses", cfg.parses_path, "CoNLL-U parses");
    cmd->add_option("--ratings", cfg.ratings_path, "outlet ratings CSV");
    cmd->add_option("--speakers", cfg.speakers_path, "speakers CSV");
    cmd->add_option("--dict-dir", cfg.dict_dir, "directory with objective.txt/nonobjective.txt");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--threads", cfg.threads, "worker threads (outputs are thread-count independent)");
    cmd->add_option("--title-threshold", cfg.title_threshold, "capitalization ratio that drops a quote");
    cmd->add_option("--title-min-tokens", cfg.title_min_tokens, "minimum tokens before the title filter applies");
    cmd->add_option("--outlet-min", cfg.outlet_min, "quotes an outlet needs in some 12-month window (strictly more)");
    cmd->add_option("--window", [&cfg](const std::vector<std::string>& vals) {
            cfg.window_mode = vals.back() == "rolling" ? quotlab::WindowMode::Rolling
                                                       : quotlab::WindowMode::Fixed;
            return true;
        }, "12-month windows: fixed|rolling")->expected(1);
    cmd->add_option("--window-first", cfg.window_first, "first month index kept");
    cmd->add_option("--window-last", cfg.window_last, "last month index kept");
    cmd->add_option("--exclude-speaker", cfg.exclude_speakers, "entity id to exclude (repeatable)");
    cmd->add_option("--models", cfg.models, "models to fit: eq1 eq2 eq3 pooled matched");
    cmd->add_option("--seed", cfg.seed, "seed echoed into the manifest");
    cmd->add_flag("--audit", cfg.audit, "emit per-quote audit CSVs");
    cmd->add_flag("--match-by-text", cfg.match_by_text, "matched analysis joins by normalized text");
}

// config file first, then every flag the user actually passed on top
RunConfig merge_config(const CLI::App* cmd, const std::string& config_path,
                       const RunConfig& flags) {
    RunConfig cfg;
    if (!config_path.empty()) cfg = RunConfig::from_json_file(config_path);

    auto passed = [&](const char* name) { return cmd->count(name) > 0; };
    if (passed("--quotes")) cfg.quotes_path = flags.quotes_path;
    if (passed("--parses")) cfg.parses_path = flags.parses_path;
    if (passed("--ratings")) cfg.ratings_path = flags.ratings_path;
    if (passed("--speakers")) cfg.speakers_path = flags.speakers_path;
    if (passed("--dict-dir")) cfg.dict_dir = flags.dict_dir;
    if (passed("--out")) cfg.out_dir = flags.out_dir;
    if (passed("--threads")) cfg.threads = flags.threads;
    if (passed("--title-threshold")) cfg.title_threshold = flags.title_threshold;
    if (passed("--title-min-tokens")) cfg.title_min_tokens = flags.title_min_tokens;
    if (passed("--outlet-min")) cfg.outlet_min = flags.outlet_min;
    if (passed("--window")) cfg.window_mode = flags.window_mode;
    if (passed("--window-first")) cfg.window_first = flags.window_first;
    if (passed("--window-last")) cfg.window_last = flags.window_last;
    if (passed("--exclude-speaker")) cfg.exclude_speakers = flags.exclude_speakers;
    if (passed("--models")) cfg.models = flags.models;
    if (passed("--seed")) cfg.seed = flags.seed;
    if (passed("--audit")) cfg.audit = flags.audit;
    if (passed("--match-by-text")) cfg.match_by_text = flags.match_by_text;
    return cfg;
}

int finish(const RunManifest& manifest) {
    long long kept = 0;
    for (const auto& [name, counts] : manifest.stages)
        if (name == "dictionary") kept = counts.kept;
    std::printf("manifest digest %s, %lld quotes classified\n", manifest.digest().c_str(),
                kept);
    return kept == 0 ? 2 : 0;
}

void write_stage_manifest(const RunConfig& cfg, RunManifest& manifest) {
    std::filesystem::path path = std::filesystem::path(cfg.out_dir) / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    out << manifest.to_json();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quotative bias analysis pipeline"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* cmd;
        std::string config_path;
        RunConfig flags;
    };
    std::vector<std::string> names = {"run",    "ingest", "filter",
                                      "extract", "fit",    "report",
                                      "replicate-no-trump"};
    std::vector<std::string> descriptions = {
        "full pipeline: ingest, filter, extract, fit, report",
        "annotate quotes with outlet and speaker metadata",
        "apply the window, title, completeness and outlet filters",
        "two-pass quotative extraction and dictionary classification",
        "fit the fixed-effects linear probability models",
        "frequency tables, centered series, shift table, rank-sum tests",
        "rerun every model with the configured speaker excluded"};
    std::vector<Sub> subs;
    subs.reserve(names.size());
    for (size_t i = 0; i < names.size(); ++i) {
        Sub s;
        s.cmd = app.add_subcommand(names[i], descriptions[i]);
        subs.push_back(std::move(s));
    }
    for (Sub& s : subs) add_common_flags(s.cmd, s.flags, s.config_path);

    CLI11_PARSE(app, argc, argv);

    try {
        for (size_t i = 0; i < subs.size(); ++i) {
            Sub& s = subs[i];
            if (!s.cmd->parsed()) continue;
            RunConfig cfg = merge_config(s.cmd, s.config_path, s.flags);
            const std::string& name = names[i];

            if (name == "run") {
                return finish(quotlab::run_pipeline(cfg));
            }
            if (name == "replicate-no-trump") {
                if (cfg.exclude_speakers.empty())
                    cfg.exclude_speakers.push_back("Q22686");
                return finish(quotlab::run_pipeline(cfg));
            }

            cfg.validate();
            std::filesystem::create_directories(cfg.out_dir);
            RunManifest manifest;
            manifest.config_echo = cfg.to_json();
            if (name == "ingest") {
                quotlab::stage_ingest(cfg, manifest);
            } else if (name == "filter") {
                quotlab::stage_filter(cfg, manifest);
            } else if (name == "extract") {
                quotlab::stage_extract(cfg, manifest);
            } else if (name == "fit") {
                quotlab::stage_fit(cfg, manifest);
            } else if (name == "report") {
                quotlab::stage_report(cfg, manifest);
            }
            write_stage_manifest(cfg, manifest);
            std::printf("%s done\n", name.c_str());
            return 0;
        }
    } catch (const quotlab::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
