#include "tagprof/pipeline.hpp"

#include "stages.hpp"
#include "tagprof/digest.hpp"
#include "tagprof/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace tagprof {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kManifestFormat = 1;

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    for (const auto& item : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <typename T>
void read_value(const json& obj, const char* key, T& target, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return;
    }
    try {
        if constexpr (std::is_unsigned_v<T>) {
            if (!it->is_number_integer() || it->get<long long>() < 0) {
                throw ConfigError(where + "." + key + " must be a nonnegative integer");
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) {
                throw ConfigError(where + "." + key + " must be an integer");
            }
        }
        target = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

fs::path read_path(const json& obj, const char* key, const fs::path& base, const std::string& where) {
    std::string text;
    read_value(obj, key, text, where);
    if (text.empty()) {
        return {};
    }
    fs::path p(text);
    return p.is_absolute() ? p : base / p;
}

Trait read_trait(const json& obj, const std::string& where) {
    std::string name;
    read_value(obj, "trait", name, where);
    try {
        return trait_from_name(name);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

SynthSpec synth_from_json(const json& doc) {
    const std::string where = "synth";
    check_keys(doc,
               {"n_books", "n_tags", "n_users", "n_pages", "n_genres", "planted", "disposition", "genre_tag_rate",
                "genre_count_mean", "crossover_rate", "noise_tags", "noise_per_book", "second_book_rate",
                "trait_mean", "trait_sd", "likes_mean", "likes_sd", "target_sd", "like_tau", "seed"},
               where);
    SynthSpec spec;
    read_value(doc, "n_books", spec.n_books, where);
    read_value(doc, "n_tags", spec.n_tags, where);
    read_value(doc, "n_users", spec.n_users, where);
    read_value(doc, "n_pages", spec.n_pages, where);
    read_value(doc, "n_genres", spec.n_genres, where);
    read_value(doc, "genre_tag_rate", spec.genre_tag_rate, where);
    read_value(doc, "genre_count_mean", spec.genre_count_mean, where);
    read_value(doc, "crossover_rate", spec.crossover_rate, where);
    read_value(doc, "noise_tags", spec.noise_tags, where);
    read_value(doc, "noise_per_book", spec.noise_per_book, where);
    read_value(doc, "second_book_rate", spec.second_book_rate, where);
    read_value(doc, "trait_mean", spec.trait_mean, where);
    read_value(doc, "trait_sd", spec.trait_sd, where);
    read_value(doc, "likes_mean", spec.likes_mean, where);
    read_value(doc, "likes_sd", spec.likes_sd, where);
    read_value(doc, "target_sd", spec.target_sd, where);
    read_value(doc, "like_tau", spec.like_tau, where);
    read_value(doc, "seed", spec.seed, where);
    if (const auto it = doc.find("planted"); it != doc.end()) {
        if (!it->is_array()) {
            throw ConfigError("synth.planted must be an array");
        }
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string at_where = "synth.planted[" + std::to_string(i) + "]";
            const json& e = (*it)[i];
            check_keys(e, {"group", "trait", "rho"}, at_where);
            PlantedEffect effect;
            read_value(e, "group", effect.group, at_where);
            effect.trait = read_trait(e, at_where);
            read_value(e, "rho", effect.rho, at_where);
            spec.planted.push_back(effect);
        }
    }
    if (const auto it = doc.find("disposition"); it != doc.end() && !it->is_null()) {
        check_keys(*it, {"trait", "rho"}, "synth.disposition");
        DispositionEffect effect;
        effect.trait = read_trait(*it, "synth.disposition");
        read_value(*it, "rho", effect.rho, "synth.disposition");
        spec.disposition = effect;
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

ordered_json synth_to_json(const SynthSpec& spec) {
    ordered_json out;
    out["n_books"] = spec.n_books;
    out["n_tags"] = spec.n_tags;
    out["n_users"] = spec.n_users;
    out["n_pages"] = spec.n_pages;
    out["n_genres"] = spec.n_genres;
    ordered_json planted = ordered_json::array();
    for (const auto& e : spec.planted) {
        planted.push_back({{"group", e.group}, {"trait", trait_name(e.trait)}, {"rho", e.rho}});
    }
    out["planted"] = planted;
    out["disposition"] = spec.disposition
                             ? ordered_json{{"trait", trait_name(spec.disposition->trait)},
                                            {"rho", spec.disposition->rho}}
                             : ordered_json(nullptr);
    out["genre_tag_rate"] = spec.genre_tag_rate;
    out["genre_count_mean"] = spec.genre_count_mean;
    out["crossover_rate"] = spec.crossover_rate;
    out["noise_tags"] = spec.noise_tags;
    out["noise_per_book"] = spec.noise_per_book;
    out["second_book_rate"] = spec.second_book_rate;
    out["trait_mean"] = spec.trait_mean;
    out["trait_sd"] = spec.trait_sd;
    out["bounds"] = {spec.bounds.lower, spec.bounds.upper};
    out["likes_mean"] = spec.likes_mean;
    out["likes_sd"] = spec.likes_sd;
    out["target_sd"] = spec.target_sd;
    out["like_tau"] = spec.like_tau;
    out["seed"] = spec.seed;
    return out;
}

std::string file_digest_or_empty(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
        return {};
    }
    return digest_of_file(path);
}

ordered_json read_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return nullptr;
    }
    try {
        return ordered_json::parse(in);
    } catch (const json::exception&) {
        return nullptr;
    }
}

/// Empty when every recorded artifact exists with its recorded digest,
/// otherwise the first offending file name.
std::string first_changed_artifact(const ordered_json& manifest, const fs::path& dir) {
    for (const auto& [name, digest] : manifest.at("artifacts").items()) {
        if (file_digest_or_empty(dir / name) != digest.get<std::string>()) {
            return name;
        }
    }
    return {};
}

std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage) {
    const std::string hex = digest_of(stage);
    return Rng(seed).split(std::stoull(hex, nullptr, 16))();
}

}  // namespace

std::string PipelineConfig::canonical_json() const {
    ordered_json doc;
    doc["seed"] = seed;
    doc["inputs"] = uses_synth_inputs() ? "synth" : "files";
    doc["synth"] = synth ? synth_to_json(*synth) : ordered_json(nullptr);
    doc["filter"] = {{"min_per_book", filter.min_per_book}, {"min_total", filter.min_total},
                     {"min_books", filter.min_books},       {"min_chars", filter.min_chars},
                     {"min_letters", filter.min_letters},   {"max_nonenglish", filter.max_nonenglish},
                     {"min_page_likers", filter.min_page_likers}};
    doc["trait_bounds"] = {bounds.lower, bounds.upper};
    doc["similarity"] = {{"rank", similarity.rank},
                         {"lexical_rank", similarity.lexical_rank},
                         {"fusion_weight", similarity.fusion_weight},
                         {"custom_lemma_rules", !similarity.lemma_rules.empty()}};
    doc["optics"] = {{"min_pts", optics.min_pts},
                     {"max_eps", std::isfinite(optics.max_eps) ? ordered_json(optics.max_eps) : ordered_json(nullptr)},
                     {"eps_cut", optics.eps_cut ? ordered_json(*optics.eps_cut) : ordered_json(nullptr)},
                     {"overrides", !optics.overrides.empty()}};
    doc["genres"] = {{"k_min", genres.k_min}, {"k_max", genres.k_max}};
    doc["regression"] = {{"folds", regression.folds},
                         {"lambda_grid", regression.lambda_grid},
                         {"lambda_ratio", regression.lambda_ratio},
                         {"trees", regression.trees},
                         {"mtry", regression.mtry},
                         {"min_leaf", regression.min_leaf},
                         {"importance_repeats", regression.importance_repeats}};
    doc["report"] = {{"top", report_top}};
    return doc.dump();
}

std::string PipelineConfig::hash() const { return digest_of(canonical_json()); }

SynthSpec parse_synth_spec(std::string_view json_text) {
    try {
        return synth_from_json(json::parse(json_text));
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("synth section is not valid JSON: ") + e.what());
    }
}

PipelineConfig parse_config(std::string_view json_text, const fs::path& base_dir,
                            std::optional<std::uint64_t> seed_override) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(doc,
               {"seed", "inputs", "synth", "filter", "trait_bounds", "similarity", "optics", "genres", "regression",
                "report", "out"},
               "config");
    PipelineConfig config;
    if (seed_override) {
        config.seed = *seed_override;
    } else if (!doc.contains("seed")) {
        throw ConfigError("config.seed is required (or pass --seed)");
    } else {
        read_value(doc, "seed", config.seed, "config");
    }

    if (const auto it = doc.find("inputs"); it != doc.end()) {
        check_keys(*it, {"applications", "pages", "users"}, "inputs");
        config.inputs.applications = read_path(*it, "applications", base_dir, "inputs");
        config.inputs.pages = read_path(*it, "pages", base_dir, "inputs");
        config.inputs.users = read_path(*it, "users", base_dir, "inputs");
        if (config.inputs.applications.empty()) {
            throw ConfigError("inputs.applications is required when inputs are given");
        }
        for (const auto* p : {&config.inputs.applications, &config.inputs.pages, &config.inputs.users}) {
            if (!p->empty() && !fs::exists(*p)) {
                throw ConfigError("input file not found: " + p->string());
            }
        }
    }
    if (const auto it = doc.find("synth"); it != doc.end()) {
        config.synth = synth_from_json(*it);
        if (!it->contains("seed")) {
            config.synth->seed = config.seed;
        }
    }
    if (config.uses_synth_inputs() && !config.synth) {
        throw ConfigError("config needs either inputs or a synth section");
    }

    if (const auto it = doc.find("filter"); it != doc.end()) {
        check_keys(*it,
                   {"min_per_book", "min_total", "min_books", "min_chars", "min_letters", "max_nonenglish",
                    "min_page_likers"},
                   "filter");
        read_value(*it, "min_per_book", config.filter.min_per_book, "filter");
        read_value(*it, "min_total", config.filter.min_total, "filter");
        read_value(*it, "min_books", config.filter.min_books, "filter");
        read_value(*it, "min_chars", config.filter.min_chars, "filter");
        read_value(*it, "min_letters", config.filter.min_letters, "filter");
        read_value(*it, "max_nonenglish", config.filter.max_nonenglish, "filter");
        read_value(*it, "min_page_likers", config.filter.min_page_likers, "filter");
        try {
            config.filter.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (const auto it = doc.find("trait_bounds"); it != doc.end()) {
        if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
            throw ConfigError("trait_bounds must be [lower, upper]");
        }
        config.bounds = {(*it)[0].get<double>(), (*it)[1].get<double>()};
        if (!(config.bounds.lower < config.bounds.upper)) {
            throw ConfigError("trait_bounds lower must be below upper");
        }
        if (config.synth) {
            config.synth->bounds = config.bounds;
        }
    }
    if (const auto it = doc.find("similarity"); it != doc.end()) {
        check_keys(*it, {"rank", "lexical_rank", "fusion_weight", "lemma_rules"}, "similarity");
        read_value(*it, "rank", config.similarity.rank, "similarity");
        read_value(*it, "lexical_rank", config.similarity.lexical_rank, "similarity");
        read_value(*it, "fusion_weight", config.similarity.fusion_weight, "similarity");
        config.similarity.lemma_rules = read_path(*it, "lemma_rules", base_dir, "similarity");
        if (config.similarity.rank < 1 || config.similarity.lexical_rank < 0) {
            throw ConfigError("similarity ranks must be positive (lexical_rank 0 selects the default)");
        }
        if (!(config.similarity.fusion_weight >= 0.0 && config.similarity.fusion_weight <= 1.0)) {
            throw ConfigError("similarity.fusion_weight must lie in [0, 1]");
        }
        if (!config.similarity.lemma_rules.empty() && !fs::exists(config.similarity.lemma_rules)) {
            throw ConfigError("lemma rules file not found: " + config.similarity.lemma_rules.string());
        }
    }
    if (const auto it = doc.find("optics"); it != doc.end()) {
        check_keys(*it, {"min_pts", "max_eps", "eps_cut", "overrides"}, "optics");
        read_value(*it, "min_pts", config.optics.min_pts, "optics");
        read_value(*it, "max_eps", config.optics.max_eps, "optics");
        if (const auto cut = it->find("eps_cut"); cut != it->end() && !cut->is_null()) {
            if (!cut->is_number()) {
                throw ConfigError("optics.eps_cut must be a number");
            }
            config.optics.eps_cut = cut->get<double>();
        }
        config.optics.overrides = read_path(*it, "overrides", base_dir, "optics");
        if (config.optics.min_pts < 2) {
            throw ConfigError("optics.min_pts must be at least 2");
        }
        if (!config.optics.overrides.empty() && !fs::exists(config.optics.overrides)) {
            throw ConfigError("override file not found: " + config.optics.overrides.string());
        }
    }
    if (const auto it = doc.find("genres"); it != doc.end()) {
        check_keys(*it, {"k_min", "k_max"}, "genres");
        read_value(*it, "k_min", config.genres.k_min, "genres");
        read_value(*it, "k_max", config.genres.k_max, "genres");
        if (config.genres.k_min < 2 || config.genres.k_max < config.genres.k_min) {
            throw ConfigError("genres needs 2 <= k_min <= k_max");
        }
    }
    if (const auto it = doc.find("regression"); it != doc.end()) {
        check_keys(*it, {"folds", "lambda_grid", "lambda_ratio", "trees", "mtry", "min_leaf", "importance_repeats"},
                   "regression");
        auto& r = config.regression;
        read_value(*it, "folds", r.folds, "regression");
        read_value(*it, "lambda_grid", r.lambda_grid, "regression");
        read_value(*it, "lambda_ratio", r.lambda_ratio, "regression");
        read_value(*it, "trees", r.trees, "regression");
        read_value(*it, "mtry", r.mtry, "regression");
        read_value(*it, "min_leaf", r.min_leaf, "regression");
        read_value(*it, "importance_repeats", r.importance_repeats, "regression");
        if (r.folds < 2 || r.lambda_grid < 2 || !(r.lambda_ratio > 0.0 && r.lambda_ratio < 1.0) || r.trees < 1 ||
            r.min_leaf < 1 || r.importance_repeats < 1) {
            throw ConfigError("regression settings out of range");
        }
    }
    if (const auto it = doc.find("report"); it != doc.end()) {
        check_keys(*it, {"top"}, "report");
        read_value(*it, "top", config.report_top, "report");
        if (config.report_top < 1) {
            throw ConfigError("report.top must be at least 1");
        }
    }
    if (const auto it = doc.find("out"); it != doc.end()) {
        config.out = read_path(doc, "out", base_dir, "config");
    }
    return config;
}

PipelineConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), fs::absolute(path).parent_path(), seed_override);
}

PipelineError::PipelineError(std::string code, std::string stage, const std::string& message, Details details)
    : std::runtime_error(message), code_(std::move(code)), stage_(std::move(stage)), details_(std::move(details)) {}

std::string PipelineError::to_json() const {
    ordered_json doc;
    doc["error"] = code_;
    if (!stage_.empty()) {
        doc["stage"] = stage_;
    }
    doc["message"] = what();
    for (const auto& [key, value] : details_) {
        doc[key] = value;
    }
    return doc.dump();
}

const std::vector<std::string_view>& stage_names() {
    static const std::vector<std::string_view> names{"synth",   "ingest",      "tfidf",  "tagsim",   "tagcluster",
                                                     "consolidate", "correlate", "lasso",  "forest",   "genres",
                                                     "profiles", "disposition", "report"};
    return names;
}

std::vector<StageInfo> stage_plan(const PipelineConfig& config) {
    std::vector<StageInfo> plan;
    if (config.uses_synth_inputs()) {
        plan.push_back({"synth", {}});
        plan.push_back({"ingest", {"synth"}});
    } else {
        plan.push_back({"ingest", {}});
    }
    plan.push_back({"tfidf", {"ingest"}});
    plan.push_back({"tagsim", {"tfidf"}});
    plan.push_back({"tagcluster", {"tfidf", "tagsim"}});
    plan.push_back({"consolidate", {"ingest", "tfidf", "tagcluster"}});
    plan.push_back({"correlate", {"ingest", "consolidate"}});
    plan.push_back({"lasso", {"ingest", "consolidate"}});
    plan.push_back({"forest", {"ingest", "consolidate"}});
    plan.push_back({"genres", {"consolidate"}});
    plan.push_back({"profiles", {"ingest", "genres"}});
    plan.push_back({"disposition", {"ingest"}});
    plan.push_back({"report", {"tagcluster", "correlate", "lasso", "forest", "genres", "profiles", "disposition"}});
    return plan;
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)), config_hash_(config_.hash()) {}

fs::path Pipeline::stage_dir(std::string_view stage) const { return config_.out / std::string(stage); }

StageOutcome Pipeline::run(std::string_view stage, bool force) {
    const std::string name(stage);
    const auto& names = stage_names();
    if (std::find(names.begin(), names.end(), stage) == names.end()) {
        throw PipelineError("unknown_stage", name, "unknown stage '" + name + "'");
    }
    std::vector<std::string_view> dependencies;
    for (const auto& info : stage_plan(config_)) {
        if (info.name == stage) {
            dependencies = info.dependencies;
        }
    }
    if (stage == "synth" && !config_.synth) {
        throw PipelineError("config", name, "the synth stage needs a synth section in the config");
    }

    ordered_json expected_dependencies = ordered_json::object();
    for (const auto dep : dependencies) {
        const std::string dep_name(dep);
        const fs::path manifest_path = stage_dir(dep) / "manifest.json";
        const auto manifest = read_manifest(manifest_path);
        if (manifest.is_null()) {
            throw PipelineError("missing_dependency", name,
                                "stage '" + name + "' needs the artifacts of stage '" + dep_name +
                                    "', which has not been run",
                                {{"missing", dep_name}});
        }
        if (manifest.value("config_hash", "") != config_hash_) {
            throw PipelineError("stale_dependency", name,
                                "stage '" + dep_name + "' was produced with a different configuration; rerun it",
                                {{"stale", dep_name}});
        }
        if (const auto changed = first_changed_artifact(manifest, stage_dir(dep)); !changed.empty()) {
            throw PipelineError("stale_dependency", name,
                                "artifact '" + changed + "' of stage '" + dep_name +
                                    "' no longer matches its manifest; rerun it",
                                {{"stale", dep_name}, {"artifact", changed}});
        }
        expected_dependencies[dep_name] = digest_of_file(manifest_path);
    }

    ordered_json expected_inputs = ordered_json::object();
    for (const auto& [role, path] : detail::stage_inputs(stage, config_)) {
        const auto digest = file_digest_or_empty(path);
        if (digest.empty()) {
            throw PipelineError("missing_input", name, "input file not found: " + path.string(),
                                {{"path", path.string()}});
        }
        expected_inputs[role] = digest;
    }

    const fs::path dir = stage_dir(stage);
    const fs::path manifest_path = dir / "manifest.json";
    if (!force) {
        const auto current = read_manifest(manifest_path);
        if (!current.is_null() && current.value("format", 0) == kManifestFormat &&
            current.value("config_hash", "") == config_hash_ && current.value("dependencies", ordered_json()) ==
                                                                     expected_dependencies &&
            current.value("inputs", ordered_json()) == expected_inputs &&
            first_changed_artifact(current, dir).empty()) {
            StageOutcome outcome;
            outcome.stage = name;
            outcome.skipped = true;
            for (const auto& item : current.at("artifacts").items()) {
                outcome.artifacts.push_back(item.key());
            }
            return outcome;
        }
    }

    std::error_code ec;
    fs::remove_all(dir, ec);
    fs::create_directories(dir);

    detail::StageContext context{config_, stage, dir, [this](std::string_view s) { return stage_dir(s); },
                                 stage_seed(config_.seed, stage), {}, {}};
    try {
        detail::stage_body(stage)(context);
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError("stage_failed", name, e.what());
    }

    ordered_json manifest;
    manifest["stage"] = name;
    manifest["format"] = kManifestFormat;
    manifest["config_hash"] = config_hash_;
    manifest["seed"] = config_.seed;
    manifest["dependencies"] = expected_dependencies;
    manifest["inputs"] = expected_inputs;
    ordered_json artifacts = ordered_json::object();
    auto files = context.artifacts;
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        artifacts[file] = digest_of_file(dir / file);
    }
    manifest["artifacts"] = artifacts;
    manifest["warnings"] = context.diag.warnings;
    std::ofstream out(manifest_path, std::ios::binary);
    out << manifest.dump(2) << '\n';
    if (!out) {
        throw PipelineError("io", name, "cannot write " + manifest_path.string());
    }

    StageOutcome outcome;
    outcome.stage = name;
    outcome.artifacts = std::move(files);
    outcome.warnings = std::move(context.diag.warnings);
    return outcome;
}

std::vector<StageOutcome> Pipeline::run_all(bool force) {
    std::vector<StageOutcome> outcomes;
    for (const auto& info : stage_plan(config_)) {
        outcomes.push_back(run(info.name, force));
    }
    return outcomes;
}

}  // namespace tagprof
