#pragma once

#include "tagprof/corpus.hpp"
#include "tagprof/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tagprof {

struct SimilaritySettings {
    long long rank = 100;
    long long lexical_rank = 0;
    double fusion_weight = 0.95;
    std::filesystem::path lemma_rules;  // empty: built-in English rules
};

struct OpticsSettings {
    std::size_t min_pts = 5;
    double max_eps = std::numeric_limits<double>::infinity();
    std::optional<double> eps_cut;  // empty: knee of the reachability profile
    std::filesystem::path overrides;
};

struct GenreSettings {
    std::size_t k_min = 4;
    std::size_t k_max = 30;
};

struct RegressionSettings {
    std::size_t folds = 10;
    std::size_t lambda_grid = 100;
    double lambda_ratio = 1e-4;
    std::size_t trees = 500;
    std::size_t mtry = 0;
    std::size_t min_leaf = 5;
    std::size_t importance_repeats = 5;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    /// Empty applications path: inputs come from the synth stage.
    CorpusPaths inputs;
    std::optional<SynthSpec> synth;
    FilterPolicy filter;
    TraitBounds bounds;
    SimilaritySettings similarity;
    OpticsSettings optics;
    GenreSettings genres;
    RegressionSettings regression;
    std::size_t report_top = 5;

    std::filesystem::path out = "tagprof-out";
    unsigned workers = 1;

    bool uses_synth_inputs() const { return inputs.applications.empty(); }

    /// Canonical JSON of every setting that affects artifacts (not `out`
    /// or `workers`). Input paths are replaced by the inputs' digests at
    /// ingest time.
    std::string canonical_json() const;
    std::string hash() const;
};

/// Parses a JSON config document. Relative paths resolve against `base_dir`.
/// `seed_override` replaces (or supplies) the seed. Throws ConfigError.
PipelineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir,
                            std::optional<std::uint64_t> seed_override = std::nullopt);
PipelineConfig load_config(const std::filesystem::path& path,
                           std::optional<std::uint64_t> seed_override = std::nullopt);

/// Parses the `synth` object of a config. Throws ConfigError.
SynthSpec parse_synth_spec(std::string_view json_text);

/// Failure with a machine-readable code and the stage it concerns.
class PipelineError : public std::runtime_error {
public:
    using Details = std::vector<std::pair<std::string, std::string>>;

    PipelineError(std::string code, std::string stage, const std::string& message, Details details = {});

    const std::string& code() const noexcept { return code_; }
    const std::string& stage() const noexcept { return stage_; }
    const Details& details() const noexcept { return details_; }
    /// One-line JSON object: error code, stage, message and details.
    std::string to_json() const;

private:
    std::string code_;
    std::string stage_;
    Details details_;
};

class ConfigError : public PipelineError {
public:
    explicit ConfigError(const std::string& message) : PipelineError("config", "", message) {}
};

struct StageInfo {
    std::string_view name;
    std::vector<std::string_view> dependencies;
};

/// Stages in execution order; `synth` appears only when the config has no
/// input files.
std::vector<StageInfo> stage_plan(const PipelineConfig& config);
/// Every known stage name in canonical order.
const std::vector<std::string_view>& stage_names();

struct StageOutcome {
    std::string stage;
    bool skipped = false;
    std::vector<std::string> artifacts;
    std::vector<std::string> warnings;
};

class Pipeline {
public:
    explicit Pipeline(PipelineConfig config);

    /// Runs one stage after checking that its dependencies are present and
    /// current. Skips the stage when its manifest already matches, unless
    /// `force`. Throws PipelineError.
    StageOutcome run(std::string_view stage, bool force = false);

    /// Every stage of the plan in order.
    std::vector<StageOutcome> run_all(bool force = false);

    std::filesystem::path stage_dir(std::string_view stage) const;
    const PipelineConfig& config() const noexcept { return config_; }

private:
    PipelineConfig config_;
    std::string config_hash_;
};

}  // namespace tagprof
