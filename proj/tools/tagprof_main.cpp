// Batch driver: tagprof <stage|all> --config <file> [--seed N] [--out DIR] [--workers N]

#include "tagprof/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

namespace {

int fail(const std::string& code, const std::string& message, int exit_code) {
    nlohmann::ordered_json doc;
    doc["error"] = code;
    doc["message"] = message;
    std::cerr << doc.dump() << '\n';
    return exit_code;
}

void print(const tagprof::StageOutcome& outcome, bool quiet) {
    if (quiet) {
        return;
    }
    std::cout << outcome.stage << ": "
              << (outcome.skipped ? "up to date" : "done (" + std::to_string(outcome.artifacts.size()) + " artifacts)")
              << '\n';
    for (const auto& w : outcome.warnings) {
        std::cerr << "  warning: " << w << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tag mining and personality regression pipeline"};
    std::string stage;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    unsigned workers = 0;
    bool force = false;
    bool quiet = false;

    std::string stages_help = "Stage to run, or 'all':";
    for (const auto name : tagprof::stage_names()) {
        stages_help += " " + std::string(name);
    }
    app.add_option("stage", stage, stages_help)->required();
    app.add_option("--config,-c", config_path, "JSON configuration file")->required();
    app.add_option("--seed", seed, "Override the configured seed");
    app.add_option("--out,-o", out_dir, "Output directory (default from config, else ./tagprof-out)");
    app.add_option("--workers,-j", workers, "Worker threads (default: hardware concurrency)");
    app.add_flag("--force", force, "Rerun stages even when their manifests are current");
    app.add_flag("--quiet,-q", quiet, "Print nothing on success");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 2);
    }

    try {
        tagprof::PipelineConfig config = tagprof::load_config(config_path, seed);
        if (!out_dir.empty()) {
            config.out = out_dir;
        }
        config.workers = workers > 0 ? workers : std::max(1u, std::thread::hardware_concurrency());
        tagprof::Pipeline pipeline(std::move(config));
        if (stage == "all") {
            for (const auto& outcome : pipeline.run_all(force)) {
                print(outcome, quiet);
            }
        } else {
            print(pipeline.run(stage, force), quiet);
        }
    } catch (const tagprof::ConfigError& e) {
        std::cerr << e.to_json() << '\n';
        return 2;
    } catch (const tagprof::PipelineError& e) {
        std::cerr << e.to_json() << '\n';
        return 1;
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 1);
    }
    return 0;
}
