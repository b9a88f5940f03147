// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "oracles.hpp"
#include "tagprof/cluster.hpp"
#include "tagprof/csv.hpp"
#include "tagprof/lowrank.hpp"
#include "tagprof/matrix.hpp"
#include "tagprof/pipeline.hpp"
#include "tagprof/regress.hpp"
#include "tagprof/rng.hpp"
#include "tagprof/stats.hpp"
#include "tagprof/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace tagprof;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Points = std::vector<std::array<double, 2>>;

DistanceMatrix euclidean(const Points& pts) {
    return DistanceMatrix::from_function(pts.size(), [&](std::size_t i, std::size_t j) {
        return std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
    });
}

std::string fmt(double v, int digits = 3) {
    return csv::format_fixed(v, digits);
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::ifstream in(path);
    return csv::read_rows(in, path.string());
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    return json::parse(in);
}

// ------------------------------------------------------------------ 1

Verdict tfidf_oracle() {
    Rng rng(101);
    oracle::ScratchDir scratch("acc-tfidf");
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto n_books = static_cast<Eigen::Index>(2 + rng.below(29));
        const auto n_tags = static_cast<Eigen::Index>(1 + rng.below(40));
        Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n_books, n_tags);
        std::ostringstream apps;
        apps << "book_id,tag,count\n";
        for (Eigen::Index b = 0; b < n_books; ++b) {
            for (Eigen::Index t = 0; t < n_tags; ++t) {
                if (rng.uniform() < 0.3) {
                    counts(b, t) = static_cast<double>(1 + rng.below(9));
                    apps << "book" << 100 + b << "," << synthetic_tag_name(static_cast<std::size_t>(t)) << ","
                         << counts(b, t) << "\n";
                }
            }
        }
        const fs::path dir = scratch.path() / std::to_string(trial);
        fs::create_directories(dir);
        oracle::write_file(dir / "apps.csv", apps.str());
        PipelineConfig config = parse_config(
            R"({"seed": 1, "inputs": {"applications": "apps.csv"},
                "filter": {"min_per_book": 0, "min_total": 0, "min_books": 0}})",
            dir);
        config.out = dir / "out";
        Pipeline pipeline(config);
        pipeline.run("ingest");
        pipeline.run("tfidf");
        std::ifstream in(pipeline.stage_dir("tfidf") / "tfidf.csv");
        const SparseMatrix produced = read_matrix(in, "tfidf.csv");

        // a book without applications is not part of the corpus
        std::vector<Eigen::Index> tagged;
        for (Eigen::Index b = 0; b < n_books; ++b) {
            if (counts.row(b).any()) {
                tagged.push_back(b);
            }
        }
        const Eigen::MatrixXd expected_rows = oracle::brute_tfidf(counts(tagged, Eigen::all));
        Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(n_books, n_tags);
        for (std::size_t i = 0; i < tagged.size(); ++i) {
            expected.row(tagged[i]) = expected_rows.row(static_cast<Eigen::Index>(i));
        }
        std::map<std::string, Eigen::Index> column;
        for (Eigen::Index t = 0; t < n_tags; ++t) {
            column[synthetic_tag_name(static_cast<std::size_t>(t))] = t;
        }
        std::map<std::string, Eigen::Index> row;
        for (Eigen::Index b = 0; b < n_books; ++b) {
            row["book" + std::to_string(100 + b)] = b;
        }
        std::size_t nonempty = 0;
        for (Eigen::Index t = 0; t < n_tags; ++t) {
            nonempty += counts.col(t).any() ? 1 : 0;
        }
        if (produced.cols() != nonempty) {
            return {false, "column count mismatch in corpus " + std::to_string(trial)};
        }
        for (std::size_t r = 0; r < produced.rows(); ++r) {
            for (std::size_t c = 0; c < produced.cols(); ++c) {
                const double want =
                    expected(row.at(produced.row_labels()[r]), column.at(produced.col_labels()[c]));
                worst = std::max(worst, std::abs(produced.at(r, c) - want));
            }
        }
    }
    return {worst <= 1e-12, "50 corpora, max |diff| = " + csv::format_double(worst)};
}

// ------------------------------------------------------------------ 2

Verdict eckart_young() {
    Rng rng(202);
    double worst_sv = 0.0;
    std::size_t beaten = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXd m(10, 8);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            m.data()[i] = rng.normal();
        }
        const auto oracle_sv = oracle::singular_values(m);
        const LowRankFactors full = truncated_svd(m, 8, static_cast<std::uint64_t>(trial));
        for (std::size_t i = 0; i < oracle_sv.size(); ++i) {
            worst_sv = std::max(worst_sv, std::abs(full.s(static_cast<Eigen::Index>(i)) - oracle_sv[i]));
        }
        for (const Eigen::Index r : {1, 2, 3}) {
            const double err = (m - truncated_svd(m, r, static_cast<std::uint64_t>(trial)).reconstruct()).norm();
            for (int k = 0; k < 1000; ++k) {
                Eigen::MatrixXd a(10, r);
                Eigen::MatrixXd b(r, 8);
                for (Eigen::Index i = 0; i < a.size(); ++i) {
                    a.data()[i] = rng.normal();
                }
                for (Eigen::Index i = 0; i < b.size(); ++i) {
                    b.data()[i] = rng.normal();
                }
                // best scaling of the random factorization, so the comparison is not trivially won
                const Eigen::MatrixXd ab = a * b;
                const double scale = (ab.array() * m.array()).sum() / ab.squaredNorm();
                if ((m - scale * ab).norm() < err - 1e-12) {
                    ++beaten;
                }
            }
        }
    }
    return {beaten == 0 && worst_sv <= 1e-8, "300000 random factorizations, " + std::to_string(beaten) +
                                                 " better than SVD; max singular value error " +
                                                 csv::format_double(worst_sv)};
}

// ------------------------------------------------------------------ 3

Dataset random_problem(Rng& rng, Eigen::Index n, Eigen::Index p) {
    Dataset d;
    d.x.resize(n, p);
    d.y.resize(n);
    for (Eigen::Index i = 0; i < d.x.size(); ++i) {
        d.x.data()[i] = rng.normal();
    }
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (Eigen::Index j = 0; j < std::min<Eigen::Index>(p, 5); ++j) {
        beta(j) = rng.uniform(-2, 2);
    }
    d.y = d.x * beta;
    for (Eigen::Index i = 0; i < n; ++i) {
        d.y(i) += rng.normal();
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        d.features.push_back("x" + std::to_string(j));
    }
    return d;
}

Verdict lasso_correctness() {
    Rng rng(303);
    double kkt = 0.0;
    double ols = 0.0;
    double soft = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = static_cast<Eigen::Index>(1 + rng.below(50));
        const auto n = static_cast<Eigen::Index>(p + 10 + rng.below(static_cast<std::uint64_t>(191 - p)));
        const Dataset d = standardize(random_problem(rng, n, p)).data;
        const double lambda = lambda_max(d) * rng.uniform(0.01, 0.9);
        const LassoFit fit = lasso_fit(d, lambda);
        const Eigen::VectorXd g = d.x.transpose() * (d.y - fit.predict(d.x)) / static_cast<double>(n);
        for (Eigen::Index j = 0; j < p; ++j) {
            const double violation = fit.beta(j) == 0.0 ? std::max(0.0, std::abs(g(j)) - lambda)
                                                        : std::abs(g(j) - lambda * (fit.beta(j) > 0 ? 1 : -1));
            kkt = std::max(kkt, violation);
        }

        const Dataset raw = random_problem(rng, n, p);
        const LassoFit zero = lasso_fit(raw, 0.0, {1e-12, 10000000});
        const Eigen::VectorXd reference = oracle::ols_normal_equations(raw.x, raw.y);
        ols = std::max(ols, std::abs(zero.intercept - reference(0)));
        for (Eigen::Index j = 0; j < p; ++j) {
            ols = std::max(ols, std::abs(zero.beta(j) - reference(j + 1)));
        }

        Eigen::MatrixXd cols(n, p);
        for (Eigen::Index i = 0; i < cols.size(); ++i) {
            cols.data()[i] = rng.normal();
        }
        cols.rowwise() -= cols.colwise().mean();
        Dataset ortho = raw;
        ortho.x = Eigen::MatrixXd(Eigen::HouseholderQR<Eigen::MatrixXd>(cols).householderQ() *
                                  Eigen::MatrixXd::Identity(n, p)) *
                  std::sqrt(static_cast<double>(n));
        const LassoFit closed = lasso_fit(ortho, lambda, {1e-13, 1000000});
        const Eigen::VectorXd yc = ortho.y.array() - ortho.y.mean();
        for (Eigen::Index j = 0; j < p; ++j) {
            const double z = ortho.x.col(j).dot(yc) / static_cast<double>(n);
            const double expected = z > lambda ? z - lambda : (z < -lambda ? z + lambda : 0.0);
            soft = std::max(soft, std::abs(closed.beta(j) - expected));
        }
    }
    return {kkt <= 1e-6 && ols <= 1e-6 && soft <= 1e-8,
            "50 problems, max KKT violation " + csv::format_double(kkt) + ", OLS error " + csv::format_double(ols) +
                ", soft-threshold error " + csv::format_double(soft)};
}

// ------------------------------------------------------------------ 4

Verdict cv_sign_recovery() {
    int recovered = 0;
    for (int seed = 0; seed < 20; ++seed) {
        Rng rng(400 + static_cast<std::uint64_t>(seed));
        Dataset d;
        d.x.resize(300, 40);
        for (Eigen::Index i = 0; i < d.x.size(); ++i) {
            d.x.data()[i] = rng.normal();
        }
        Eigen::VectorXd truth = Eigen::VectorXd::Zero(40);
        std::vector<std::size_t> idx(40);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        rng.shuffle(std::span<std::size_t>(idx));
        for (int k = 0; k < 5; ++k) {
            const double magnitude = rng.uniform(0.5, 2.0);
            truth(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(k)])) = rng.uniform() < 0.5 ? -magnitude : magnitude;
        }
        d.y = d.x * truth;
        for (int j = 0; j < 40; ++j) {
            d.features.push_back("x" + std::to_string(j));
        }
        CvOptions options;
        options.folds = 10;
        options.seed = static_cast<std::uint64_t>(seed);
        const LassoFit fit = cv_select_lambda(standardize(d).data, options);
        bool ok = true;
        for (Eigen::Index j = 0; j < 40; ++j) {
            const auto sign = [](double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); };
            ok = ok && sign(fit.beta(j)) == sign(truth(j));
        }
        recovered += ok ? 1 : 0;
    }
    return {recovered >= 18, std::to_string(recovered) + "/20 seeds recover the exact sign pattern"};
}

// ------------------------------------------------------------------ 5

Verdict forest_importance() {
    int separated = 0;
    double slowest = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
        Rng rng(500 + static_cast<std::uint64_t>(seed));
        Dataset d;
        d.x.resize(400, 55);
        d.y.resize(400);
        for (Eigen::Index i = 0; i < d.x.size(); ++i) {
            d.x.data()[i] = rng.normal();
        }
        for (Eigen::Index i = 0; i < 400; ++i) {
            d.y(i) = d.x.row(i).head(5).sum() + 0.5 * rng.normal();
        }
        for (int j = 0; j < 55; ++j) {
            d.features.push_back("x" + std::to_string(j));
        }
        ForestOptions options;
        options.n_trees = 200;
        options.seed = static_cast<std::uint64_t>(seed);
        const auto start = std::chrono::steady_clock::now();
        const ForestFit fit = forest_fit(d, options);
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        separated += fit.importance.head(5).minCoeff() > fit.importance.tail(50).maxCoeff() ? 1 : 0;
    }
    return {separated >= 19 && slowest < 30.0,
            std::to_string(separated) + "/20 seeds separate informative from noise; slowest seed " + fmt(slowest, 2) +
                " s"};
}

// ------------------------------------------------------------------ 6

Verdict pam_silhouette() {
    Rng rng(606);
    std::size_t exhaustive_ok = 0;
    std::size_t trace_ok = 0;
    for (int trial = 0; trial < 200; ++trial) {
        Points pts;
        const double gap = rng.uniform(5, 50);
        for (const auto& c : std::array<std::array<double, 2>, 2>{{{0, 0}, {gap, rng.uniform(-gap, gap)}}}) {
            for (int i = 0; i < 3; ++i) {
                pts.push_back({c[0] + rng.normal(), c[1] + rng.normal()});
            }
        }
        const DistanceMatrix d = euclidean(pts);
        std::vector<std::vector<double>> table(6, std::vector<double>(6));
        for (std::size_t i = 0; i < 6; ++i) {
            for (std::size_t j = 0; j < 6; ++j) {
                table[i][j] = d(i, j);
            }
        }
        const auto result = pam(d, 2);
        exhaustive_ok += std::abs(result.cost - oracle::exhaustive_medoids(table, 2).cost) < 1e-12 ? 1 : 0;

        Points random(6);
        for (auto& p : random) {
            p = {rng.uniform(0, 10), rng.uniform(0, 10)};
        }
        const auto any = pam(euclidean(random), 1 + rng.below(5));
        bool decreasing = true;
        for (std::size_t i = 1; i < any.cost_trace.size(); ++i) {
            decreasing = decreasing && any.cost_trace[i] <= any.cost_trace[i - 1];
        }
        trace_ok += decreasing ? 1 : 0;
    }
    int found = 0;
    for (int seed = 0; seed < 20; ++seed) {
        Rng blobs(660 + static_cast<std::uint64_t>(seed));
        Points pts;
        for (int c = 0; c < 6; ++c) {
            const double cx = 10.0 * (c % 3);
            const double cy = 10.0 * (c / 3);
            for (int i = 0; i < 15; ++i) {
                pts.push_back({cx + blobs.normal(), cy + blobs.normal()});
            }
        }
        found += select_k(euclidean(pts), 2, 12).k == 6 ? 1 : 0;
    }
    return {exhaustive_ok == 200 && trace_ok == 200 && found >= 18,
            std::to_string(exhaustive_ok) + "/200 exhaustive matches, " + std::to_string(trace_ok) +
                "/200 non-increasing traces, k = 6 selected in " + std::to_string(found) + "/20 seeds"};
}

// ------------------------------------------------------------------ 7

Verdict optics_blobs() {
    int good = 0;
    int knee_two = 0;
    double worst_agreement = 1.0;
    for (int seed = 0; seed < 20; ++seed) {
        Rng rng(700 + static_cast<std::uint64_t>(seed));
        const std::array<std::array<double, 2>, 2> centers{{{0, 0}, {12, 0}}};
        Points pts;
        std::vector<int> planted;
        for (int c = 0; c < 2; ++c) {
            for (int i = 0; i < 95; ++i) {
                pts.push_back({centers[static_cast<std::size_t>(c)][0] + rng.normal(),
                               centers[static_cast<std::size_t>(c)][1] + rng.normal()});
                planted.push_back(c);
            }
        }
        while (pts.size() < 200) {
            const std::array<double, 2> p{rng.uniform(-15, 27), rng.uniform(-15, 15)};
            bool far = true;
            for (const auto& c : centers) {
                far = far && std::hypot(p[0] - c[0], p[1] - c[1]) > 5.0;
            }
            if (far) {
                pts.push_back(p);
                planted.push_back(kNoise);
            }
        }
        const auto ordering = optics(euclidean(pts), {5});
        // two blob standard deviations: between the intra- and inter-blob scales
        const auto clusters = extract_clusters(ordering, 2.0);
        knee_two += extract_clusters(ordering, knee_eps(ordering)).k == 2 ? 1 : 0;
        if (clusters.k != 2) {
            continue;
        }
        // best of the two label matchings
        std::size_t direct = 0;
        std::size_t swapped = 0;
        bool outliers_noise = true;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const int got = clusters.assignment[i];
            if (planted[i] == kNoise) {
                outliers_noise = outliers_noise && got == kNoise;
                continue;
            }
            direct += got == planted[i] ? 1 : 0;
            swapped += got == 1 - planted[i] ? 1 : 0;
        }
        const double agreement = static_cast<double>(std::max(direct, swapped)) / 190.0;
        worst_agreement = std::min(worst_agreement, agreement);
        good += agreement >= 0.98 && outliers_noise ? 1 : 0;
    }
    return {good == 20, std::to_string(good) + "/20 seeds with 2 clusters, >= 98% agreement and all outliers noise "
                                               "at eps_cut 2 (worst agreement " + fmt(worst_agreement) + "); knee cut gives 2 clusters in " +
                            std::to_string(knee_two) + "/20"};
}

// ------------------------------------------------------------------ 8

struct SynthRun {
    std::vector<CorrelationEntry> correlations;
    std::vector<CorrelationEntry> disposition;
    std::string planted_cluster;
};

std::vector<CorrelationEntry> read_entries(const fs::path& path) {
    std::ifstream in(path);
    return read_correlations(in, path.string());
}

SynthRun run_synth(const fs::path& out, const std::string& synth_json, std::uint64_t seed) {
    PipelineConfig config =
        parse_config(R"({"synth": )" + synth_json + R"(, "regression": {"trees": 50}})", out, seed);
    config.out = out;
    Pipeline pipeline(config);
    for (const auto* stage : {"synth", "ingest", "tfidf", "tagsim", "tagcluster", "consolidate", "correlate",
                              "disposition"}) {
        pipeline.run(stage);
    }
    SynthRun run;
    run.correlations = read_entries(pipeline.stage_dir("correlate") / "correlations.csv");
    run.disposition = read_entries(pipeline.stage_dir("disposition") / "disposition.csv");

    const json truth = read_json(pipeline.stage_dir("synth") / "truth.json");
    std::set<std::string> group0;
    for (const auto& tag : truth.at("tag_groups").at(0)) {
        group0.insert(tag.get<std::string>());
    }
    std::map<std::string, int> votes;
    const auto rows = read_csv(pipeline.stage_dir("tagcluster") / "tag_clusters.csv");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (group0.count(rows[i][0]) != 0 && rows[i][1] != "NOISE") {
            ++votes[rows[i][1]];
        }
    }
    int best = 0;
    for (const auto& [label, count] : votes) {
        if (count > best) {
            best = count;
            run.planted_cluster = label;
        }
    }
    return run;
}

const CorrelationEntry* find_entry(const std::vector<CorrelationEntry>& table, const std::string& feature,
                                   Trait trait) {
    for (const auto& e : table) {
        if (e.feature == feature && e.trait == trait) {
            return &e;
        }
    }
    return nullptr;
}

Verdict planted_correlation() {
    oracle::ScratchDir scratch("acc-planted");
    const SynthRun planted = run_synth(
        scratch.path() / "planted",
        R"({"n_pages": 500, "n_users": 5000, "planted": [{"group": 0, "trait": "openness", "rho": 0.3}],
            "disposition": {"trait": "openness", "rho": 0.12}})",
        808);
    const CorrelationEntry* hit = find_entry(planted.correlations, planted.planted_cluster, Trait::openness);
    const CorrelationEntry* likes = find_entry(planted.disposition, "liked_pages", Trait::openness);
    const bool planted_ok = hit != nullptr && hit->r >= 0.2 && hit->r <= 0.4 && hit->p < 0.01;
    const bool likes_ok = likes != nullptr && likes->r >= 0.09 && likes->r <= 0.15 && likes->p < 0.001;

    int quiet = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const SynthRun null_run =
            run_synth(scratch.path() / ("null" + std::to_string(seed)), R"({"n_pages": 500})", 820 + seed);
        bool any = null_run.planted_cluster.empty();
        for (const auto trait : kAllTraits) {
            const CorrelationEntry* e = find_entry(null_run.correlations, null_run.planted_cluster, trait);
            any = any || e == nullptr || (e->defined && e->p < 0.01);
        }
        quiet += any ? 0 : 1;
    }
    std::ostringstream detail;
    detail << "planted r = " << (hit ? fmt(hit->r) : "missing") << " (p = " << (hit ? csv::format_double(hit->p) : "-")
           << "), likes r = " << (likes ? fmt(likes->r) : "missing") << " (n = " << (likes ? likes->n : 0)
           << "), zero-effect seeds without p < 0.01: " << quiet << "/20";
    return {planted_ok && likes_ok && quiet >= 18, detail.str()};
}

// ------------------------------------------------------------------ 9, 10

const char* const kFullConfig = R"({
  "seed": 909,
  "synth": {"planted": [{"group": 0, "trait": "openness", "rho": 0.3}],
            "disposition": {"trait": "openness", "rho": 0.12}},
  "regression": {"trees": 100}
})";

std::map<std::string, std::string> tree_contents(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) {
            files[fs::relative(entry.path(), root).string()] = oracle::read_file(entry.path());
        }
    }
    return files;
}

/// Two full pipeline runs of the same config, at 1 and 8 workers.
struct FullRuns {
    oracle::ScratchDir one{"acc-w1"};
    oracle::ScratchDir eight{"acc-w8"};
    bool done = false;

    void ensure() {
        if (done) {
            return;
        }
        for (const auto& [dir, workers] : {std::pair{&one, 1u}, std::pair{&eight, 8u}}) {
            PipelineConfig config = parse_config(kFullConfig, dir->path());
            config.out = dir->path();
            config.workers = workers;
            Pipeline(config).run_all();
        }
        done = true;
    }
};

Verdict determinism(FullRuns& runs) {
    runs.ensure();
    const auto a = tree_contents(runs.one.path());
    const auto b = tree_contents(runs.eight.path());
    std::size_t differing = a.size() == b.size() ? 0 : 1;
    for (const auto& [name, text] : a) {
        differing += (b.count(name) == 0 || b.at(name) != text) ? 1 : 0;
    }
    const bool report_present = a.count("report/top_correlations.csv") == 1 && a.count("report/summary.json") == 1;
    return {differing == 0 && report_present,
            std::to_string(a.size()) + " artifacts compared, " + std::to_string(differing) + " differ"};
}

Verdict report_table(FullRuns& runs) {
    runs.ensure();
    const fs::path report = runs.one.path() / "report";
    const auto rows = read_csv(report / "top_correlations.csv");
    const auto table = read_entries(runs.one.path() / "correlate" / "correlations.csv");
    const std::vector<std::string> header{"trait",           "low_pole",       "high_pole",       "rank",
                                          "negative_feature", "negative_r",    "negative_stars",  "positive_feature",
                                          "positive_r",       "positive_stars"};
    if (rows.empty() || rows[0] != header) {
        return {false, "unexpected header"};
    }
    std::map<std::string, int> per_trait;
    std::size_t checked = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != header.size()) {
            return {false, "row " + std::to_string(i) + " has the wrong width"};
        }
        const Trait trait = trait_from_name(row[0]);
        ++per_trait[row[0]];
        if (trait_poles(trait).first != row[1] || trait_poles(trait).second != row[2]) {
            return {false, "wrong poles for " + row[0]};
        }
        for (const std::size_t side : {std::size_t{4}, std::size_t{7}}) {
            if (row[side].empty()) {
                continue;
            }
            const CorrelationEntry* e = find_entry(table, row[side], trait);
            if (e == nullptr) {
                return {false, "feature " + row[side] + " not in the correlation table"};
            }
            if (csv::format_fixed(e->r, 2) != row[side + 1] || significance_stars(e->p) != row[side + 2]) {
                return {false, "r or stars disagree for " + row[side] + "/" + row[0]};
            }
            if ((side == 4) != (e->r < 0) && e->r != 0.0) {
                return {false, "sign on the wrong side for " + row[side]};
            }
            ++checked;
        }
    }
    // one row per rank, as deep as the longer of the two signed lists (at most 5)
    bool ranks_ok = per_trait.size() == kTraitCount;
    for (const auto trait : kAllTraits) {
        int positive = 0;
        int negative = 0;
        for (const auto& e : table) {
            if (e.trait == trait && e.defined) {
                positive += e.r > 0 ? 1 : 0;
                negative += e.r < 0 ? 1 : 0;
            }
        }
        const int expected = std::max(std::min(positive, 5), std::min(negative, 5));
        ranks_ok = ranks_ok && per_trait[std::string(trait_name(trait))] == expected;
    }
    const std::string text = oracle::read_file(report / "top_correlations.txt");
    const bool legend = text.find("TAG CLUSTERS MOST CORRELATED WITH PERSONALITY") != std::string::npos &&
                        text.find("* p < 0.05") != std::string::npos && text.find("** p < 0.01") != std::string::npos &&
                        text.find("*** p < 0.001") != std::string::npos;
    return {ranks_ok && legend && checked > 0,
            std::to_string(rows.size() - 1) + " rows, " + std::to_string(checked) +
                " cells matched against the correlation table"};
}

}  // namespace

int main(int argc, char** argv) {
    // Optional arguments select criteria by number; default is all.
    std::set<std::size_t> selected;
    for (int i = 1; i < argc; ++i) {
        selected.insert(static_cast<std::size_t>(std::stoul(argv[i])));
    }
    FullRuns runs;
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"tf-idf matches brute-force evaluation", tfidf_oracle},
        {"truncated SVD is the best rank-r approximation", eckart_young},
        {"lasso KKT, OLS and soft-threshold agreement", lasso_correctness},
        {"10-fold CV recovers planted sign patterns", cv_sign_recovery},
        {"forest importance ranks informative features first", forest_importance},
        {"PAM exhaustive equivalence and k selection", pam_silhouette},
        {"OPTICS separates two blobs from outliers", optics_blobs},
        {"end-to-end planted correlations", planted_correlation},
        {"worker-count independent artifacts", [&] { return determinism(runs); }},
        {"top-5 correlation report", [&] { return report_table(runs); }},
    };
    const std::array<double, 10> budget{5.0, 60.0, 0, 0, 0, 0, 0, 0, 0, 0};

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected.empty() && selected.count(i + 1) == 0) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Verdict verdict;
        try {
            verdict = criteria[i].second();
        } catch (const std::exception& e) {
            verdict = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (budget[i] > 0 && seconds >= budget[i]) {
            verdict.pass = false;
            verdict.detail += "; over the " + fmt(budget[i], 0) + " s budget";
        }
        failures += verdict.pass ? 0 : 1;
        std::cout << (verdict.pass ? "PASS" : "FAIL") << " " << i + 1 << ". " << criteria[i].first << ": "
                  << verdict.detail << " [" << fmt(seconds, 2) << " s]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
