#include "stages.hpp"

#include "tagprof/cluster.hpp"
#include "tagprof/csv.hpp"
#include "tagprof/lexsim.hpp"
#include "tagprof/lowrank.hpp"
#include "tagprof/matrix.hpp"
#include "tagprof/regress.hpp"
#include "tagprof/rng.hpp"
#include "tagprof/stats.hpp"
#include "tagprof/svg.hpp"
#include "tagprof/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace tagprof::detail {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::ofstream StageContext::create(const std::string& name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + (dir / name).string());
    }
    artifacts.push_back(name);
    return out;
}

std::ifstream StageContext::open(std::string_view stage_name, const std::string& name) const {
    const fs::path path = path_of(stage_name, name);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    return in;
}

namespace {

std::string source_of(const StageContext& ctx, std::string_view stage, const std::string& name) {
    return ctx.path_of(stage, name).string();
}

void write_json_artifact(StageContext& ctx, const std::string& name, const ordered_json& doc) {
    auto out = ctx.create(name);
    out << doc.dump(2) << '\n';
}

ordered_json read_json_artifact(const StageContext& ctx, std::string_view stage, const std::string& name) {
    auto in = ctx.open(stage, name);
    return ordered_json::parse(in);
}

SparseMatrix read_matrix_artifact(const StageContext& ctx, std::string_view stage, const std::string& name) {
    auto in = ctx.open(stage, name);
    return read_matrix(in, source_of(ctx, stage, name));
}

void write_matrix_artifact(StageContext& ctx, const std::string& name, const SparseMatrix& m,
                           const std::string& kind) {
    auto out = ctx.create(name);
    write_matrix(out, m, kind);
}

CorpusPaths ingested_paths(const StageContext& ctx) {
    return {ctx.path_of("ingest", "applications.csv"), ctx.path_of("ingest", "pages.csv"),
            ctx.path_of("ingest", "users.jsonl")};
}

TagCorpus load_ingested(const StageContext& ctx) {
    return load_corpus(ingested_paths(ctx), LoadOptions{ctx.config.bounds});
}

PageTraits load_page_traits(const StageContext& ctx) {
    auto in = ctx.open("ingest", "page_traits.csv");
    return read_page_traits(in, source_of(ctx, "ingest", "page_traits.csv"));
}

ClusterResult load_clusters(const StageContext& ctx, std::string_view stage, const std::string& name) {
    auto in = ctx.open(stage, name);
    return read_clusters(in, source_of(ctx, stage, name));
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t id) { return Rng(seed).split(id)(); }

/// Pages present in both the feature matrix and the trait table, as a
/// regression design plus the per-trait targets.
struct Design {
    Eigen::MatrixXd x;
    std::vector<std::string> pages;
    std::vector<std::string> features;
    std::vector<TraitScores> traits;

    Dataset dataset(Trait trait) const {
        Dataset d;
        d.x = x;
        d.y.resize(static_cast<Eigen::Index>(traits.size()));
        for (std::size_t i = 0; i < traits.size(); ++i) {
            d.y(static_cast<Eigen::Index>(i)) = at(traits[i], trait);
        }
        d.features = features;
        return d;
    }
};

Design load_design(const StageContext& ctx) {
    const SparseMatrix features = read_matrix_artifact(ctx, "consolidate", "page_features.csv");
    const PageTraits traits = load_page_traits(ctx);
    const Eigen::MatrixXd dense = features.to_dense();
    Design design;
    design.features = features.col_labels();
    std::vector<Eigen::Index> rows;
    for (std::size_t r = 0; r < features.rows(); ++r) {
        const auto it = traits.find(features.row_labels()[r]);
        if (it != traits.end()) {
            rows.push_back(static_cast<Eigen::Index>(r));
            design.pages.push_back(it->first);
            design.traits.push_back(it->second);
        }
    }
    design.x.resize(static_cast<Eigen::Index>(rows.size()), dense.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        design.x.row(static_cast<Eigen::Index>(i)) = dense.row(rows[i]);
    }
    return design;
}

bool constant_target(const Dataset& d) { return d.y.size() == 0 || (d.y.array() == d.y(0)).all(); }

// ---------------------------------------------------------------- stages

void run_synth(StageContext& ctx) {
    const SynthResult result = generate_with_truth(*ctx.config.synth);
    {
        auto out = ctx.create("applications.csv");
        write_applications(out, result.corpus);
    }
    {
        auto out = ctx.create("pages.csv");
        write_pages(out, result.corpus);
    }
    {
        auto out = ctx.create("users.jsonl");
        write_users(out, result.corpus);
    }
    auto out = ctx.create("truth.json");
    write_truth(out, result);
}

void run_ingest(StageContext& ctx) {
    const CorpusPaths paths = ctx.config.uses_synth_inputs()
                                  ? CorpusPaths{ctx.path_of("synth", "applications.csv"),
                                                ctx.path_of("synth", "pages.csv"), ctx.path_of("synth", "users.jsonl")}
                                  : ctx.config.inputs;
    const TagCorpus corpus = load_corpus(paths, LoadOptions{ctx.config.bounds}, &ctx.diag);
    const TagCorpus filtered = filter_tags(corpus, ctx.config.filter);
    const PageTraits traits = aggregate_page_traits(filtered, ctx.config.filter);
    if (filtered.tags.empty()) {
        ctx.diag.warn("no tags survive filtering");
    }
    {
        auto out = ctx.create("applications.csv");
        write_applications(out, filtered);
    }
    {
        auto out = ctx.create("pages.csv");
        write_pages(out, filtered);
    }
    {
        auto out = ctx.create("users.jsonl");
        write_users(out, filtered);
    }
    {
        auto out = ctx.create("page_traits.csv");
        write_page_traits(out, traits);
    }
    ordered_json summary;
    summary["books"] = corpus.books.size();
    summary["tags_loaded"] = corpus.tags.size();
    summary["tags_kept"] = filtered.tags.size();
    summary["applications_loaded"] = corpus.applications.size();
    summary["applications_kept"] = filtered.applications.size();
    summary["pages"] = filtered.page_books.size();
    summary["users"] = filtered.users.size();
    summary["scored_pages"] = traits.size();
    write_json_artifact(ctx, "summary.json", summary);
}

void run_tfidf(StageContext& ctx) {
    const TagCorpus corpus = load_ingested(ctx);
    const SparseMatrix counts = build_count_matrix(corpus);
    const SparseMatrix weights = tfidf(counts);
    write_matrix_artifact(ctx, "counts.csv", counts, "counts");
    write_matrix_artifact(ctx, "tfidf.csv", weights, "tfidf");
    write_json_artifact(ctx, "summary.json",
                        {{"books", weights.rows()}, {"tags", weights.cols()}, {"nonzeros", weights.nonzeros()}});
}

void run_tagsim(StageContext& ctx) {
    const SparseMatrix weights = read_matrix_artifact(ctx, "tfidf", "tfidf.csv");
    if (weights.cols() < 2 || weights.rows() < 1) {
        throw std::runtime_error("tag similarity needs at least two tags after filtering");
    }
    const auto limit = static_cast<long long>(std::min(weights.rows(), weights.cols()));
    long long rank = ctx.config.similarity.rank;
    if (rank > limit) {
        ctx.diag.warn("co-occurrence rank " + std::to_string(rank) + " clamped to " + std::to_string(limit));
        rank = limit;
    }
    const LowRankFactors factors = truncated_svd(weights, rank, sub_seed(ctx.seed, 1));
    const CosineLookup co = column_similarity(factors, &ctx.diag);

    const LemmaRules rules = ctx.config.similarity.lemma_rules.empty()
                                 ? LemmaRules::english()
                                 : LemmaRules::load(ctx.config.similarity.lemma_rules);
    const auto& tags = weights.col_labels();
    const LexicalSimilarity lex =
        lexical_similarity_matrix(tags, rules, ctx.config.similarity.lexical_rank, sub_seed(ctx.seed, 2), &ctx.diag);

    const double w = ctx.config.similarity.fusion_weight;
    const DistanceMatrix distances = DistanceMatrix::from_function(
        tags.size(),
        [&](std::size_t i, std::size_t j) {
            const auto a = static_cast<Eigen::Index>(i);
            const auto b = static_cast<Eigen::Index>(j);
            return similarity_to_distance(fuse_similarity(co(a, b), lex.lookup(a, b), w));
        },
        ctx.config.workers, tags);

    Eigen::MatrixXd dense(static_cast<Eigen::Index>(tags.size()), static_cast<Eigen::Index>(tags.size()));
    for (std::size_t i = 0; i < tags.size(); ++i) {
        for (std::size_t j = 0; j < tags.size(); ++j) {
            dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = distances(i, j);
        }
    }
    {
        auto out = ctx.create("tag_distance.csv");
        write_dense(out, dense, tags, tags, "tag");
    }
    write_factors(factors, ctx.dir / "cooc");
    for (const char* suffix : {"cooc_u.csv", "cooc_s.csv", "cooc_v.csv"}) {
        ctx.artifacts.emplace_back(suffix);
    }
    write_matrix_artifact(ctx, "lexical_tfidf.csv", lex.tag_lemma_tfidf, "tag_lemma_tfidf");

    ordered_json summary;
    summary["tags"] = tags.size();
    summary["rank"] = rank;
    summary["svd_iterations"] = factors.iterations;
    summary["lexical_rank"] = lex.tag_lemma_tfidf.cols() == 0 ? 0 : lex.lookup.unit_vectors().cols();
    summary["tags_without_lemmas"] = lex.zero_lemma_tags;
    summary["fusion_weight"] = w;
    write_json_artifact(ctx, "summary.json", summary);
}

void run_tagcluster(StageContext& ctx) {
    DenseTable table;
    {
        auto in = ctx.open("tagsim", "tag_distance.csv");
        table = read_dense(in, source_of(ctx, "tagsim", "tag_distance.csv"));
    }
    const std::size_t n = table.row_labels.size();
    DistanceMatrix distances(n, table.row_labels);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            distances.set(i, j, table.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
    }
    const ReachabilityOrdering ordering =
        optics(distances, OpticsParams{ctx.config.optics.min_pts, ctx.config.optics.max_eps});
    const double eps = ctx.config.optics.eps_cut.value_or(knee_eps(ordering));
    ClusterResult clusters = extract_clusters(ordering, eps);
    if (!ctx.config.optics.overrides.empty()) {
        std::ifstream in(ctx.config.optics.overrides, std::ios::binary);
        const ClusterResult overrides = read_clusters(in, ctx.config.optics.overrides.string());
        clusters = apply_overrides(clusters, overrides, &ctx.diag);
    }
    if (clusters.k == 0) {
        throw std::runtime_error("no tag clusters found at eps_cut " + csv::format_double(eps) +
                                 "; adjust optics.eps_cut or optics.min_pts");
    }

    // each cluster is named after its member with the largest tf-idf mass
    const SparseMatrix weights = read_matrix_artifact(ctx, "tfidf", "tfidf.csv");
    std::map<std::string, double> mass;
    for (std::size_t c = 0; c < weights.cols(); ++c) {
        mass[weights.col_labels()[c]] = 0.0;
    }
    for (std::size_t r = 0; r < weights.rows(); ++r) {
        for (const auto& entry : weights.row(r)) {
            mass[weights.col_labels()[entry.col]] += entry.value;
        }
    }
    const auto members = clusters.members();
    clusters.names.assign(clusters.k, {});
    for (std::size_t g = 0; g < clusters.k; ++g) {
        std::size_t best = members[g].front();
        for (const auto item : members[g]) {
            const double m = mass[clusters.items[item]];
            const double b = mass[clusters.items[best]];
            if (m > b || (m == b && clusters.items[item] < clusters.items[best])) {
                best = item;
            }
        }
        clusters.names[g] = clusters.items[best];
    }

    {
        auto out = ctx.create("reachability.csv");
        write_reachability(out, ordering);
    }
    {
        auto out = ctx.create("reachability.svg");
        write_reachability_svg(out, ordering, eps);
    }
    {
        auto out = ctx.create("tag_clusters.csv");
        write_clusters(out, clusters);
    }
    ordered_json sizes = ordered_json::object();
    for (std::size_t g = 0; g < clusters.k; ++g) {
        sizes[clusters.name_of(g)] = members[g].size();
    }
    ordered_json summary;
    summary["eps_cut"] = eps;
    summary["eps_source"] = ctx.config.optics.eps_cut ? "config" : "knee";
    summary["clusters"] = clusters.k;
    summary["noise"] = clusters.noise_count();
    summary["sizes"] = sizes;
    write_json_artifact(ctx, "summary.json", summary);
}

void run_consolidate(StageContext& ctx) {
    const SparseMatrix weights = read_matrix_artifact(ctx, "tfidf", "tfidf.csv");
    const ClusterResult clusters = load_clusters(ctx, "tagcluster", "tag_clusters.csv");
    const SparseMatrix book_clusters = consolidate_tag_clusters(weights, clusters);
    const SparseMatrix books = normalize_rows(book_clusters, &ctx.diag).matrix;
    const TagCorpus corpus = load_ingested(ctx);
    const SparseMatrix pages = consolidate_pages(books, corpus.page_books, &ctx.diag);
    write_matrix_artifact(ctx, "book_features.csv", books, "book_cluster");
    write_matrix_artifact(ctx, "page_features.csv", pages, "page_cluster");
    write_json_artifact(ctx, "summary.json",
                        {{"books", books.rows()}, {"pages", pages.rows()}, {"clusters", pages.cols()}});
}

void run_correlate(StageContext& ctx) {
    const SparseMatrix features = read_matrix_artifact(ctx, "consolidate", "page_features.csv");
    const PageTraits traits = load_page_traits(ctx);
    const auto table = correlation_table(features, traits, ctx.config.workers, &ctx.diag);
    {
        auto out = ctx.create("correlations.csv");
        write_correlations(out, table);
    }
    std::size_t s1 = 0;
    std::size_t s2 = 0;
    std::size_t s3 = 0;
    for (const auto& e : table) {
        if (e.defined) {
            s1 += e.p < 0.05 ? 1 : 0;
            s2 += e.p < 0.01 ? 1 : 0;
            s3 += e.p < 0.001 ? 1 : 0;
        }
    }
    write_json_artifact(ctx, "summary.json",
                        {{"entries", table.size()}, {"p_below_0.05", s1}, {"p_below_0.01", s2}, {"p_below_0.001", s3}});
}

void run_lasso(StageContext& ctx) {
    const Design design = load_design(ctx);
    auto summary = ctx.create("lasso_summary.csv");
    summary << "trait,lambda,nonzero,r2,cv_r2\n";
    for (const Trait trait : kAllTraits) {
        const Dataset data = design.dataset(trait);
        const std::string name(trait_name(trait));
        if (data.samples() < static_cast<Eigen::Index>(ctx.config.regression.folds) || constant_target(data) ||
            data.features_count() == 0) {
            ctx.diag.warn("lasso for " + name + " skipped: too few pages, no features, or constant target");
            continue;
        }
        // coefficients are reported in standardized feature units
        const Standardized standardized = standardize(data);
        CvOptions options;
        options.folds = ctx.config.regression.folds;
        options.grid = default_lambda_grid(standardized.data, ctx.config.regression.lambda_grid,
                                           ctx.config.regression.lambda_ratio);
        options.seed = sub_seed(ctx.seed, static_cast<std::uint64_t>(trait));
        options.workers = ctx.config.workers;
        LassoFit fit = cv_select_lambda(standardized.data, options);
        fit.intercept += standardized.y_mean;
        {
            auto out = ctx.create("lasso_" + name + ".json");
            write_json(out, fit, name);
        }
        const auto nonzero = (fit.beta.array() != 0.0).count();
        csv::write_row(summary, {name, csv::format_double(fit.lambda), std::to_string(nonzero),
                                 csv::format_double(fit.r2), csv::format_double(fit.cv_r2)});
    }
}

void run_forest(StageContext& ctx) {
    const Design design = load_design(ctx);
    auto summary = ctx.create("forest_summary.csv");
    summary << "trait,mtry,r2,oob_r2,oob_mse\n";
    auto importance = ctx.create("importance.csv");
    importance << "trait,feature,importance\n";
    for (const Trait trait : kAllTraits) {
        const Dataset data = design.dataset(trait);
        const std::string name(trait_name(trait));
        if (data.samples() < 2 || constant_target(data) || data.features_count() == 0) {
            ctx.diag.warn("forest for " + name + " skipped: too few pages, no features, or constant target");
            continue;
        }
        ForestOptions options;
        options.n_trees = ctx.config.regression.trees;
        options.mtry = ctx.config.regression.mtry;
        if (options.mtry > static_cast<std::size_t>(data.features_count())) {
            ctx.diag.warn("mtry clamped to the feature count for " + name);
            options.mtry = static_cast<std::size_t>(data.features_count());
        }
        options.min_leaf = ctx.config.regression.min_leaf;
        options.seed = sub_seed(ctx.seed, static_cast<std::uint64_t>(trait));
        options.workers = ctx.config.workers;
        options.importance_repeats = ctx.config.regression.importance_repeats;
        const ForestFit fit = forest_fit(data, options);
        {
            auto out = ctx.create("forest_" + name + ".json");
            write_json(out, fit, name);
        }
        csv::write_row(summary, {name, std::to_string(fit.mtry), csv::format_double(fit.r2),
                                 csv::format_double(fit.oob_r2), csv::format_double(fit.oob_mse)});
        for (std::size_t j = 0; j < fit.features.size(); ++j) {
            csv::write_row(importance,
                           {name, fit.features[j], csv::format_double(fit.importance(static_cast<Eigen::Index>(j)))});
        }
    }
}

void run_genres(StageContext& ctx) {
    const SparseMatrix all_pages = read_matrix_artifact(ctx, "consolidate", "page_features.csv");
    std::vector<Triplet> kept;
    std::vector<std::string> labels;
    for (std::size_t r = 0; r < all_pages.rows(); ++r) {
        if (all_pages.row(r).empty()) {
            ctx.diag.warn("page '" + all_pages.row_labels()[r] + "' has no features; left out of genre clustering");
            continue;
        }
        for (const auto& entry : all_pages.row(r)) {
            kept.push_back({labels.size(), entry.col, entry.value});
        }
        labels.push_back(all_pages.row_labels()[r]);
    }
    const SparseMatrix features =
        SparseMatrix::from_triplets(labels, all_pages.col_labels(), std::move(kept));
    if (features.rows() < ctx.config.genres.k_min) {
        throw std::runtime_error("genre clustering needs at least k_min = " + std::to_string(ctx.config.genres.k_min) +
                                 " pages");
    }
    const DistanceMatrix distances = book_dissimilarity(features, ctx.config.workers, &ctx.diag);
    KSelection selection = select_k(distances, ctx.config.genres.k_min, ctx.config.genres.k_max, ctx.config.workers);
    ClusterResult& genres = selection.result.clusters;

    // each genre is named after the tag cluster with the largest mean weight among its pages
    const Eigen::MatrixXd dense = features.to_dense();
    const auto members = genres.members();
    genres.names.assign(genres.k, {});
    std::set<std::string> used;
    for (std::size_t g = 0; g < genres.k; ++g) {
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(dense.cols());
        for (const auto item : members[g]) {
            mean += dense.row(static_cast<Eigen::Index>(item));
        }
        Eigen::Index best = 0;
        if (dense.cols() > 0) {
            mean.maxCoeff(&best);
        }
        std::string name = dense.cols() > 0 ? features.col_labels()[static_cast<std::size_t>(best)] : "genre";
        std::string candidate = name;
        for (int suffix = 2; used.contains(candidate); ++suffix) {
            candidate = name + "-" + std::to_string(suffix);
        }
        used.insert(candidate);
        genres.names[g] = candidate;
    }

    {
        auto out = ctx.create("genres.csv");
        write_clusters(out, genres);
    }
    {
        auto out = ctx.create("k_table.csv");
        out << "k,mean_silhouette,median_silhouette,cost\n";
        for (const auto& row : selection.table) {
            csv::write_row(out, {std::to_string(row.k), csv::format_double(row.mean_silhouette),
                                 csv::format_double(row.median_silhouette), csv::format_double(row.cost)});
        }
    }
    ordered_json summary;
    summary["k"] = selection.k;
    summary["mean_silhouette"] = selection.silhouette.mean;
    summary["median_silhouette"] = selection.silhouette.median;
    summary["cost"] = selection.result.cost;
    summary["genres"] = genres.names;
    write_json_artifact(ctx, "summary.json", summary);
}

void run_profiles(StageContext& ctx) {
    const ClusterResult genres = load_clusters(ctx, "genres", "genres.csv");
    const PageTraits traits = load_page_traits(ctx);
    const auto profiles = genre_profiles(genres, traits, &ctx.diag);
    {
        auto out = ctx.create("profiles.csv");
        std::vector<std::string> header{"genre", "pages"};
        for (const Trait t : kAllTraits) {
            header.push_back(std::string(trait_name(t)) + "_median");
        }
        for (const Trait t : kAllTraits) {
            header.push_back(std::string(trait_name(t)) + "_normalized");
        }
        csv::write_row(out, header);
        for (const auto& p : profiles) {
            std::vector<std::string> row{p.label, std::to_string(p.members)};
            for (const double v : p.medians) {
                row.push_back(csv::format_double(v));
            }
            for (const double v : p.normalized) {
                row.push_back(csv::format_double(v));
            }
            csv::write_row(out, row);
        }
    }
    {
        auto out = ctx.create("profiles.svg");
        write_profiles_svg(out, profiles);
    }
    ordered_json summary;
    summary["genres"] = profiles.size();
    if (profiles.size() >= 3) {
        const ProfileProjection projection = project_profiles_2d(profiles, sub_seed(ctx.seed, 1));
        {
            auto out = ctx.create("projection.csv");
            write_dense(out, projection.coordinates, projection.labels, {"pc1", "pc2"}, "genre");
        }
        {
            auto out = ctx.create("loadings.csv");
            std::vector<std::string> names;
            for (const Trait t : kAllTraits) {
                names.emplace_back(trait_name(t));
            }
            write_dense(out, projection.loadings, names, {"pc1", "pc2"}, "trait");
        }
        {
            auto out = ctx.create("projection.svg");
            write_projection_svg(out, projection);
        }
        summary["explained_variance"] = {projection.explained(0), projection.explained(1)};
    } else {
        ctx.diag.warn("projection skipped: fewer than 3 genres");
    }
    write_json_artifact(ctx, "summary.json", summary);
}

void run_disposition(StageContext& ctx) {
    const TagCorpus corpus = load_ingested(ctx);
    std::vector<CorrelationEntry> table;
    if (corpus.users.size() < 3) {
        ctx.diag.warn("disposition needs at least 3 users");
    } else {
        table = disposition_correlation(corpus.users);
        for (const auto& e : table) {
            if (!e.defined) {
                ctx.diag.warn(std::string("no variance for ") + std::string(trait_name(e.trait)) +
                              " or like counts");
            }
        }
    }
    auto out = ctx.create("disposition.csv");
    write_correlations(out, table);
}

ordered_json csv_records(const StageContext& ctx, std::string_view stage, const std::string& name) {
    auto in = ctx.open(stage, name);
    const auto rows = csv::read_rows(in, source_of(ctx, stage, name));
    ordered_json records = ordered_json::array();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        ordered_json record;
        for (std::size_t c = 0; c < rows[0].size() && c < rows[r].size(); ++c) {
            record[rows[0][c]] = rows[r][c];
        }
        records.push_back(record);
    }
    return records;
}

void run_report(StageContext& ctx) {
    std::vector<CorrelationEntry> table;
    {
        auto in = ctx.open("correlate", "correlations.csv");
        table = read_correlations(in, source_of(ctx, "correlate", "correlations.csv"));
    }
    {
        auto out = ctx.create("top_correlations.csv");
        write_top_table(out, table, ctx.config.report_top);
    }
    {
        auto out = ctx.create("top_correlations.txt");
        write_top_table_text(out, table, ctx.config.report_top);
    }
    ordered_json summary;
    const auto clusters = read_json_artifact(ctx, "tagcluster", "summary.json");
    summary["tag_clusters"] = clusters.at("clusters");
    summary["tag_noise"] = clusters.at("noise");
    summary["eps_cut"] = clusters.at("eps_cut");
    const auto genres = read_json_artifact(ctx, "genres", "summary.json");
    summary["genre_k"] = genres.at("k");
    summary["genre_mean_silhouette"] = genres.at("mean_silhouette");
    const auto profiles = read_json_artifact(ctx, "profiles", "summary.json");
    summary["profile_explained_variance"] = profiles.value("explained_variance", ordered_json(nullptr));
    summary["lasso"] = csv_records(ctx, "lasso", "lasso_summary.csv");
    summary["forest"] = csv_records(ctx, "forest", "forest_summary.csv");
    summary["disposition"] = csv_records(ctx, "disposition", "disposition.csv");
    write_json_artifact(ctx, "summary.json", summary);
}

}  // namespace

const StageBody& stage_body(std::string_view name) {
    static const std::map<std::string, StageBody, std::less<>> bodies{
        {"synth", run_synth},           {"ingest", run_ingest},     {"tfidf", run_tfidf},
        {"tagsim", run_tagsim},         {"tagcluster", run_tagcluster}, {"consolidate", run_consolidate},
        {"correlate", run_correlate},   {"lasso", run_lasso},       {"forest", run_forest},
        {"genres", run_genres},         {"profiles", run_profiles}, {"disposition", run_disposition},
        {"report", run_report}};
    const auto it = bodies.find(name);
    if (it == bodies.end()) {
        throw std::out_of_range("unknown stage " + std::string(name));
    }
    return it->second;
}

std::map<std::string, fs::path> stage_inputs(std::string_view name, const PipelineConfig& config) {
    std::map<std::string, fs::path> inputs;
    if (name == "ingest" && !config.uses_synth_inputs()) {
        inputs["applications"] = config.inputs.applications;
        if (!config.inputs.pages.empty()) {
            inputs["pages"] = config.inputs.pages;
        }
        if (!config.inputs.users.empty()) {
            inputs["users"] = config.inputs.users;
        }
    } else if (name == "tagsim" && !config.similarity.lemma_rules.empty()) {
        inputs["lemma_rules"] = config.similarity.lemma_rules;
    } else if (name == "tagcluster" && !config.optics.overrides.empty()) {
        inputs["overrides"] = config.optics.overrides;
    }
    return inputs;
}

}  // namespace tagprof::detail
