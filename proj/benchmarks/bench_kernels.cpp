#include "tagprof/cluster.hpp"
#include "tagprof/lowrank.hpp"
#include "tagprof/matrix.hpp"
#include "tagprof/regress.hpp"
#include "tagprof/rng.hpp"
#include "tagprof/synth.hpp"

#include <benchmark/benchmark.h>

using namespace tagprof;

namespace {

const TagCorpus& corpus() {
    static const TagCorpus c = [] {
        SynthSpec spec;
        spec.n_users = 500;
        return filter_tags(generate(spec), FilterPolicy{});
    }();
    return c;
}

Dataset random_dataset(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.x.resize(n, p);
    d.y.resize(n);
    for (Eigen::Index i = 0; i < d.x.size(); ++i) {
        d.x.data()[i] = rng.normal();
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        d.y(i) = d.x.row(i).head(3).sum() + rng.normal();
    }
    d.features.resize(static_cast<std::size_t>(p), "f");
    return d;
}

void BM_Tfidf(benchmark::State& state) {
    const SparseMatrix counts = build_count_matrix(corpus());
    for (auto _ : state) {
        benchmark::DoNotOptimize(tfidf(counts));
    }
}
BENCHMARK(BM_Tfidf);

void BM_TruncatedSvd(benchmark::State& state) {
    const SparseMatrix weights = tfidf(build_count_matrix(corpus()));
    for (auto _ : state) {
        benchmark::DoNotOptimize(truncated_svd(weights, state.range(0), 1));
    }
}
BENCHMARK(BM_TruncatedSvd)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Pam(benchmark::State& state) {
    const DistanceMatrix d = book_dissimilarity(tfidf(build_count_matrix(corpus())));
    for (auto _ : state) {
        benchmark::DoNotOptimize(pam(d, static_cast<std::size_t>(state.range(0))));
    }
}
BENCHMARK(BM_Pam)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_Lasso(benchmark::State& state) {
    const Dataset d = standardize(random_dataset(500, 100, 3)).data;
    const double lambda = lambda_max(d) * 0.05;
    for (auto _ : state) {
        benchmark::DoNotOptimize(lasso_fit(d, lambda));
    }
}
BENCHMARK(BM_Lasso)->Unit(benchmark::kMillisecond);

void BM_Forest(benchmark::State& state) {
    const Dataset d = random_dataset(400, 50, 4);
    ForestOptions options;
    options.n_trees = static_cast<std::size_t>(state.range(0));
    options.compute_importance = false;
    for (auto _ : state) {
        benchmark::DoNotOptimize(forest_fit(d, options));
    }
}
BENCHMARK(BM_Forest)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
