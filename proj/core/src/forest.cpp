#include "tagprof/regress.hpp"

#include "tagprof/parallel.hpp"
#include "tagprof/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tagprof {

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    std::size_t left_count = 0;
};

class TreeBuilder {
public:
    TreeBuilder(const Dataset& data, std::size_t mtry, std::size_t min_leaf, Rng rng)
        : data_(data), mtry_(mtry), min_leaf_(min_leaf), rng_(rng),
          features_(static_cast<std::size_t>(data.features_count())) {
        std::iota(features_.begin(), features_.end(), std::size_t{0});
    }

    RegressionTree build(std::vector<Eigen::Index> samples) {
        RegressionTree tree;
        struct Task {
            int node;
            std::size_t begin;
            std::size_t end;
        };
        samples_ = std::move(samples);
        tree.nodes.emplace_back();
        std::vector<Task> stack{{0, 0, samples_.size()}};
        while (!stack.empty()) {
            const Task task = stack.back();
            stack.pop_back();
            auto& node = tree.nodes[static_cast<std::size_t>(task.node)];
            node.count = task.end - task.begin;
            node.value = running_mean(task.begin, task.end);

            const Split split = best_split(task.begin, task.end);
            if (split.feature < 0) {
                continue;
            }
            // Partition samples so that the left child is [begin, mid).
            const auto mid_it = std::stable_partition(
                samples_.begin() + static_cast<std::ptrdiff_t>(task.begin),
                samples_.begin() + static_cast<std::ptrdiff_t>(task.end),
                [&](Eigen::Index s) { return data_.x(s, split.feature) <= split.threshold; });
            const auto mid = static_cast<std::size_t>(mid_it - samples_.begin());

            const int left = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            auto& parent = tree.nodes[static_cast<std::size_t>(task.node)];
            parent.feature = split.feature;
            parent.threshold = split.threshold;
            parent.left = left;
            parent.right = left + 1;
            stack.push_back({left + 1, mid, task.end});
            stack.push_back({left, task.begin, mid});
        }
        return tree;
    }

private:
    double running_mean(std::size_t begin, std::size_t end) const {
        double mean = 0.0;
        double k = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            k += 1.0;
            mean += (data_.y(samples_[i]) - mean) / k;
        }
        return mean;
    }

    Split best_split(std::size_t begin, std::size_t end) {
        Split best;
        const std::size_t count = end - begin;
        if (count < 2 * min_leaf_ || count < 2) {
            return best;
        }
        const double first_y = data_.y(samples_[begin]);
        bool pure = true;
        double total = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            total += data_.y(samples_[i]);
            pure = pure && data_.y(samples_[i]) == first_y;
        }
        if (pure) {
            return best;
        }
        const auto n = static_cast<double>(count);
        const double parent_term = total * total / n;

        // Partial Fisher-Yates: the first mtry entries become this node's draw.
        for (std::size_t i = 0; i < mtry_; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng_.below(features_.size() - i));
            std::swap(features_[i], features_[j]);
        }
        pairs_.resize(count);
        for (std::size_t f = 0; f < mtry_; ++f) {
            const auto feature = static_cast<Eigen::Index>(features_[f]);
            for (std::size_t i = 0; i < count; ++i) {
                const Eigen::Index s = samples_[begin + i];
                pairs_[i] = {data_.x(s, feature), data_.y(s)};
            }
            std::sort(pairs_.begin(), pairs_.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            double left_sum = 0.0;
            for (std::size_t i = 1; i < count; ++i) {
                left_sum += pairs_[i - 1].second;
                if (i < min_leaf_ || count - i < min_leaf_) {
                    continue;
                }
                if (!(pairs_[i - 1].first < pairs_[i].first)) {
                    continue;
                }
                const auto nl = static_cast<double>(i);
                const double right_sum = total - left_sum;
                const double gain = left_sum * left_sum / nl + right_sum * right_sum / (n - nl) - parent_term;
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = static_cast<int>(feature);
                    best.left_count = i;
                    double threshold = 0.5 * (pairs_[i - 1].first + pairs_[i].first);
                    if (!(threshold < pairs_[i].first)) {
                        threshold = pairs_[i - 1].first;
                    }
                    best.threshold = threshold;
                }
            }
        }
        // Gains at rounding level are not real improvements.
        if (best.gain <= 1e-12 * std::max(1.0, parent_term)) {
            best.feature = -1;
        }
        return best;
    }

    const Dataset& data_;
    std::size_t mtry_;
    std::size_t min_leaf_;
    Rng rng_;
    std::vector<std::size_t> features_;
    std::vector<Eigen::Index> samples_;
    std::vector<std::pair<double, double>> pairs_;
};

std::size_t resolve_mtry(std::size_t requested, Eigen::Index p) {
    const auto features = static_cast<std::size_t>(p);
    const std::size_t mtry = requested == 0 ? std::max<std::size_t>(1, features / 3) : requested;
    if (mtry < 1 || mtry > features) {
        throw std::invalid_argument("forest_fit: mtry must lie in [1, " + std::to_string(features) + "]");
    }
    return mtry;
}

struct GrownForest {
    ForestFit fit;
    std::vector<std::vector<char>> in_bag;
};

GrownForest grow(const Dataset& data, const ForestOptions& options) {
    data.validate();
    if (options.n_trees == 0) {
        throw std::invalid_argument("forest_fit: n_trees must be positive");
    }
    const std::size_t mtry = resolve_mtry(options.mtry, data.features_count());
    const auto n = static_cast<std::size_t>(data.samples());

    GrownForest grown;
    ForestFit& fit = grown.fit;
    fit.mtry = mtry;
    fit.min_leaf = options.min_leaf;
    fit.seed = options.seed;
    fit.features = data.features;
    fit.trees.resize(options.n_trees);
    grown.in_bag.assign(options.n_trees, std::vector<char>(n, 0));

    const Rng master(options.seed);
    parallel_for(options.n_trees, options.workers, [&](std::size_t t) {
        Rng rng = master.split(t);
        std::vector<Eigen::Index> bootstrap(n);
        for (auto& s : bootstrap) {
            s = static_cast<Eigen::Index>(rng.below(n));
            grown.in_bag[t][static_cast<std::size_t>(s)] = 1;
        }
        TreeBuilder builder(data, mtry, std::max<std::size_t>(1, options.min_leaf), rng.split(1));
        fit.trees[t] = builder.build(std::move(bootstrap));
    });
    return grown;
}

void finish(GrownForest& grown, const Dataset& data, const ForestOptions& options) {
    ForestFit& fit = grown.fit;
    const Eigen::Index n = data.samples();
    const Eigen::VectorXd train_pred = fit.predict(data.x, options.workers);
    try {
        fit.r2 = r2_score(data.y, train_pred);
    } catch (const std::invalid_argument&) {
        fit.r2 = std::numeric_limits<double>::quiet_NaN();
    }

    Eigen::VectorXd oob_sum = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd oob_count = Eigen::VectorXd::Zero(n);
    for (std::size_t t = 0; t < fit.trees.size(); ++t) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (grown.in_bag[t][static_cast<std::size_t>(i)] == 0) {
                oob_sum(i) += fit.trees[t].predict(data.x.row(i));
                oob_count(i) += 1.0;
            }
        }
    }
    std::vector<Eigen::Index> covered;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (oob_count(i) > 0.0) {
            covered.push_back(i);
        }
    }
    fit.oob_mse = std::numeric_limits<double>::quiet_NaN();
    fit.oob_r2 = std::numeric_limits<double>::quiet_NaN();
    if (!covered.empty()) {
        Eigen::VectorXd y(static_cast<Eigen::Index>(covered.size()));
        Eigen::VectorXd pred(static_cast<Eigen::Index>(covered.size()));
        for (std::size_t c = 0; c < covered.size(); ++c) {
            y(static_cast<Eigen::Index>(c)) = data.y(covered[c]);
            pred(static_cast<Eigen::Index>(c)) = oob_sum(covered[c]) / oob_count(covered[c]);
        }
        fit.oob_mse = mean_squared_error(y, pred);
        if (covered.size() >= 2) {
            try {
                fit.oob_r2 = r2_score(y, pred);
            } catch (const std::invalid_argument&) {
            }
        }
    }

    if (options.compute_importance) {
        fit.importance = permutation_importance(fit, data, Rng(options.seed).split(0x1A9).operator()(),
                                                options.importance_repeats, options.workers);
    } else {
        fit.importance = Eigen::VectorXd::Zero(data.features_count());
    }
}

}  // namespace

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    std::size_t node = 0;
    while (nodes[node].feature >= 0) {
        const auto& n = nodes[node];
        node = static_cast<std::size_t>(row(n.feature) <= n.threshold ? n.left : n.right);
    }
    return nodes[node].value;
}

std::size_t RegressionTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

Eigen::VectorXd ForestFit::predict(const Eigen::MatrixXd& x, unsigned workers) const {
    Eigen::VectorXd out(x.rows());
    parallel_for(static_cast<std::size_t>(x.rows()), workers, [&](std::size_t r) {
        const auto row = static_cast<Eigen::Index>(r);
        double mean = 0.0;
        double k = 0.0;
        for (const auto& tree : trees) {
            k += 1.0;
            mean += (tree.predict(x.row(row)) - mean) / k;
        }
        out(row) = mean;
    });
    return out;
}

std::vector<bool> ForestFit::used_features() const {
    std::size_t p = features.size();
    for (const auto& tree : trees) {
        for (const auto& node : tree.nodes) {
            p = std::max(p, static_cast<std::size_t>(node.feature + 1));
        }
    }
    std::vector<bool> used(p, false);
    for (const auto& tree : trees) {
        for (const auto& node : tree.nodes) {
            if (node.feature >= 0) {
                used[static_cast<std::size_t>(node.feature)] = true;
            }
        }
    }
    return used;
}

ForestFit forest_fit(const Dataset& data, const ForestOptions& options) {
    GrownForest grown = grow(data, options);
    finish(grown, data, options);
    return std::move(grown.fit);
}

Eigen::VectorXd permutation_importance(const ForestFit& forest, const Dataset& data, std::uint64_t seed,
                                       std::size_t repeats, unsigned workers) {
    data.validate();
    const Eigen::Index p = data.features_count();
    const Eigen::Index n = data.samples();
    repeats = std::max<std::size_t>(1, repeats);
    const Eigen::VectorXd baseline_pred = forest.predict(data.x);
    const double baseline = mean_squared_error(data.y, baseline_pred);
    auto used = forest.used_features();
    used.resize(static_cast<std::size_t>(p), false);

    Eigen::VectorXd importance = Eigen::VectorXd::Zero(p);
    const Rng master(seed);
    parallel_for(static_cast<std::size_t>(p), workers, [&](std::size_t j) {
        if (!used[j]) {
            return;  // predictions cannot change
        }
        const auto col = static_cast<Eigen::Index>(j);
        Eigen::MatrixXd shuffled = data.x;
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
        double total = 0.0;
        for (std::size_t r = 0; r < repeats; ++r) {
            std::iota(perm.begin(), perm.end(), Eigen::Index{0});
            Rng rng = master.split(j * repeats + r);
            rng.shuffle(std::span<Eigen::Index>(perm));
            for (Eigen::Index i = 0; i < n; ++i) {
                shuffled(i, col) = data.x(perm[static_cast<std::size_t>(i)], col);
            }
            total += mean_squared_error(data.y, forest.predict(shuffled)) - baseline;
        }
        importance(col) = total / static_cast<double>(repeats);
    });
    return importance;
}

Eigen::VectorXd drop_column_importance(const Dataset& data, const ForestOptions& options) {
    ForestOptions quiet = options;
    quiet.compute_importance = false;
    const ForestFit full = forest_fit(data, quiet);
    const Eigen::Index p = data.features_count();
    Eigen::VectorXd importance = Eigen::VectorXd::Zero(p);
    if (p < 2) {
        return importance;
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        Dataset reduced;
        reduced.y = data.y;
        reduced.x.resize(data.samples(), p - 1);
        for (Eigen::Index c = 0, k = 0; c < p; ++c) {
            if (c != j) {
                reduced.x.col(k++) = data.x.col(c);
            }
        }
        ForestOptions reduced_options = quiet;
        if (reduced_options.mtry > static_cast<std::size_t>(p - 1)) {
            reduced_options.mtry = static_cast<std::size_t>(p - 1);
        }
        importance(j) = forest_fit(reduced, reduced_options).oob_mse - full.oob_mse;
    }
    return importance;
}

std::vector<MtryScore> tune_mtry(const Dataset& data, const ForestOptions& options, std::size_t folds,
                                 std::vector<std::size_t> candidates) {
    data.validate();
    const auto p = static_cast<std::size_t>(data.features_count());
    const auto n = static_cast<std::size_t>(data.samples());
    if (folds < 2 || folds > n) {
        throw std::invalid_argument("tune_mtry: folds must lie in [2, n]");
    }
    if (candidates.empty()) {
        const double root = std::sqrt(static_cast<double>(p));
        candidates = {p / 10, static_cast<std::size_t>(std::lround(root)), static_cast<std::size_t>(std::lround(2 * root)),
                      p / 3, p / 2};
    }
    for (auto& c : candidates) {
        c = std::clamp<std::size_t>(c, 1, p);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    const auto fold_of = assign_folds(n, folds, options.seed);
    std::vector<MtryScore> scores;
    for (const auto mtry : candidates) {
        double total = 0.0;
        for (std::size_t f = 0; f < folds; ++f) {
            std::vector<Eigen::Index> train;
            std::vector<Eigen::Index> test;
            for (std::size_t i = 0; i < n; ++i) {
                (fold_of[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
            }
            ForestOptions o = options;
            o.mtry = mtry;
            o.compute_importance = false;
            const Dataset test_set = data.subset(test);
            const ForestFit fit = forest_fit(data.subset(train), o);
            total += mean_squared_error(test_set.y, fit.predict(test_set.x, options.workers));
        }
        scores.push_back({mtry, total / static_cast<double>(folds)});
    }
    return scores;
}

}  // namespace tagprof
