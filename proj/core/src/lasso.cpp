#include "tagprof/regress.hpp"

#include "tagprof/parallel.hpp"
#include "tagprof/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tagprof {

namespace {

double soft_threshold(double z, double gamma) {
    if (z > gamma) {
        return z - gamma;
    }
    if (z < -gamma) {
        return z + gamma;
    }
    return 0.0;
}

}  // namespace

Eigen::VectorXd LassoFit::predict(const Eigen::MatrixXd& x) const {
    return (x * beta).array() + intercept;
}

double lambda_max(const Dataset& data) {
    data.validate();
    const auto nd = static_cast<double>(data.samples());
    const Eigen::MatrixXd x = data.x.rowwise() - data.x.colwise().mean();
    const Eigen::VectorXd y = data.y.array() - data.y.mean();
    double top = 0.0;
    // Same arithmetic as the first coordinate-descent sweep from zero, so
    // lambda = lambda_max leaves every coefficient exactly at zero.
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        top = std::max(top, std::abs(x.col(j).dot(y) / nd));
    }
    return top;
}

std::vector<double> default_lambda_grid(const Dataset& data, std::size_t size, double ratio) {
    const double top = lambda_max(data);
    if (top == 0.0 || size <= 1) {
        return {top};
    }
    std::vector<double> grid(size);
    const double step = std::log(ratio) / static_cast<double>(size - 1);
    for (std::size_t i = 0; i < size; ++i) {
        grid[i] = top * std::exp(step * static_cast<double>(i));
    }
    grid.front() = top;
    return grid;
}

LassoFit lasso_fit(const Dataset& data, double lambda, const LassoOptions& options,
                   const Eigen::VectorXd& warm_start) {
    data.validate();
    if (!(lambda >= 0.0)) {
        throw std::invalid_argument("lasso_fit: lambda must be non-negative");
    }
    const Eigen::Index n = data.samples();
    const Eigen::Index p = data.features_count();
    const auto nd = static_cast<double>(n);

    const Eigen::RowVectorXd x_mean = data.x.colwise().mean();
    const double y_mean = data.y.mean();
    const Eigen::MatrixXd x = data.x.rowwise() - x_mean;
    const Eigen::VectorXd y = data.y.array() - y_mean;
    const Eigen::VectorXd col_scale = x.colwise().squaredNorm().transpose() / nd;

    LassoFit fit;
    fit.lambda = lambda;
    fit.features = data.features;
    fit.beta = Eigen::VectorXd::Zero(p);
    if (warm_start.size() == p) {
        fit.beta = warm_start;
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        if (col_scale(j) == 0.0) {
            fit.beta(j) = 0.0;
        }
    }
    Eigen::VectorXd residual = y - x * fit.beta;

    auto objective = [&] { return residual.squaredNorm() / (2.0 * nd) + lambda * fit.beta.lpNorm<1>(); };

    for (;;) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (col_scale(j) == 0.0) {
                continue;
            }
            const double old = fit.beta(j);
            const double rho = x.col(j).dot(residual) / nd + col_scale(j) * old;
            const double updated = soft_threshold(rho, lambda) / col_scale(j);
            if (updated != old) {
                residual -= (updated - old) * x.col(j);
                fit.beta(j) = updated;
                max_change = std::max(max_change, std::abs(updated - old));
            }
        }
        ++fit.sweeps;
        if (options.record_objective) {
            fit.objective_trace.push_back(objective());
        }
        if (max_change < options.tolerance) {
            break;
        }
        if (fit.sweeps >= options.max_sweeps) {
            throw FitError("lasso_fit did not converge in " + std::to_string(fit.sweeps) + " sweeps", objective());
        }
    }

    fit.objective = objective();
    fit.intercept = y_mean - x_mean.dot(fit.beta);
    fit.cv_r2 = std::numeric_limits<double>::quiet_NaN();
    try {
        fit.r2 = r2_score(data.y, fit.predict(data.x));
    } catch (const std::invalid_argument&) {
        fit.r2 = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

std::vector<std::size_t> assign_folds(std::size_t n, std::size_t folds, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng = Rng(seed).split(0xF01D);
    rng.shuffle(std::span<std::size_t>(perm));
    std::vector<std::size_t> fold(n);
    for (std::size_t i = 0; i < n; ++i) {
        fold[perm[i]] = i % folds;
    }
    return fold;
}

LassoFit cv_select_lambda(const Dataset& data, const CvOptions& options) {
    data.validate();
    const auto n = static_cast<std::size_t>(data.samples());
    if (options.folds < 2 || options.folds > n) {
        throw std::invalid_argument("cv_select_lambda: folds must lie in [2, n]");
    }
    std::vector<double> grid = options.grid.empty() ? default_lambda_grid(data) : options.grid;
    std::sort(grid.begin(), grid.end(), std::greater<>());

    const auto fold_of = assign_folds(n, options.folds, options.seed);
    const std::size_t g = grid.size();
    std::vector<std::vector<double>> fold_mse(options.folds, std::vector<double>(g, 0.0));
    Eigen::MatrixXd oof(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(g));

    parallel_for(options.folds, options.workers, [&](std::size_t f) {
        std::vector<Eigen::Index> train;
        std::vector<Eigen::Index> test;
        for (std::size_t i = 0; i < n; ++i) {
            (fold_of[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
        }
        const Dataset train_set = data.subset(train);
        const Dataset test_set = data.subset(test);
        Eigen::VectorXd warm;
        for (std::size_t l = 0; l < g; ++l) {
            const LassoFit fit = lasso_fit(train_set, grid[l], options.lasso, warm);
            warm = fit.beta;
            const Eigen::VectorXd pred = fit.predict(test_set.x);
            fold_mse[f][l] = mean_squared_error(test_set.y, pred);
            for (std::size_t t = 0; t < test.size(); ++t) {
                oof(test[t], static_cast<Eigen::Index>(l)) = pred(static_cast<Eigen::Index>(t));
            }
        }
    });

    std::vector<CvPoint> table(g);
    std::size_t best = 0;
    const auto k = static_cast<double>(options.folds);
    for (std::size_t l = 0; l < g; ++l) {
        double mean = 0.0;
        for (std::size_t f = 0; f < options.folds; ++f) {
            mean += fold_mse[f][l];
        }
        mean /= k;
        double var = 0.0;
        for (std::size_t f = 0; f < options.folds; ++f) {
            var += (fold_mse[f][l] - mean) * (fold_mse[f][l] - mean);
        }
        table[l] = {grid[l], mean, std::sqrt(var / (k - 1.0) / k)};
        if (table[l].mean_mse < table[best].mean_mse) {
            best = l;
        }
    }

    LassoFit fit = lasso_fit(data, grid[best], options.lasso);
    fit.cv_table = std::move(table);
    try {
        fit.cv_r2 = r2_score(data.y, oof.col(static_cast<Eigen::Index>(best)));
    } catch (const std::invalid_argument&) {
        fit.cv_r2 = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

}  // namespace tagprof
