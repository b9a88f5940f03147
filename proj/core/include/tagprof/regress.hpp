#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace tagprof {

struct Dataset {
    Eigen::MatrixXd x;  // n x p
    Eigen::VectorXd y;  // n
    std::vector<std::string> features;

    Eigen::Index samples() const noexcept { return x.rows(); }
    Eigen::Index features_count() const noexcept { return x.cols(); }

    /// Throws std::invalid_argument on shape mismatch, n < 2, or non-finite values.
    void validate() const;
    Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

struct Standardized {
    Dataset data;
    Eigen::VectorXd means;
    Eigen::VectorXd scales;
    double y_mean = 0.0;
    std::vector<bool> constant;
};

/// Centers every column to mean 0 and scales to population sd 1; constant
/// columns become zeros with scale 1 and are flagged. y is centered.
Standardized standardize(const Dataset& data);

class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, double last_objective)
        : std::runtime_error(what), last_objective_(last_objective) {}
    double last_objective() const noexcept { return last_objective_; }

private:
    double last_objective_;
};

/// 1 - SS_res / SS_tot. Throws std::invalid_argument for mismatched sizes,
/// fewer than two samples, or constant y.
double r2_score(const Eigen::VectorXd& y, const Eigen::VectorXd& predictions);

double mean_squared_error(const Eigen::VectorXd& y, const Eigen::VectorXd& predictions);

// ---------------------------------------------------------------- lasso

struct CvPoint {
    double lambda = 0.0;
    double mean_mse = 0.0;
    double se_mse = 0.0;
};

struct LassoFit {
    double intercept = 0.0;
    Eigen::VectorXd beta;
    double lambda = 0.0;
    double objective = 0.0;
    int sweeps = 0;
    /// Training R^2; NaN when y is constant.
    double r2 = 0.0;
    /// Out-of-fold R^2 at the selected lambda; NaN unless cross-validated.
    double cv_r2 = 0.0;
    std::vector<CvPoint> cv_table;
    std::vector<std::string> features;
    /// Objective after each sweep when LassoOptions::record_objective is set.
    std::vector<double> objective_trace;

    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

struct LassoOptions {
    /// Stop once no coefficient moves by more than this in a sweep.
    double tolerance = 1e-7;
    int max_sweeps = 100000;
    bool record_objective = false;
};

/// Largest useful penalty: max_j |x_j . (y - mean y)| / n over centered columns.
double lambda_max(const Dataset& data);

/// `size` log-spaced values from lambda_max down to lambda_max * ratio.
std::vector<double> default_lambda_grid(const Dataset& data, std::size_t size = 100, double ratio = 1e-4);

/// Minimizes (1/2n) ||y - b0 - X beta||^2 + lambda ||beta||_1 by cyclic
/// coordinate descent with soft-thresholding (columns and y are centered
/// internally, so b0 absorbs the means). `warm_start`, when non-empty,
/// seeds beta. Throws FitError after max_sweeps.
LassoFit lasso_fit(const Dataset& data, double lambda, const LassoOptions& options = {},
                   const Eigen::VectorXd& warm_start = {});

struct CvOptions {
    std::size_t folds = 10;
    std::vector<double> grid;  // empty: default_lambda_grid
    std::uint64_t seed = 0;
    unsigned workers = 1;
    LassoOptions lasso;
};

/// Seeded k-fold assignment: a shuffled permutation dealt round-robin.
std::vector<std::size_t> assign_folds(std::size_t n, std::size_t folds, std::uint64_t seed);

/// K-fold cross-validation over the lambda grid; returns the full-data fit at
/// the lambda with the lowest mean test MSE (ties to the larger lambda), with
/// the CV table and out-of-fold R^2 attached. Throws std::invalid_argument
/// unless 2 <= folds <= n.
LassoFit cv_select_lambda(const Dataset& data, const CvOptions& options = {});

void write_json(std::ostream& out, const LassoFit& fit, const std::string& target = {});

// ---------------------------------------------------------------- forest

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    std::size_t count = 0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    std::size_t leaf_count() const;
};

struct ForestOptions {
    std::size_t n_trees = 500;
    std::size_t mtry = 0;  // 0: max(1, p / 3)
    std::size_t min_leaf = 5;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::size_t importance_repeats = 5;
    bool compute_importance = true;
};

struct ForestFit {
    std::vector<RegressionTree> trees;
    std::size_t mtry = 0;
    std::size_t min_leaf = 0;
    std::uint64_t seed = 0;
    Eigen::VectorXd importance;
    double r2 = 0.0;
    double oob_mse = 0.0;
    double oob_r2 = 0.0;
    std::vector<std::string> features;

    /// Mean over trees, accumulated in tree order.
    Eigen::VectorXd predict(const Eigen::MatrixXd& x, unsigned workers = 1) const;
    /// Features used by at least one split.
    std::vector<bool> used_features() const;
};

/// Bootstrap-aggregated regression trees: at each node the best
/// SSE-reducing split among `mtry` freshly drawn features, leaves holding at
/// least min_leaf (bootstrap) samples, unlimited depth. Tree t draws from
/// the stream derived from (seed, t). Throws std::invalid_argument unless
/// 1 <= mtry <= p.
ForestFit forest_fit(const Dataset& data, const ForestOptions& options = {});

/// Mean over `repeats` seeded shuffles of MSE(column j permuted) - MSE(original).
Eigen::VectorXd permutation_importance(const ForestFit& forest, const Dataset& data, std::uint64_t seed,
                                       std::size_t repeats = 5, unsigned workers = 1);

/// Slow alternative: out-of-bag MSE of a forest refit without feature j minus
/// that of the full forest.
Eigen::VectorXd drop_column_importance(const Dataset& data, const ForestOptions& options);

struct MtryScore {
    std::size_t mtry = 0;
    double cv_mse = 0.0;
};

/// K-fold CV over candidate mtry values (defaults: p/10, sqrt p, 2 sqrt p, p/3, p/2).
std::vector<MtryScore> tune_mtry(const Dataset& data, const ForestOptions& options, std::size_t folds = 5,
                                 std::vector<std::size_t> candidates = {});

void write_json(std::ostream& out, const ForestFit& fit, const std::string& target = {});

}  // namespace tagprof
