#include "tagprof/regress.hpp"

#include "tagprof/csv.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <ostream>

namespace tagprof {

namespace {

nlohmann::ordered_json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

void Dataset::validate() const {
    if (y.size() != x.rows()) {
        throw std::invalid_argument("dataset: x has " + std::to_string(x.rows()) + " rows but y has " +
                                    std::to_string(y.size()));
    }
    if (x.rows() < 2) {
        throw std::invalid_argument("dataset: need at least 2 samples");
    }
    if (!features.empty() && static_cast<Eigen::Index>(features.size()) != x.cols()) {
        throw std::invalid_argument("dataset: feature label count mismatch");
    }
    if (!x.allFinite() || !y.allFinite()) {
        throw std::invalid_argument("dataset: missing or non-finite values");
    }
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
    Dataset out;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.x.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
        out.y(static_cast<Eigen::Index>(i)) = y(rows[i]);
    }
    out.features = features;
    return out;
}

Standardized standardize(const Dataset& data) {
    data.validate();
    const auto n = static_cast<double>(data.samples());
    Standardized s;
    s.data.features = data.features;
    s.data.x = data.x;
    s.means = data.x.colwise().mean().transpose();
    s.scales = Eigen::VectorXd::Ones(data.x.cols());
    s.constant.assign(static_cast<std::size_t>(data.x.cols()), false);
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
        auto col = s.data.x.col(j);
        col.array() -= s.means(j);
        const double sd = std::sqrt(col.squaredNorm() / n);
        if (sd == 0.0) {
            s.constant[static_cast<std::size_t>(j)] = true;
            col.setZero();
        } else {
            s.scales(j) = sd;
            col /= sd;
        }
    }
    s.y_mean = data.y.mean();
    s.data.y = data.y.array() - s.y_mean;
    return s;
}

double mean_squared_error(const Eigen::VectorXd& y, const Eigen::VectorXd& predictions) {
    if (y.size() != predictions.size() || y.size() == 0) {
        throw std::invalid_argument("mean_squared_error: size mismatch");
    }
    return (y - predictions).squaredNorm() / static_cast<double>(y.size());
}

double r2_score(const Eigen::VectorXd& y, const Eigen::VectorXd& predictions) {
    if (y.size() != predictions.size()) {
        throw std::invalid_argument("r2_score: size mismatch");
    }
    if (y.size() < 2) {
        throw std::invalid_argument("r2_score: need at least 2 samples");
    }
    const double mean = y.mean();
    const double ss_tot = (y.array() - mean).square().sum();
    if (ss_tot == 0.0) {
        throw std::invalid_argument("r2_score: y is constant");
    }
    const double ss_res = (y - predictions).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

void write_json(std::ostream& out, const LassoFit& fit, const std::string& target) {
    nlohmann::ordered_json j;
    j["model"] = "lasso";
    if (!target.empty()) {
        j["target"] = target;
    }
    j["lambda"] = fit.lambda;
    j["intercept"] = fit.intercept;
    j["r2_train"] = number_or_null(fit.r2);
    j["r2_cv"] = number_or_null(fit.cv_r2);
    j["objective"] = fit.objective;
    auto& coefs = j["coefficients"] = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < fit.beta.size(); ++i) {
        const auto label = static_cast<std::size_t>(i) < fit.features.size() ? fit.features[static_cast<std::size_t>(i)]
                                                                             : std::to_string(i);
        coefs.push_back({{"feature", label}, {"beta", fit.beta(i)}});
    }
    auto& table = j["cv_table"] = nlohmann::ordered_json::array();
    for (const auto& p : fit.cv_table) {
        table.push_back({{"lambda", p.lambda}, {"mean_mse", p.mean_mse}, {"se_mse", p.se_mse}});
    }
    out << j.dump(2) << '\n';
}

void write_json(std::ostream& out, const ForestFit& fit, const std::string& target) {
    nlohmann::ordered_json j;
    j["model"] = "random_forest";
    if (!target.empty()) {
        j["target"] = target;
    }
    j["n_trees"] = fit.trees.size();
    j["mtry"] = fit.mtry;
    j["min_leaf"] = fit.min_leaf;
    j["seed"] = fit.seed;
    j["r2_train"] = number_or_null(fit.r2);
    j["r2_oob"] = number_or_null(fit.oob_r2);
    j["oob_mse"] = number_or_null(fit.oob_mse);
    auto& imp = j["importance"] = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < fit.importance.size(); ++i) {
        const auto label = static_cast<std::size_t>(i) < fit.features.size() ? fit.features[static_cast<std::size_t>(i)]
                                                                             : std::to_string(i);
        imp.push_back({{"feature", label}, {"mse_increase", fit.importance(i)}});
    }
    out << j.dump(2) << '\n';
}

}  // namespace tagprof
