#include "tagprof/cluster.hpp"

#include "tagprof/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tagprof {

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<std::string> labels)
    : n_(n), data_(n * n, 0.0), labels_(std::move(labels)) {
    if (labels_.empty()) {
        labels_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels_[i] = std::to_string(i);
        }
    }
    if (labels_.size() != n) {
        throw std::invalid_argument("distance matrix label count mismatch");
    }
}

DistanceMatrix DistanceMatrix::from_function(std::size_t n,
                                             const std::function<double(std::size_t, std::size_t)>& fn,
                                             unsigned workers, std::vector<std::string> labels) {
    DistanceMatrix d(n, std::move(labels));
    // Row i writes only (i, j) and (j, i) for j > i; no two rows share a cell.
    parallel_for(n, workers, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            d.set(i, j, fn(i, j));
        }
    });
    return d;
}

DistanceMatrix DistanceMatrix::subset(const std::vector<std::size_t>& indices) const {
    std::vector<std::string> labels;
    labels.reserve(indices.size());
    for (const auto i : indices) {
        labels.push_back(labels_.at(i));
    }
    DistanceMatrix out(indices.size(), std::move(labels));
    for (std::size_t a = 0; a < indices.size(); ++a) {
        for (std::size_t b = a + 1; b < indices.size(); ++b) {
            out.set(a, b, (*this)(indices[a], indices[b]));
        }
    }
    return out;
}

double similarity_to_distance(double s) {
    return 1.0 - s;
}

double pearson_r(const std::vector<double>& x, const std::vector<double>& y, bool* constant) {
    if (x.size() != y.size() || x.empty()) {
        throw std::invalid_argument("pearson_r needs two non-empty vectors of equal length");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        if (constant != nullptr) {
            *constant = true;
        }
        return 0.0;
    }
    if (constant != nullptr) {
        *constant = false;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

DistanceMatrix book_dissimilarity(const SparseMatrix& matrix, unsigned workers, Diagnostics* diag) {
    const std::size_t n = matrix.rows();
    const std::size_t m = matrix.cols();
    if (m < 2) {
        throw std::invalid_argument("book_dissimilarity needs at least 2 columns");
    }
    // Centered, unit-length rows: pearson r is then a dot product.
    Eigen::MatrixXd centered = matrix.to_dense();
    std::vector<char> constant(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        auto row = centered.row(static_cast<Eigen::Index>(r));
        row.array() -= row.mean();
        const double norm = row.norm();
        if (norm == 0.0) {
            constant[r] = 1;
            warn(diag, "row '" + matrix.row_labels()[r] + "' is constant; correlation defined as 0");
        } else {
            row /= norm;
        }
    }
    return DistanceMatrix::from_function(
        n,
        [&](std::size_t a, std::size_t b) {
            if (constant[a] != 0 || constant[b] != 0) {
                return 1.0;
            }
            const double r = std::clamp(
                centered.row(static_cast<Eigen::Index>(a)).dot(centered.row(static_cast<Eigen::Index>(b))), -1.0,
                1.0);
            return 1.0 - r;
        },
        workers, matrix.row_labels());
}

}  // namespace tagprof
