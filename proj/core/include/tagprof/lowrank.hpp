#pragma once

#include "tagprof/diagnostics.hpp"
#include "tagprof/sparse_matrix.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace tagprof {

/// Rank-r factorization M ~ U diag(S) V^T with orthonormal columns in U and V
/// and S sorted nonincreasing.
struct LowRankFactors {
    Eigen::MatrixXd u;
    Eigen::VectorXd s;
    Eigen::MatrixXd v;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    int iterations = 0;

    Eigen::Index rank() const noexcept { return s.size(); }
    Eigen::MatrixXd reconstruct() const { return u * s.asDiagonal() * v.transpose(); }
    /// Rows of V diag(S): the column vectors of the approximation, expressed
    /// in the right singular basis.
    Eigen::MatrixXd weighted_columns() const { return v * s.asDiagonal(); }
    /// Rows of U diag(S): the row vectors of the approximation likewise.
    Eigen::MatrixXd weighted_rows() const { return u * s.asDiagonal(); }
};

struct SvdOptions {
    int oversample = 10;
    int max_iterations = 1000;
    /// Converged when every leading singular value moves by at most
    /// tolerance * s_max between iterations.
    double tolerance = 1e-10;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Best rank-`rank` approximation in Frobenius norm via seeded block subspace
/// iteration with a Rayleigh-Ritz step. Throws std::invalid_argument unless
/// 1 <= rank <= min(rows, cols), ConvergenceError after max_iterations.
LowRankFactors truncated_svd(const SparseMatrix& matrix, Eigen::Index rank, std::uint64_t seed,
                             const SvdOptions& options = {});
LowRankFactors truncated_svd(const Eigen::MatrixXd& matrix, Eigen::Index rank, std::uint64_t seed,
                             const SvdOptions& options = {});

/// Cosine similarities between the rows of a fixed vector table. Rows with
/// zero norm have similarity 0 to everything, themselves included.
class CosineLookup {
public:
    CosineLookup() = default;
    explicit CosineLookup(const Eigen::MatrixXd& vectors, std::vector<std::string> labels = {});

    double operator()(Eigen::Index a, Eigen::Index b) const;
    Eigen::Index size() const noexcept { return unit_.rows(); }
    const std::vector<Eigen::Index>& zero_rows() const noexcept { return zero_rows_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const Eigen::MatrixXd& unit_vectors() const noexcept { return unit_; }

private:
    Eigen::MatrixXd unit_;
    std::vector<char> is_zero_;
    std::vector<Eigen::Index> zero_rows_;
    std::vector<std::string> labels_;
};

/// Cosine between the column vectors of the approximation for items t and t2.
/// A zero vector yields 0 and a warning. Throws std::out_of_range on bad indices.
double tag_similarity(const LowRankFactors& factors, Eigen::Index t, Eigen::Index t2, Diagnostics* diag = nullptr);

/// Co-occurrence similarity lookup over all columns (tags) of the factorized matrix.
CosineLookup column_similarity(const LowRankFactors& factors, Diagnostics* diag = nullptr);

/// Writes <prefix>_u.csv, <prefix>_s.csv and <prefix>_v.csv.
void write_factors(const LowRankFactors& factors, const std::filesystem::path& prefix);

}  // namespace tagprof
