#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tagprof {

struct Triplet {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;
};

struct SparseEntry {
    std::size_t col = 0;
    double value = 0.0;

    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Labelled real matrix in compressed-row form. Entries within a row are
/// sorted by column, never duplicated, finite, and never explicitly zero.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Builds from triplets; duplicate (row, col) pairs are summed, zeros dropped.
    /// Throws std::invalid_argument on out-of-range indices, non-finite values,
    /// or label counts that do not match the given shape.
    static SparseMatrix from_triplets(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
                                      std::vector<Triplet> triplets);

    static SparseMatrix from_dense(const Eigen::MatrixXd& dense, std::vector<std::string> row_labels = {},
                                   std::vector<std::string> col_labels = {});

    std::size_t rows() const noexcept { return row_labels_.size(); }
    std::size_t cols() const noexcept { return col_labels_.size(); }
    std::size_t nonzeros() const noexcept { return entries_.size(); }

    const std::vector<std::string>& row_labels() const noexcept { return row_labels_; }
    const std::vector<std::string>& col_labels() const noexcept { return col_labels_; }

    std::span<const SparseEntry> row(std::size_t r) const {
        return {entries_.data() + row_start_[r], entries_.data() + row_start_[r + 1]};
    }

    /// Value at (r, c); zero when not stored.
    double at(std::size_t r, std::size_t c) const;

    std::vector<Triplet> triplets() const;
    Eigen::MatrixXd to_dense() const;

    /// Number of nonzero rows in each column.
    std::vector<std::size_t> column_support() const;

    double frobenius_norm() const;

    /// out = this * x   (rows x k)
    Eigen::MatrixXd multiply(const Eigen::MatrixXd& x) const;
    /// out = this^T * x (cols x k)
    Eigen::MatrixXd multiply_transposed(const Eigen::MatrixXd& x) const;

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    std::vector<std::string> row_labels_;
    std::vector<std::string> col_labels_;
    std::vector<std::size_t> row_start_{0};
    std::vector<SparseEntry> entries_;
};

/// Writes `#matrix,<kind>,<rows>,<cols>`, one `#row,<label>` / `#col,<label>`
/// line per label, a `row_label,col_label,value` header, then triplets.
void write_matrix(std::ostream& out, const SparseMatrix& matrix, const std::string& kind);

/// Inverse of write_matrix. Returns the kind via `kind` when non-null.
/// Throws ParseError on malformed input.
SparseMatrix read_matrix(std::istream& in, const std::string& source, std::string* kind = nullptr);

/// Dense matrix with labels written as a plain CSV grid (header = column labels).
void write_dense(std::ostream& out, const Eigen::MatrixXd& matrix, const std::vector<std::string>& row_labels,
                 const std::vector<std::string>& col_labels, const std::string& corner = "label");

struct DenseTable {
    Eigen::MatrixXd matrix;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
};

/// Inverse of write_dense. Throws ParseError on ragged or non-numeric input.
DenseTable read_dense(std::istream& in, const std::string& source);

}  // namespace tagprof
