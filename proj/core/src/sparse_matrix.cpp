#include "tagprof/sparse_matrix.hpp"

#include "tagprof/csv.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace tagprof {

namespace {

std::vector<std::string> default_labels(std::size_t n, const char* prefix) {
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = prefix + std::to_string(i);
    }
    return labels;
}

}  // namespace

SparseMatrix SparseMatrix::from_triplets(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
                                         std::vector<Triplet> triplets) {
    const std::size_t n_rows = row_labels.size();
    const std::size_t n_cols = col_labels.size();
    for (const auto& t : triplets) {
        if (t.row >= n_rows || t.col >= n_cols) {
            throw std::invalid_argument("triplet index out of range");
        }
        if (!std::isfinite(t.value)) {
            throw std::invalid_argument("non-finite matrix entry");
        }
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseMatrix m;
    m.row_labels_ = std::move(row_labels);
    m.col_labels_ = std::move(col_labels);
    m.row_start_.assign(n_rows + 1, 0);
    m.entries_.reserve(triplets.size());

    std::size_t i = 0;
    for (std::size_t r = 0; r < n_rows; ++r) {
        m.row_start_[r] = m.entries_.size();
        while (i < triplets.size() && triplets[i].row == r) {
            const std::size_t c = triplets[i].col;
            double sum = 0.0;
            while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
                sum += triplets[i].value;
                ++i;
            }
            if (!std::isfinite(sum)) {
                throw std::invalid_argument("non-finite matrix entry");
            }
            if (sum != 0.0) {
                m.entries_.push_back({c, sum});
            }
        }
    }
    m.row_start_[n_rows] = m.entries_.size();
    return m;
}

SparseMatrix SparseMatrix::from_dense(const Eigen::MatrixXd& dense, std::vector<std::string> row_labels,
                                      std::vector<std::string> col_labels) {
    const auto n_rows = static_cast<std::size_t>(dense.rows());
    const auto n_cols = static_cast<std::size_t>(dense.cols());
    if (row_labels.empty()) {
        row_labels = default_labels(n_rows, "r");
    }
    if (col_labels.empty()) {
        col_labels = default_labels(n_cols, "c");
    }
    if (row_labels.size() != n_rows || col_labels.size() != n_cols) {
        throw std::invalid_argument("label count does not match dense shape");
    }
    std::vector<Triplet> triplets;
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < n_cols; ++c) {
            const double v = dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            if (v != 0.0) {
                triplets.push_back({r, c, v});
            }
        }
    }
    return from_triplets(std::move(row_labels), std::move(col_labels), std::move(triplets));
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
    const auto entries = row(r);
    const auto it = std::lower_bound(entries.begin(), entries.end(), c,
                                     [](const SparseEntry& e, std::size_t col) { return e.col < col; });
    return (it != entries.end() && it->col == c) ? it->value : 0.0;
}

std::vector<Triplet> SparseMatrix::triplets() const {
    std::vector<Triplet> out;
    out.reserve(entries_.size());
    for (std::size_t r = 0; r < rows(); ++r) {
        for (const auto& e : row(r)) {
            out.push_back({r, e.col, e.value});
        }
    }
    return out;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
    for (std::size_t r = 0; r < rows(); ++r) {
        for (const auto& e : row(r)) {
            dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(e.col)) = e.value;
        }
    }
    return dense;
}

std::vector<std::size_t> SparseMatrix::column_support() const {
    std::vector<std::size_t> support(cols(), 0);
    for (const auto& e : entries_) {
        ++support[e.col];
    }
    return support;
}

double SparseMatrix::frobenius_norm() const {
    double sum = 0.0;
    for (const auto& e : entries_) {
        sum += e.value * e.value;
    }
    return std::sqrt(sum);
}

Eigen::MatrixXd SparseMatrix::multiply(const Eigen::MatrixXd& x) const {
    if (static_cast<std::size_t>(x.rows()) != cols()) {
        throw std::invalid_argument("multiply: dimension mismatch");
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows()), x.cols());
    for (std::size_t r = 0; r < rows(); ++r) {
        for (const auto& e : row(r)) {
            out.row(static_cast<Eigen::Index>(r)) += e.value * x.row(static_cast<Eigen::Index>(e.col));
        }
    }
    return out;
}

Eigen::MatrixXd SparseMatrix::multiply_transposed(const Eigen::MatrixXd& x) const {
    if (static_cast<std::size_t>(x.rows()) != rows()) {
        throw std::invalid_argument("multiply_transposed: dimension mismatch");
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cols()), x.cols());
    for (std::size_t r = 0; r < rows(); ++r) {
        for (const auto& e : row(r)) {
            out.row(static_cast<Eigen::Index>(e.col)) += e.value * x.row(static_cast<Eigen::Index>(r));
        }
    }
    return out;
}

void write_matrix(std::ostream& out, const SparseMatrix& matrix, const std::string& kind) {
    csv::write_row(out, {"#matrix", kind, std::to_string(matrix.rows()), std::to_string(matrix.cols())});
    for (const auto& label : matrix.row_labels()) {
        csv::write_row(out, {"#row", label});
    }
    for (const auto& label : matrix.col_labels()) {
        csv::write_row(out, {"#col", label});
    }
    out << "row_label,col_label,value\n";
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        for (const auto& e : matrix.row(r)) {
            csv::write_row(out, {matrix.row_labels()[r], matrix.col_labels()[e.col], csv::format_double(e.value)});
        }
    }
}

SparseMatrix read_matrix(std::istream& in, const std::string& source, std::string* kind) {
    std::string line;
    std::vector<std::string> fields;
    std::size_t line_no = 0;

    auto next = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!csv::trim(line).empty()) {
                if (!csv::split_line(line, fields)) {
                    throw ParseError(source, line_no, "unterminated quoted field");
                }
                return true;
            }
        }
        return false;
    };

    if (!next() || fields.size() != 4 || fields[0] != "#matrix") {
        throw ParseError(source, line_no, "missing #matrix header");
    }
    if (kind != nullptr) {
        *kind = fields[1];
    }
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    try {
        n_rows = static_cast<std::size_t>(csv::parse_integer(fields[2]));
        n_cols = static_cast<std::size_t>(csv::parse_integer(fields[3]));
    } catch (const std::invalid_argument& e) {
        throw ParseError(source, line_no, e.what());
    }

    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::unordered_map<std::string, std::size_t> row_index;
    std::unordered_map<std::string, std::size_t> col_index;
    std::vector<Triplet> triplets;
    bool in_body = false;
    while (next()) {
        if (!in_body && fields.size() == 2 && fields[0] == "#row") {
            row_index.emplace(fields[1], row_labels.size());
            row_labels.push_back(fields[1]);
            continue;
        }
        if (!in_body && fields.size() == 2 && fields[0] == "#col") {
            col_index.emplace(fields[1], col_labels.size());
            col_labels.push_back(fields[1]);
            continue;
        }
        if (!in_body && fields.size() == 3 && fields[0] == "row_label") {
            in_body = true;
            continue;
        }
        if (!in_body || fields.size() != 3) {
            throw ParseError(source, line_no, "malformed matrix line");
        }
        const auto r = row_index.find(fields[0]);
        const auto c = col_index.find(fields[1]);
        if (r == row_index.end() || c == col_index.end()) {
            throw ParseError(source, line_no, "unknown row or column label");
        }
        try {
            triplets.push_back({r->second, c->second, csv::parse_double(fields[2])});
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, e.what());
        }
    }
    if (row_labels.size() != n_rows || col_labels.size() != n_cols) {
        throw ParseError(source, line_no, "label count does not match header shape");
    }
    if (row_index.size() != n_rows || col_index.size() != n_cols) {
        throw ParseError(source, line_no, "duplicate row or column label");
    }
    return SparseMatrix::from_triplets(std::move(row_labels), std::move(col_labels), std::move(triplets));
}

void write_dense(std::ostream& out, const Eigen::MatrixXd& matrix, const std::vector<std::string>& row_labels,
                 const std::vector<std::string>& col_labels, const std::string& corner) {
    std::vector<std::string> fields{corner};
    fields.insert(fields.end(), col_labels.begin(), col_labels.end());
    csv::write_row(out, fields);
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
        fields.assign(1, row_labels[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
            fields.push_back(csv::format_double(matrix(r, c)));
        }
        csv::write_row(out, fields);
    }
}

DenseTable read_dense(std::istream& in, const std::string& source) {
    const auto rows = csv::read_rows(in, source);
    if (rows.empty()) {
        throw ParseError(source, 1, "missing header row");
    }
    DenseTable table;
    table.col_labels.assign(rows.front().begin() + 1, rows.front().end());
    const auto cols = static_cast<Eigen::Index>(table.col_labels.size());
    table.matrix.resize(static_cast<Eigen::Index>(rows.size() - 1), cols);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != cols + 1) {
            throw ParseError(source, r + 1, "expected " + std::to_string(cols + 1) + " fields");
        }
        table.row_labels.push_back(rows[r][0]);
        for (Eigen::Index c = 0; c < cols; ++c) {
            try {
                table.matrix(static_cast<Eigen::Index>(r - 1), c) =
                    csv::parse_double(rows[r][static_cast<std::size_t>(c + 1)]);
            } catch (const std::invalid_argument& e) {
                throw ParseError(source, r + 1, e.what());
            }
        }
    }
    return table;
}

}  // namespace tagprof
