#include "tagprof/matrix.hpp"

#include "tagprof/csv.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace tagprof {

std::string ClusterResult::name_of(std::size_t cluster) const {
    if (cluster < names.size() && !names[cluster].empty()) {
        return names[cluster];
    }
    return "cluster-" + std::to_string(cluster);
}

std::vector<std::vector<std::size_t>> ClusterResult::members() const {
    std::vector<std::vector<std::size_t>> out(k);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] != kNoise) {
            out.at(static_cast<std::size_t>(assignment[i])).push_back(i);
        }
    }
    return out;
}

std::size_t ClusterResult::noise_count() const {
    return static_cast<std::size_t>(std::count(assignment.begin(), assignment.end(), kNoise));
}

void write_clusters(std::ostream& out, const ClusterResult& result) {
    out << "item,cluster_label\n";
    for (std::size_t i = 0; i < result.assignment.size(); ++i) {
        const int c = result.assignment[i];
        csv::write_row(out, {result.items.at(i), c == kNoise ? "NOISE" : result.name_of(static_cast<std::size_t>(c))});
    }
}

ClusterResult read_clusters(std::istream& in, const std::string& source) {
    ClusterResult result;
    std::unordered_map<std::string, int> ids;
    std::string line;
    std::vector<std::string> fields;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) {
            continue;
        }
        if (!csv::split_line(line, fields) || fields.size() != 2) {
            throw ParseError(source, line_no, "expected item,cluster_label");
        }
        if (line_no == 1 && fields[0] == "item" && fields[1] == "cluster_label") {
            continue;
        }
        result.items.emplace_back(csv::trim(fields[0]));
        const std::string label(csv::trim(fields[1]));
        if (label == "NOISE") {
            result.assignment.push_back(kNoise);
            continue;
        }
        const auto [it, inserted] = ids.try_emplace(label, static_cast<int>(result.k));
        if (inserted) {
            result.names.push_back(label);
            ++result.k;
        }
        result.assignment.push_back(it->second);
    }
    return result;
}

SparseMatrix build_count_matrix(const TagCorpus& corpus) {
    std::unordered_map<std::string, std::size_t> book_index;
    std::unordered_map<std::string, std::size_t> tag_index;
    for (std::size_t i = 0; i < corpus.books.size(); ++i) {
        book_index.emplace(corpus.books[i], i);
    }
    for (std::size_t i = 0; i < corpus.tags.size(); ++i) {
        tag_index.emplace(corpus.tags[i], i);
    }
    std::vector<Triplet> triplets;
    triplets.reserve(corpus.applications.size());
    for (const auto& app : corpus.applications) {
        triplets.push_back({book_index.at(app.book_id), tag_index.at(app.tag), static_cast<double>(app.count)});
    }
    return SparseMatrix::from_triplets(corpus.books, corpus.tags, std::move(triplets));
}

double idf_weight(std::size_t n_documents, std::size_t n_containing) {
    return std::log1p(static_cast<double>(n_documents) / static_cast<double>(n_containing));
}

SparseMatrix tfidf(const SparseMatrix& counts) {
    const auto support = counts.column_support();
    std::vector<std::size_t> new_col(counts.cols(), 0);
    std::vector<std::string> col_labels;
    std::vector<double> weight(counts.cols(), 0.0);
    for (std::size_t c = 0; c < counts.cols(); ++c) {
        if (support[c] == 0) {
            continue;
        }
        new_col[c] = col_labels.size();
        col_labels.push_back(counts.col_labels()[c]);
        weight[c] = idf_weight(counts.rows(), support[c]);
    }

    std::vector<Triplet> triplets;
    triplets.reserve(counts.nonzeros());
    for (std::size_t r = 0; r < counts.rows(); ++r) {
        for (const auto& e : counts.row(r)) {
            triplets.push_back({r, new_col[e.col], e.value * weight[e.col]});
        }
    }
    return SparseMatrix::from_triplets(counts.row_labels(), std::move(col_labels), std::move(triplets));
}

NormalizedRows normalize_rows(const SparseMatrix& matrix, Diagnostics* diag) {
    NormalizedRows out;
    std::vector<Triplet> triplets;
    triplets.reserve(matrix.nonzeros());
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        const auto entries = matrix.row(r);
        double sum = 0.0;
        for (const auto& e : entries) {
            sum += e.value * e.value;
        }
        if (sum == 0.0) {
            out.zero_rows.push_back(matrix.row_labels()[r]);
            warn(diag, "row '" + matrix.row_labels()[r] + "' is all zero; left unnormalized");
            continue;
        }
        const double norm = std::sqrt(sum);
        for (const auto& e : entries) {
            triplets.push_back({r, e.col, e.value / norm});
        }
    }
    out.matrix = SparseMatrix::from_triplets(matrix.row_labels(), matrix.col_labels(), std::move(triplets));
    return out;
}

SparseMatrix consolidate_pages(const SparseMatrix& book_rows,
                               const std::map<std::string, std::vector<std::string>>& page_books,
                               Diagnostics* diag) {
    std::unordered_map<std::string, std::size_t> book_index;
    for (std::size_t i = 0; i < book_rows.rows(); ++i) {
        book_index.emplace(book_rows.row_labels()[i], i);
    }

    std::vector<std::string> pages;
    std::vector<Triplet> triplets;
    std::vector<double> sum(book_rows.cols(), 0.0);
    std::vector<std::size_t> touched;
    for (const auto& [page, books] : page_books) {
        bool any = false;
        touched.clear();
        for (const auto& book : books) {
            const auto it = book_index.find(book);
            if (it == book_index.end()) {
                continue;
            }
            any = true;
            for (const auto& e : book_rows.row(it->second)) {
                if (sum[e.col] == 0.0) {
                    touched.push_back(e.col);
                }
                sum[e.col] += e.value;
            }
        }
        if (!any) {
            warn(diag, "page '" + page + "' has no books in the matrix; dropped");
            continue;
        }
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        double norm2 = 0.0;
        for (const std::size_t c : touched) {
            norm2 += sum[c] * sum[c];
        }
        const std::size_t row = pages.size();
        pages.push_back(page);
        if (norm2 == 0.0) {
            warn(diag, "page '" + page + "' has an all-zero feature vector");
        }
        const double norm = std::sqrt(norm2);
        for (const std::size_t c : touched) {
            if (norm2 > 0.0 && sum[c] != 0.0) {
                triplets.push_back({row, c, sum[c] / norm});
            }
            sum[c] = 0.0;
        }
    }
    return SparseMatrix::from_triplets(std::move(pages), book_rows.col_labels(), std::move(triplets));
}

SparseMatrix consolidate_tag_clusters(const SparseMatrix& matrix, const ClusterResult& clusters) {
    std::unordered_map<std::string, std::size_t> col_index;
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
        col_index.emplace(matrix.col_labels()[c], c);
    }

    const auto groups = clusters.members();
    std::vector<std::vector<std::size_t>> member_cols(groups.size());
    std::vector<std::string> names;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty()) {
            throw std::invalid_argument("cluster " + clusters.name_of(g) + " has no members");
        }
        for (const std::size_t item : groups[g]) {
            const auto it = col_index.find(clusters.items.at(item));
            if (it == col_index.end()) {
                throw std::invalid_argument("clustered item '" + clusters.items[item] + "' is not a matrix column");
            }
            member_cols[g].push_back(it->second);
        }
        names.push_back(clusters.name_of(g));
    }

    std::vector<Triplet> triplets;
    std::vector<double> values;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        for (std::size_t g = 0; g < member_cols.size(); ++g) {
            values.clear();
            for (const std::size_t c : member_cols[g]) {
                values.push_back(matrix.at(r, c));
            }
            const double m = median(values);
            if (m != 0.0) {
                triplets.push_back({r, g, m});
            }
        }
    }
    return SparseMatrix::from_triplets(matrix.row_labels(), std::move(names), std::move(triplets));
}

}  // namespace tagprof
