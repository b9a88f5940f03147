#pragma once

#include "tagprof/cluster_result.hpp"
#include "tagprof/corpus.hpp"
#include "tagprof/diagnostics.hpp"
#include "tagprof/sparse_matrix.hpp"

#include <map>
#include <string>
#include <vector>

namespace tagprof {

/// Book-by-tag matrix of raw application counts (rows: corpus.books, cols: corpus.tags).
SparseMatrix build_count_matrix(const TagCorpus& corpus);

/// Inverse-frequency weight log(1 + N / n_t), natural log.
double idf_weight(std::size_t n_documents, std::size_t n_containing);

/// Replaces each count f with f * log(1 + N/n_t), where N is the row count and
/// n_t the number of nonzero rows in column t. Empty columns are dropped.
SparseMatrix tfidf(const SparseMatrix& counts);

struct NormalizedRows {
    SparseMatrix matrix;
    std::vector<std::string> zero_rows;
};

/// Scales every nonzero row to unit Euclidean length; zero rows stay zero and
/// are reported (also as warnings through `diag`).
NormalizedRows normalize_rows(const SparseMatrix& matrix, Diagnostics* diag = nullptr);

/// One row per page (sorted by page id) equal to the renormalized sum of the
/// rows of its books. Pages none of whose books appear in `book_rows` are
/// dropped with a warning.
SparseMatrix consolidate_pages(const SparseMatrix& book_rows,
                               const std::map<std::string, std::vector<std::string>>& page_books,
                               Diagnostics* diag = nullptr);

/// One column per cluster holding the median of its member columns in each
/// row; unstored entries count as zeros, noise items are dropped. Items are
/// matched to columns by label. Throws std::invalid_argument for an empty
/// cluster or an item that is not a column of `matrix`.
SparseMatrix consolidate_tag_clusters(const SparseMatrix& matrix, const ClusterResult& clusters);

}  // namespace tagprof
