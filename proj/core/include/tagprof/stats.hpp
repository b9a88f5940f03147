#pragma once

#include "tagprof/cluster_result.hpp"
#include "tagprof/corpus.hpp"
#include "tagprof/diagnostics.hpp"
#include "tagprof/sparse_matrix.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tagprof {

struct PearsonResult {
    double r = 0.0;
    double p = 1.0;
    std::size_t n = 0;
};

/// Sample correlation with a two-sided t-test on n - 2 degrees of freedom.
/// Throws std::invalid_argument for n < 3 or unequal lengths and
/// std::domain_error when either input is constant.
PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided p-value of a correlation r over n samples.
double correlation_p_value(double r, std::size_t n);

/// "***" for p < 0.001, "**" for p < 0.01, "*" for p < 0.05, else "".
std::string_view significance_stars(double p);

struct CorrelationEntry {
    std::string feature;
    Trait trait = Trait::extraversion;
    double r = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    /// False when one side had no variance; r and p are then NaN.
    bool defined = true;
};

/// One entry per (feature column, trait) over pages present in both inputs,
/// ordered by feature label then trait. Constant columns are skipped with a warning.
std::vector<CorrelationEntry> correlation_table(const SparseMatrix& features, const PageTraits& traits,
                                                unsigned workers = 1, Diagnostics* diag = nullptr);

struct TopCorrelations {
    std::vector<CorrelationEntry> positive;  // descending r
    std::vector<CorrelationEntry> negative;  // ascending r
};

TopCorrelations top_correlations(const std::vector<CorrelationEntry>& table, Trait trait, std::size_t count = 5);

/// Low and high pole names of a trait, e.g. ("Introverted", "Extraverted").
std::pair<std::string_view, std::string_view> trait_poles(Trait trait);

/// `feature,trait,r,p,stars,n`
void write_correlations(std::ostream& out, const std::vector<CorrelationEntry>& table);
/// Inverse of write_correlations. Throws ParseError on malformed rows.
std::vector<CorrelationEntry> read_correlations(std::istream& in, const std::string& source);

/// Machine-readable top-k table: one row per (trait, rank) pairing the k-th
/// most negative and k-th most positive feature.
void write_top_table(std::ostream& out, const std::vector<CorrelationEntry>& table, std::size_t count = 5);

/// Same content laid out for reading: negative side left, positive side right.
void write_top_table_text(std::ostream& out, const std::vector<CorrelationEntry>& table, std::size_t count = 5);

struct GenreProfile {
    std::string label;
    TraitScores medians{};
    TraitScores normalized{};
    std::size_t members = 0;
};

/// Per-genre median of member pages' aggregated traits, then per-trait
/// normalization across genres (population sd; all-equal traits map to 0).
/// Genres without scored pages are dropped with a warning. Throws
/// std::invalid_argument when fewer than two genres remain.
std::vector<GenreProfile> genre_profiles(const ClusterResult& genres, const PageTraits& traits,
                                         Diagnostics* diag = nullptr);

struct ProfileProjection {
    Eigen::MatrixXd coordinates;  // genres x 2
    Eigen::MatrixXd loadings;     // traits x 2
    Eigen::Vector2d explained = Eigen::Vector2d::Zero();
    std::vector<std::string> labels;
};

/// Principal components of the centered genre x trait normalized-score
/// matrix via the rank-2 truncated SVD. Throws std::invalid_argument for
/// fewer than three genres.
ProfileProjection project_profiles_2d(const std::vector<GenreProfile>& profiles, std::uint64_t seed = 0);

/// Per trait, correlation between users' scores and their liked-page counts.
/// Throws std::invalid_argument for fewer than three users.
std::vector<CorrelationEntry> disposition_correlation(const std::vector<UserRecord>& users);

}  // namespace tagprof
