#pragma once

#include "tagprof/cluster_result.hpp"
#include "tagprof/diagnostics.hpp"
#include "tagprof/sparse_matrix.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace tagprof {

/// Dense symmetric pairwise distance table.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n, std::vector<std::string> labels = {});

    /// Fills the upper triangle with fn(i, j) for i < j (possibly in
    /// parallel), mirrors it, and sets the diagonal to 0.
    static DistanceMatrix from_function(std::size_t n, const std::function<double(std::size_t, std::size_t)>& fn,
                                        unsigned workers = 1, std::vector<std::string> labels = {});

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double value) noexcept {
        data_[i * n_ + j] = value;
        data_[j * n_ + i] = value;
    }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    /// Restriction to the given item indices, in that order.
    DistanceMatrix subset(const std::vector<std::size_t>& indices) const;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
    std::vector<std::string> labels_;
};

/// 1 - s.
double similarity_to_distance(double s);

/// Pearson correlation of two equal-length vectors; constant input gives 0
/// and sets *constant when the pointer is non-null.
double pearson_r(const std::vector<double>& x, const std::vector<double>& y, bool* constant = nullptr);

/// d(a, b) = 1 - pearson_r(row a, row b) over all columns (unstored entries
/// are zeros). Constant rows correlate 0 with everything, with a warning.
DistanceMatrix book_dissimilarity(const SparseMatrix& matrix, unsigned workers = 1, Diagnostics* diag = nullptr);

// ---------------------------------------------------------------- OPTICS

inline constexpr double kUndefined = std::numeric_limits<double>::infinity();

struct OpticsParams {
    std::size_t min_pts = 5;
    double max_eps = std::numeric_limits<double>::infinity();
};

/// Processing order with reachability and core distance for each position of
/// the order (kUndefined where undefined). The first entry's reachability is
/// always undefined.
struct ReachabilityOrdering {
    std::vector<std::size_t> order;
    std::vector<double> reachability;
    std::vector<double> core_distance;
    std::size_t min_pts = 0;
    std::vector<std::string> labels;  // per item (not per position)
};

/// Each step expands the unprocessed item with the smallest reachability,
/// ties to the smallest index; when no reachable item remains the smallest
/// unprocessed index starts a new sweep. The item itself counts towards
/// min_pts. Throws std::invalid_argument if min_pts < 2.
ReachabilityOrdering optics(std::size_t n, const std::function<double(std::size_t, std::size_t)>& distance,
                            const OpticsParams& params = {});
ReachabilityOrdering optics(const DistanceMatrix& distances, const OpticsParams& params = {});

/// Horizontal cut at eps_cut: a position whose reachability exceeds eps_cut
/// starts a new cluster if its core distance is at most eps_cut, otherwise it
/// is noise; other positions join the current cluster. Clusters smaller than
/// min_pts become noise; ids are renumbered by first appearance.
ClusterResult extract_clusters(const ReachabilityOrdering& ordering, double eps_cut);

/// Number of clusters a cut yields before small clusters are discarded.
std::size_t count_cut_segments(const ReachabilityOrdering& ordering, double eps_cut);

/// eps_cut at the knee of the ascending finite reachability profile (largest
/// second difference), placed midway to the next value. Returns kUndefined
/// when fewer than three finite reachabilities exist.
double knee_eps(const ReachabilityOrdering& ordering);

/// `item,reachability` in processing order ("undefined" where undefined).
void write_reachability(std::ostream& out, const ReachabilityOrdering& ordering);

/// Replaces the assignment of listed items with the given cluster label
/// (or NOISE). Unknown labels create new clusters; emptied clusters are
/// removed and ids compacted. Unknown items are reported as warnings.
ClusterResult apply_overrides(const ClusterResult& result, const ClusterResult& overrides,
                              Diagnostics* diag = nullptr);

// ---------------------------------------------------------------- PAM

struct PamResult {
    ClusterResult clusters;
    double cost = 0.0;
    /// Total cost after BUILD and after each accepted swap.
    std::vector<double> cost_trace;
};

/// Partitioning Around Medoids: greedy BUILD, then repeatedly apply the best
/// cost-reducing medoid/non-medoid swap until none reduces the cost. Points
/// go to their nearest medoid, ties to the lower-indexed medoid; cluster ids
/// follow ascending medoid index. Throws std::invalid_argument unless
/// 1 <= k <= n.
PamResult pam(const DistanceMatrix& distances, std::size_t k);

/// Sum of distances from each point to the nearest of `medoids`.
double medoid_cost(const DistanceMatrix& distances, const std::vector<std::size_t>& medoids);

struct SilhouetteReport {
    std::vector<double> widths;
    double mean = 0.0;
    double median = 0.0;
};

/// s(i) = (b - a) / max(a, b) with a the mean distance to co-members and b
/// the smallest mean distance to another cluster. Singletons and noise get 0;
/// noise is excluded from mean and median. Fewer than two clusters yields
/// all zeros and a warning.
SilhouetteReport silhouette(const ClusterResult& result, const DistanceMatrix& distances,
                            Diagnostics* diag = nullptr);

struct KScore {
    std::size_t k = 0;
    double mean_silhouette = 0.0;
    double median_silhouette = 0.0;
    double cost = 0.0;
};

struct KSelection {
    std::size_t k = 0;
    PamResult result;
    SilhouetteReport silhouette;
    std::vector<KScore> table;
};

/// Runs pam for every k in [k_min, min(k_max, n)] and keeps the largest mean
/// silhouette, ties to the larger median, then the smaller k.
/// Throws std::invalid_argument when k_min is 0 or exceeds n.
KSelection select_k(const DistanceMatrix& distances, std::size_t k_min = 4, std::size_t k_max = 30,
                    unsigned workers = 1);

}  // namespace tagprof
