#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace tagprof {

inline constexpr int kNoise = -1;

/// Cluster id per item (or kNoise), plus medoids for medoid-based results.
struct ClusterResult {
    std::vector<std::string> items;
    std::vector<int> assignment;
    std::vector<std::size_t> medoids;
    std::size_t k = 0;
    std::vector<double> silhouettes;
    /// Optional display name per cluster id; empty means "cluster-<id>".
    std::vector<std::string> names;

    std::string name_of(std::size_t cluster) const;
    std::vector<std::vector<std::size_t>> members() const;
    std::size_t noise_count() const;
};

/// `item,cluster_label` rows; noise items get the label NOISE.
void write_clusters(std::ostream& out, const ClusterResult& result);

/// Parses `item,cluster_label` rows (header optional). Items labelled NOISE
/// are noise; other labels become clusters numbered in order of first
/// appearance and named by the label.
ClusterResult read_clusters(std::istream& in, const std::string& source);

}  // namespace tagprof
