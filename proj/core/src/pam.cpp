#include "tagprof/cluster.hpp"

#include "tagprof/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tagprof {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Nearest and second-nearest medoid distance per point; `nearest` holds the
// position in `medoids` of the nearest one (lowest point index on ties).
void nearest_two(const DistanceMatrix& d, const std::vector<std::size_t>& medoids, std::vector<double>& first,
                 std::vector<double>& second, std::vector<std::size_t>& nearest) {
    const std::size_t n = d.size();
    for (std::size_t j = 0; j < n; ++j) {
        first[j] = kInf;
        second[j] = kInf;
        nearest[j] = 0;
        for (std::size_t m = 0; m < medoids.size(); ++m) {
            const double dist = d(j, medoids[m]);
            if (dist < first[j] || (dist == first[j] && medoids[m] < medoids[nearest[j]])) {
                second[j] = first[j];
                first[j] = dist;
                nearest[j] = m;
            } else if (dist < second[j]) {
                second[j] = dist;
            }
        }
    }
}

}  // namespace

double medoid_cost(const DistanceMatrix& distances, const std::vector<std::size_t>& medoids) {
    double cost = 0.0;
    for (std::size_t j = 0; j < distances.size(); ++j) {
        double best = kInf;
        for (const auto m : medoids) {
            best = std::min(best, distances(j, m));
        }
        cost += best;
    }
    return cost;
}

PamResult pam(const DistanceMatrix& distances, std::size_t k) {
    const std::size_t n = distances.size();
    if (k < 1 || k > n) {
        throw std::invalid_argument("pam: k must lie in [1, " + std::to_string(n) + "], got " + std::to_string(k));
    }

    // BUILD
    std::vector<std::size_t> medoids;
    std::vector<char> is_medoid(n, 0);
    std::vector<double> nearest_dist(n, kInf);
    {
        std::size_t best = 0;
        double best_total = kInf;
        for (std::size_t i = 0; i < n; ++i) {
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                total += distances(i, j);
            }
            if (total < best_total) {
                best_total = total;
                best = i;
            }
        }
        medoids.push_back(best);
        is_medoid[best] = 1;
        for (std::size_t j = 0; j < n; ++j) {
            nearest_dist[j] = distances(j, best);
        }
    }
    while (medoids.size() < k) {
        std::size_t best = n;
        double best_gain = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (is_medoid[i] != 0) {
                continue;
            }
            double gain = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                gain += std::max(nearest_dist[j] - distances(i, j), 0.0);
            }
            if (gain > best_gain) {
                best_gain = gain;
                best = i;
            }
        }
        medoids.push_back(best);
        is_medoid[best] = 1;
        for (std::size_t j = 0; j < n; ++j) {
            nearest_dist[j] = std::min(nearest_dist[j], distances(j, best));
        }
    }

    PamResult result;
    double cost = medoid_cost(distances, medoids);
    result.cost_trace.push_back(cost);

    // SWAP
    std::vector<double> first(n);
    std::vector<double> second(n);
    std::vector<std::size_t> nearest(n);
    for (;;) {
        nearest_two(distances, medoids, first, second, nearest);
        double best_delta = 0.0;
        std::size_t best_m = 0;
        std::size_t best_h = n;
        for (std::size_t m = 0; m < medoids.size(); ++m) {
            for (std::size_t h = 0; h < n; ++h) {
                if (is_medoid[h] != 0) {
                    continue;
                }
                double delta = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double dh = distances(j, h);
                    const double replacement = nearest[j] == m ? std::min(second[j], dh) : std::min(first[j], dh);
                    delta += replacement - first[j];
                }
                if (delta < best_delta) {
                    best_delta = delta;
                    best_m = m;
                    best_h = h;
                }
            }
        }
        // Guard against accepting rounding noise as an improvement.
        if (best_h == n || best_delta >= -1e-12 * std::max(1.0, cost)) {
            break;
        }
        auto candidate = medoids;
        candidate[best_m] = best_h;
        const double new_cost = medoid_cost(distances, candidate);
        if (!(new_cost < cost)) {
            break;
        }
        is_medoid[medoids[best_m]] = 0;
        is_medoid[best_h] = 1;
        medoids = std::move(candidate);
        cost = new_cost;
        result.cost_trace.push_back(cost);
    }

    std::sort(medoids.begin(), medoids.end());
    ClusterResult& clusters = result.clusters;
    clusters.items = distances.labels();
    clusters.k = k;
    clusters.medoids = medoids;
    clusters.assignment.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        double best = kInf;
        for (std::size_t m = 0; m < medoids.size(); ++m) {
            if (distances(j, medoids[m]) < best) {
                best = distances(j, medoids[m]);
                clusters.assignment[j] = static_cast<int>(m);
            }
        }
    }
    // A medoid always belongs to its own cluster, even if it ties with a lower one.
    for (std::size_t m = 0; m < medoids.size(); ++m) {
        clusters.assignment[medoids[m]] = static_cast<int>(m);
    }
    result.cost = medoid_cost(distances, medoids);
    return result;
}

SilhouetteReport silhouette(const ClusterResult& result, const DistanceMatrix& distances, Diagnostics* diag) {
    const std::size_t n = result.assignment.size();
    if (distances.size() != n) {
        throw std::invalid_argument("silhouette: distance table size mismatch");
    }
    SilhouetteReport report;
    report.widths.assign(n, 0.0);

    const auto groups = result.members();
    std::size_t non_empty = 0;
    for (const auto& g : groups) {
        non_empty += g.empty() ? 0 : 1;
    }
    std::vector<double> clustered;
    if (non_empty < 2) {
        warn(diag, "silhouette: fewer than two clusters; all widths set to 0");
    } else {
        std::vector<double> mean_to(groups.size());
        for (std::size_t i = 0; i < n; ++i) {
            const int own = result.assignment[i];
            if (own == kNoise) {
                continue;
            }
            const auto& own_members = groups[static_cast<std::size_t>(own)];
            if (own_members.size() < 2) {
                continue;
            }
            double a = 0.0;
            for (const auto j : own_members) {
                a += distances(i, j);
            }
            a /= static_cast<double>(own_members.size() - 1);
            double b = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < groups.size(); ++c) {
                if (static_cast<int>(c) == own || groups[c].empty()) {
                    continue;
                }
                double total = 0.0;
                for (const auto j : groups[c]) {
                    total += distances(i, j);
                }
                b = std::min(b, total / static_cast<double>(groups[c].size()));
            }
            const double denom = std::max(a, b);
            report.widths[i] = denom > 0.0 ? (b - a) / denom : 0.0;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (result.assignment[i] != kNoise) {
            clustered.push_back(report.widths[i]);
        }
    }
    if (!clustered.empty()) {
        double sum = 0.0;
        for (const double w : clustered) {
            sum += w;
        }
        report.mean = sum / static_cast<double>(clustered.size());
        std::sort(clustered.begin(), clustered.end());
        const std::size_t mid = clustered.size() / 2;
        report.median = clustered.size() % 2 == 1 ? clustered[mid] : 0.5 * (clustered[mid - 1] + clustered[mid]);
    }
    return report;
}

KSelection select_k(const DistanceMatrix& distances, std::size_t k_min, std::size_t k_max, unsigned workers) {
    const std::size_t n = distances.size();
    if (k_min == 0 || k_min > n) {
        throw std::invalid_argument("select_k: k_min must lie in [1, n]");
    }
    k_max = std::min(k_max, n);
    if (k_max < k_min) {
        throw std::invalid_argument("select_k: empty k range");
    }
    const std::size_t count = k_max - k_min + 1;
    std::vector<PamResult> fits(count);
    std::vector<SilhouetteReport> reports(count);
    parallel_for(count, workers, [&](std::size_t i) {
        fits[i] = pam(distances, k_min + i);
        reports[i] = silhouette(fits[i].clusters, distances);
    });

    KSelection selection;
    std::size_t best = 0;
    for (std::size_t i = 0; i < count; ++i) {
        selection.table.push_back({k_min + i, reports[i].mean, reports[i].median, fits[i].cost});
        const bool better = reports[i].mean > reports[best].mean ||
                            (reports[i].mean == reports[best].mean && reports[i].median > reports[best].median);
        if (better) {
            best = i;
        }
    }
    selection.k = k_min + best;
    selection.result = std::move(fits[best]);
    selection.silhouette = std::move(reports[best]);
    selection.result.clusters.silhouettes = selection.silhouette.widths;
    return selection;
}

}  // namespace tagprof
