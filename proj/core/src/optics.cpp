#include "tagprof/cluster.hpp"

#include "tagprof/csv.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace tagprof {

ReachabilityOrdering optics(std::size_t n, const std::function<double(std::size_t, std::size_t)>& distance,
                            const OpticsParams& params) {
    if (params.min_pts < 2) {
        throw std::invalid_argument("optics: min_pts must be at least 2");
    }
    // Core distance: distance to the (min_pts - 1)-th nearest other item.
    std::vector<double> core(n, kUndefined);
    if (n >= params.min_pts) {
        std::vector<double> row;
        for (std::size_t i = 0; i < n; ++i) {
            row.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) {
                    row.push_back(distance(i, j));
                }
            }
            const auto kth = row.begin() + static_cast<std::ptrdiff_t>(params.min_pts - 2);
            std::nth_element(row.begin(), kth, row.end());
            if (*kth <= params.max_eps) {
                core[i] = *kth;
            }
        }
    }

    ReachabilityOrdering out;
    out.min_pts = params.min_pts;
    out.order.reserve(n);
    out.reachability.reserve(n);
    out.core_distance.reserve(n);

    std::vector<double> reach(n, kUndefined);
    std::vector<char> processed(n, 0);
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t next = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (processed[i] == 0 && (next == n || reach[i] < reach[next])) {
                next = i;
            }
        }
        processed[next] = 1;
        out.order.push_back(next);
        out.reachability.push_back(reach[next]);
        out.core_distance.push_back(core[next]);
        if (core[next] == kUndefined) {
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (processed[j] != 0) {
                continue;
            }
            const double d = distance(next, j);
            if (d > params.max_eps) {
                continue;
            }
            reach[j] = std::min(reach[j], std::max(core[next], d));
        }
    }
    return out;
}

ReachabilityOrdering optics(const DistanceMatrix& distances, const OpticsParams& params) {
    auto out = optics(
        distances.size(), [&](std::size_t i, std::size_t j) { return distances(i, j); }, params);
    out.labels = distances.labels();
    return out;
}

namespace {

std::vector<int> raw_cut(const ReachabilityOrdering& ordering, double eps_cut, std::size_t* count) {
    std::vector<int> by_position(ordering.order.size(), kNoise);
    int current = kNoise;
    int next_id = 0;
    for (std::size_t p = 0; p < ordering.order.size(); ++p) {
        if (ordering.reachability[p] > eps_cut) {
            if (ordering.core_distance[p] <= eps_cut) {
                current = next_id++;
                by_position[p] = current;
            } else {
                current = kNoise;
            }
        } else {
            by_position[p] = current;
        }
    }
    *count = static_cast<std::size_t>(next_id);
    return by_position;
}

}  // namespace

std::size_t count_cut_segments(const ReachabilityOrdering& ordering, double eps_cut) {
    std::size_t count = 0;
    raw_cut(ordering, eps_cut, &count);
    return count;
}

ClusterResult extract_clusters(const ReachabilityOrdering& ordering, double eps_cut) {
    if (!(eps_cut > 0.0)) {
        throw std::invalid_argument("extract_clusters: eps_cut must be positive");
    }
    std::size_t raw_count = 0;
    const auto by_position = raw_cut(ordering, eps_cut, &raw_count);

    std::vector<std::size_t> sizes(raw_count, 0);
    for (const int c : by_position) {
        if (c != kNoise) {
            ++sizes[static_cast<std::size_t>(c)];
        }
    }
    std::vector<int> remap(raw_count, kNoise);
    int next_id = 0;
    for (std::size_t c = 0; c < raw_count; ++c) {
        if (sizes[c] >= ordering.min_pts) {
            remap[c] = next_id++;
        }
    }

    ClusterResult result;
    const std::size_t n = ordering.order.size();
    result.assignment.assign(n, kNoise);
    result.k = static_cast<std::size_t>(next_id);
    for (std::size_t p = 0; p < n; ++p) {
        const int c = by_position[p];
        result.assignment[ordering.order[p]] = c == kNoise ? kNoise : remap[static_cast<std::size_t>(c)];
    }
    if (ordering.labels.size() == n) {
        result.items = ordering.labels;
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            result.items.push_back(std::to_string(i));
        }
    }
    return result;
}

double knee_eps(const ReachabilityOrdering& ordering) {
    std::vector<double> r;
    for (const double v : ordering.reachability) {
        if (v != kUndefined) {
            r.push_back(v);
        }
    }
    if (r.size() < 3) {
        return kUndefined;
    }
    std::sort(r.begin(), r.end());
    std::size_t best = 1;
    double best_curve = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        const double curve = r[i + 1] - 2.0 * r[i] + r[i - 1];
        if (curve > best_curve) {
            best_curve = curve;
            best = i;
        }
    }
    return 0.5 * (r[best] + r[best + 1]);
}

void write_reachability(std::ostream& out, const ReachabilityOrdering& ordering) {
    out << "item,reachability\n";
    for (std::size_t p = 0; p < ordering.order.size(); ++p) {
        const std::size_t item = ordering.order[p];
        const std::string label = item < ordering.labels.size() ? ordering.labels[item] : std::to_string(item);
        const double r = ordering.reachability[p];
        csv::write_row(out, {label, r == kUndefined ? "undefined" : csv::format_double(r)});
    }
}

ClusterResult apply_overrides(const ClusterResult& result, const ClusterResult& overrides, Diagnostics* diag) {
    std::unordered_map<std::string, std::size_t> item_index;
    for (std::size_t i = 0; i < result.items.size(); ++i) {
        item_index.emplace(result.items[i], i);
    }
    // Work with names so that new labels and existing clusters share one space.
    std::vector<std::string> label(result.items.size());
    for (std::size_t i = 0; i < result.items.size(); ++i) {
        const int c = result.assignment[i];
        label[i] = c == kNoise ? std::string() : result.name_of(static_cast<std::size_t>(c));
    }
    for (std::size_t o = 0; o < overrides.items.size(); ++o) {
        const auto it = item_index.find(overrides.items[o]);
        if (it == item_index.end()) {
            warn(diag, "override for unknown item '" + overrides.items[o] + "' ignored");
            continue;
        }
        const int c = overrides.assignment[o];
        label[it->second] = c == kNoise ? std::string() : overrides.name_of(static_cast<std::size_t>(c));
    }

    ClusterResult out;
    out.items = result.items;
    out.assignment.assign(result.items.size(), kNoise);
    std::map<std::string, int> ids;
    for (std::size_t i = 0; i < label.size(); ++i) {
        if (label[i].empty()) {
            continue;
        }
        const auto [it, inserted] = ids.try_emplace(label[i], static_cast<int>(out.k));
        if (inserted) {
            out.names.push_back(label[i]);
            ++out.k;
        }
        out.assignment[i] = it->second;
    }
    return out;
}

}  // namespace tagprof
