#include "oracles.hpp"
#include "tagprof/cluster.hpp"
#include "tagprof/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

using namespace tagprof;

namespace {

using Points = std::vector<std::array<double, 2>>;

DistanceMatrix euclidean(const Points& pts) {
    return DistanceMatrix::from_function(pts.size(), [&](std::size_t i, std::size_t j) {
        return std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
    });
}

Points blobs(Rng& rng, const std::vector<std::array<double, 2>>& centers, std::size_t per, double spread) {
    Points pts;
    for (const auto& c : centers) {
        for (std::size_t i = 0; i < per; ++i) {
            pts.push_back({c[0] + spread * rng.normal(), c[1] + spread * rng.normal()});
        }
    }
    return pts;
}

std::vector<std::vector<double>> as_table(const DistanceMatrix& d) {
    std::vector<std::vector<double>> t(d.size(), std::vector<double>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.size(); ++j) {
            t[i][j] = d(i, j);
        }
    }
    return t;
}

/// Same-cluster relation agreement between two labelings.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a.size(); ++j) {
            if ((a[i] == a[j]) != (b[i] == b[j])) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

TEST_CASE("similarity to distance") {
    CHECK(similarity_to_distance(1) == 0.0);
    CHECK(similarity_to_distance(0) == 1.0);
    CHECK(similarity_to_distance(-1) == 2.0);
}

TEST_CASE("book dissimilarity") {
    Eigen::MatrixXd m(5, 3);
    m << 1, 2, 3,  //
        1, 2, 3,   //
        3, 2, 1,   //
        1, 2, 4,   //
        2, 2, 2;
    Diagnostics diag;
    const DistanceMatrix d = book_dissimilarity(SparseMatrix::from_dense(m), 1, &diag);
    CHECK(d(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(d(0, 2) == doctest::Approx(2.0));
    // r((1,2,3), (1,2,4)) = 3 / sqrt(2 * 14/3) = 0.981981
    CHECK(d(0, 3) == doctest::Approx(1.0 - 3.0 / std::sqrt(2.0 * 14.0 / 3.0)).epsilon(1e-12));
    CHECK(d(0, 3) == doctest::Approx(0.0180194).epsilon(1e-5));
    CHECK(d(4, 0) == 1.0);
    CHECK(d(4, 4) == 0.0);
    CHECK_FALSE(diag.warnings.empty());
    const DistanceMatrix parallel = book_dissimilarity(SparseMatrix::from_dense(m), 4);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(parallel(i, j) == d(i, j));
        }
    }
}

TEST_CASE("OPTICS degenerate inputs") {
    const DistanceMatrix few = euclidean({{0, 0}, {1, 0}, {0, 1}});
    const auto ord = optics(few, {5});
    for (const double r : ord.reachability) {
        CHECK(r == kUndefined);
    }
    CHECK(extract_clusters(ord, 10.0).noise_count() == 3);

    const DistanceMatrix same = euclidean(Points(8, {1.0, 1.0}));
    const auto flat = optics(same, {3});
    for (const double c : flat.core_distance) {
        CHECK(c == 0.0);
    }
    const auto one = extract_clusters(flat, 0.5);
    CHECK(one.k == 1);
    CHECK(one.noise_count() == 0);
    CHECK_THROWS_AS(optics(same, {1}), std::invalid_argument);
}

TEST_CASE("OPTICS separates two far blobs") {
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const Points pts = blobs(rng, {{0, 0}, {20, 0}}, 20, 0.5);
        const auto ord = optics(euclidean(pts), {5});
        CHECK(ord.reachability[0] == kUndefined);
        CHECK(ord.order.size() == pts.size());
        // one blob is visited completely before the other
        std::size_t switches = 0;
        for (std::size_t i = 1; i < ord.order.size(); ++i) {
            switches += (ord.order[i] < 20) != (ord.order[i - 1] < 20) ? 1 : 0;
        }
        CHECK(switches == 1);

        const auto clusters = extract_clusters(ord, 5.0);
        CHECK(clusters.k == 2);
        std::vector<int> planted(40);
        for (std::size_t i = 0; i < 40; ++i) {
            planted[i] = i < 20 ? 0 : 1;
        }
        CHECK(same_partition(clusters.assignment, planted));
        CHECK(extract_clusters(ord, 1e3).k == 1);
    }
}

TEST_CASE("cut segments never grow once every core distance is below the cut") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const Points pts = blobs(rng, {{0, 0}, {6, 0}, {0, 9}}, 15, 1.0);
        const auto ord = optics(euclidean(pts), {4});
        double floor = 0.0;
        for (const double c : ord.core_distance) {
            floor = std::max(floor, c);
        }
        std::size_t previous = count_cut_segments(ord, floor);
        for (double eps = floor; eps < floor + 20.0; eps += 0.1) {
            const std::size_t now = count_cut_segments(ord, eps);
            CHECK(now <= previous);
            previous = now;
        }
        for (const double eps : {0.2, 1.0, 3.0}) {
            const auto c = extract_clusters(ord, eps);
            for (std::size_t i = 0; i < c.assignment.size(); ++i) {
                CHECK(c.assignment[i] >= kNoise);
                CHECK(c.assignment[i] < static_cast<int>(c.k));
            }
        }
    }
}

TEST_CASE("knee and reachability export") {
    Rng rng(5);
    const Points pts = blobs(rng, {{0, 0}, {30, 30}}, 12, 0.3);
    auto ord = optics(euclidean(pts), {4});
    const double eps = knee_eps(ord);
    CHECK(std::isfinite(eps));
    CHECK(extract_clusters(ord, eps).k == 2);
    ord.labels = std::vector<std::string>(pts.size(), "x");
    std::ostringstream out;
    write_reachability(out, ord);
    CHECK(out.str().find("undefined") != std::string::npos);
}

TEST_CASE("PAM hand cases") {
    Rng rng(3);
    const Points pts = blobs(rng, {{0, 0}, {10, 10}}, 3, 0.2);
    const DistanceMatrix d = euclidean(pts);

    const auto all = pam(d, 6);
    CHECK(all.cost == 0.0);
    CHECK(all.clusters.medoids.size() == 6);

    const auto one = pam(d, 1);
    double best = 1e300;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < 6; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 6; ++j) {
            s += d(i, j);
        }
        if (s < best) {
            best = s;
            best_i = i;
        }
    }
    CHECK(one.clusters.medoids == std::vector<std::size_t>{best_i});

    const auto two = pam(d, 2);
    CHECK(same_partition(two.clusters.assignment, {0, 0, 0, 1, 1, 1}));
    CHECK(two.cost == doctest::Approx(oracle::exhaustive_medoids(as_table(d), 2).cost).epsilon(1e-12));
    CHECK_THROWS_AS(pam(d, 7), std::invalid_argument);
    CHECK_THROWS_AS(pam(d, 0), std::invalid_argument);
}

TEST_CASE("PAM matches exhaustive search on separated 6-point instances") {
    Rng rng(100);
    for (int trial = 0; trial < 200; ++trial) {
        const double gap = rng.uniform(5, 50);
        const Points pts = blobs(rng, {{0, 0}, {gap, rng.uniform(-gap, gap)}}, 3, rng.uniform(0.1, 1.0));
        const DistanceMatrix d = euclidean(pts);
        const auto result = pam(d, 2);
        const auto best = oracle::exhaustive_medoids(as_table(d), 2);
        CHECK(result.cost == doctest::Approx(best.cost).epsilon(1e-12));
        CHECK(same_partition(result.clusters.assignment, {0, 0, 0, 1, 1, 1}));
    }
}

TEST_CASE("PAM ends at a swap-stable configuration") {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        Points pts(6);
        for (auto& p : pts) {
            p = {rng.uniform(0, 10), rng.uniform(0, 10)};
        }
        const DistanceMatrix d = euclidean(pts);
        for (std::size_t k = 1; k <= 6; ++k) {
            const auto result = pam(d, k);
            const auto& medoids = result.clusters.medoids;
            CHECK(result.cost >= oracle::exhaustive_medoids(as_table(d), k).cost - 1e-12);
            for (std::size_t i = 1; i < result.cost_trace.size(); ++i) {
                CHECK(result.cost_trace[i] < result.cost_trace[i - 1]);
            }
            CHECK(result.cost == doctest::Approx(medoid_cost(d, medoids)));
            for (std::size_t c = 0; c < k; ++c) {
                CHECK(result.clusters.assignment[medoids[c]] == static_cast<int>(c));
            }
            for (std::size_t c = 0; c < k; ++c) {
                for (std::size_t h = 0; h < 6; ++h) {
                    if (std::find(medoids.begin(), medoids.end(), h) != medoids.end()) {
                        continue;
                    }
                    auto swapped = medoids;
                    swapped[c] = h;
                    CHECK(medoid_cost(d, swapped) >= result.cost - 1e-12);
                }
            }
        }
    }
}

TEST_CASE("PAM is invariant to input order") {
    Rng rng(44);
    for (int trial = 0; trial < 10; ++trial) {
        const Points pts = blobs(rng, {{0, 0}, {5, 1}, {2, 6}}, 8, 1.0);
        std::vector<std::size_t> perm(pts.size());
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(std::span<std::size_t>(perm));
        Points shuffled(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            shuffled[i] = pts[perm[i]];
        }
        const auto a = pam(euclidean(pts), 3);
        const auto b = pam(euclidean(shuffled), 3);
        std::vector<int> b_in_original(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            b_in_original[perm[i]] = b.clusters.assignment[i];
        }
        CHECK(same_partition(a.clusters.assignment, b_in_original));
        CHECK(a.cost == doctest::Approx(b.cost).epsilon(1e-12));
    }
}

TEST_CASE("silhouette widths") {
    DistanceMatrix d(4);
    d.set(0, 1, 1);
    d.set(2, 3, 1);
    for (const std::size_t i : {0, 1}) {
        for (const std::size_t j : {2, 3}) {
            d.set(i, j, 10);
        }
    }
    ClusterResult pairs;
    pairs.items = {"a", "b", "c", "d"};
    pairs.assignment = {0, 0, 1, 1};
    pairs.k = 2;
    const auto report = silhouette(pairs, d);
    for (const double s : report.widths) {
        CHECK(s == doctest::Approx(0.9));
    }

    // a(i) = b(i) gives 0
    DistanceMatrix flat(4);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            flat.set(i, j, 1);
        }
    }
    for (const double s : silhouette(pairs, flat).widths) {
        CHECK(s == doctest::Approx(0.0));
    }

    ClusterResult single_member = pairs;
    single_member.assignment = {0, 1, 1, 1};
    CHECK(silhouette(single_member, d).widths[0] == 0.0);

    ClusterResult one = pairs;
    one.assignment = {0, 0, 0, 0};
    one.k = 1;
    Diagnostics diag;
    for (const double s : silhouette(one, d, &diag).widths) {
        CHECK(s == 0.0);
    }
    CHECK_FALSE(diag.warnings.empty());
}

TEST_CASE("silhouettes are bounded and high on separated blobs") {
    Rng rng(6);
    const Points pts = blobs(rng, {{0, 0}, {40, 0}}, 15, 1.0);
    const DistanceMatrix d = euclidean(pts);
    const auto result = pam(d, 2);
    const auto report = silhouette(result.clusters, d);
    CHECK(report.mean > 0.8);
    for (std::size_t k = 2; k <= 6; ++k) {
        for (const double s : silhouette(pam(d, k).clusters, d).widths) {
            CHECK(s >= -1.0);
            CHECK(s <= 1.0);
        }
    }
}

TEST_CASE("select_k") {
    Rng rng(9);
    const Points pts = blobs(rng, {{0, 0}, {30, 0}, {0, 30}, {30, 30}, {60, 0}, {60, 30}}, 10, 1.0);
    const auto sel = select_k(euclidean(pts), 2, 12);
    CHECK(sel.k == 6);
    CHECK(sel.table.size() == 11);

    const Points four = {{0, 0}, {3, 1}, {7, 2}, {1, 9}};
    CHECK(select_k(euclidean(four), 4, 30).k == 4);
    CHECK_THROWS_AS(select_k(euclidean(four), 5, 30), std::invalid_argument);
}

TEST_CASE("cluster files and overrides") {
    ClusterResult c;
    c.items = {"a", "b", "c", "d"};
    c.assignment = {0, kNoise, 1, 0};
    c.k = 2;
    c.names = {"fantasy", "crime"};
    std::stringstream s;
    write_clusters(s, c);
    const ClusterResult back = read_clusters(s, "mem");
    CHECK(back.items == c.items);
    CHECK(back.noise_count() == 1);
    CHECK(back.name_of(static_cast<std::size_t>(back.assignment[0])) == "fantasy");

    std::istringstream overrides_in("item,cluster_label\nb,crime\nd,NOISE\nzz,fantasy\n");
    const ClusterResult overrides = read_clusters(overrides_in, "mem");
    Diagnostics diag;
    const ClusterResult fixed = apply_overrides(c, overrides, &diag);
    CHECK(fixed.assignment[3] == kNoise);
    CHECK(fixed.name_of(static_cast<std::size_t>(fixed.assignment[1])) == "crime");
    CHECK(diag.warnings.size() == 1);
}
