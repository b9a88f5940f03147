#include "tagprof/synth.hpp"

#include "tagprof/cluster_result.hpp"
#include "tagprof/matrix.hpp"
#include "tagprof/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <map>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

namespace tagprof {

namespace {

std::string padded(char prefix, std::size_t index, std::size_t count) {
    const std::size_t width = std::to_string(count > 0 ? count - 1 : 0).size();
    std::string digits = std::to_string(index);
    return std::string(1, prefix) + std::string(width - std::min(width, digits.size()), '0') + digits;
}

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw std::invalid_argument("synth settings: " + what);
    }
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

/// Range [first, last) of tag indices owned by genre g.
std::pair<std::size_t, std::size_t> group_range(std::size_t g, std::size_t n_tags, std::size_t n_genres) {
    return {g * n_tags / n_genres, (g + 1) * n_tags / n_genres};
}

/// Standardized consolidated page feature of each planted group, computed with
/// the same chain the pipeline applies.
std::vector<std::vector<double>> planted_features(const SynthResult& truth, const SynthSpec& spec,
                                                  const std::vector<std::string>& pages) {
    const TagCorpus filtered = filter_tags(truth.corpus, FilterPolicy{});
    const SparseMatrix weights = tfidf(build_count_matrix(filtered));
    std::vector<bool> present(truth.groups.size(), false);
    ClusterResult clusters;
    clusters.items = weights.col_labels();
    clusters.assignment.assign(clusters.items.size(), kNoise);
    std::map<std::string, std::size_t> column_of;
    for (std::size_t c = 0; c < clusters.items.size(); ++c) {
        column_of.emplace(clusters.items[c], c);
    }
    std::vector<std::size_t> cluster_of_group(truth.groups.size(), 0);
    for (std::size_t g = 0; g < truth.groups.size(); ++g) {
        for (const auto& tag : truth.groups[g]) {
            if (column_of.contains(tag)) {
                present[g] = true;
            }
        }
        if (present[g]) {
            cluster_of_group[g] = clusters.k++;
            for (const auto& tag : truth.groups[g]) {
                if (auto it = column_of.find(tag); it != column_of.end()) {
                    clusters.assignment[it->second] = static_cast<int>(cluster_of_group[g]);
                }
            }
        }
    }
    for (const auto& effect : spec.planted) {
        require(present[effect.group],
                "planted group " + std::to_string(effect.group) + " loses every tag to filtering");
    }
    const SparseMatrix page_rows =
        consolidate_pages(normalize_rows(consolidate_tag_clusters(weights, clusters)).matrix, filtered.page_books);

    std::map<std::string, std::size_t> row_of;
    for (std::size_t r = 0; r < page_rows.rows(); ++r) {
        row_of.emplace(page_rows.row_labels()[r], r);
    }
    std::vector<std::vector<double>> out;
    for (const auto& effect : spec.planted) {
        const std::size_t col = cluster_of_group[effect.group];
        std::vector<double> x(pages.size(), 0.0);
        for (std::size_t p = 0; p < pages.size(); ++p) {
            if (auto it = row_of.find(pages[p]); it != row_of.end()) {
                x[p] = page_rows.at(it->second, col);
            }
        }
        const double n = static_cast<double>(x.size());
        const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
        double var = 0.0;
        for (const double v : x) {
            var += (v - mean) * (v - mean);
        }
        const double sd = std::sqrt(var / n);
        require(sd > 0.0, "planted group " + std::to_string(effect.group) + " has a constant page feature");
        for (double& v : x) {
            v = (v - mean) / sd;
        }
        out.push_back(std::move(x));
    }
    return out;
}

}  // namespace

void SynthSpec::validate() const {
    require(n_genres >= 1, "n_genres must be at least 1");
    require(n_tags >= n_genres, "n_genres exceeds n_tags");
    require(n_books >= n_genres, "n_genres exceeds n_books");
    require(n_pages >= 1 && n_pages <= n_books, "n_pages must be in [1, n_books]");
    require(n_users >= 1, "n_users must be at least 1");
    require(is_probability(genre_tag_rate) && is_probability(crossover_rate) && is_probability(second_book_rate),
            "rates must lie in [0, 1]");
    require(genre_count_mean >= 3.0, "genre_count_mean must be at least 3");
    require(noise_per_book >= 0.0, "noise_per_book must be nonnegative");
    require(trait_sd > 0.0 && target_sd >= 0.0 && like_tau > 0.0 && likes_sd >= 0.0, "spreads must be positive");
    require(bounds.lower < bounds.upper, "trait bounds are empty");
    require(likes_mean >= 1.0, "likes_mean must be at least 1");
    std::vector<bool> used(kTraitCount, false);
    for (const auto& e : planted) {
        require(e.group < n_genres, "planted group out of range");
        require(std::abs(e.rho) < 1.0, "planted |rho| must be below 1");
        require(!used[static_cast<std::size_t>(e.trait)], "two planted effects share a trait");
        used[static_cast<std::size_t>(e.trait)] = true;
    }
    if (disposition) {
        require(std::abs(disposition->rho) < 1.0, "disposition |rho| must be below 1");
    }
}

std::string synthetic_tag_name(std::size_t index) {
    static constexpr std::array<std::string_view, 16> kSyllables{"ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo",
                                                                 "ba", "de", "fi", "go", "hu", "ja", "ke", "lu"};
    std::string name;
    std::size_t rest = index;
    for (int i = 0; i < 3 || rest > 0; ++i) {
        name.insert(0, kSyllables[rest % kSyllables.size()]);
        rest /= kSyllables.size();
    }
    return name;
}

SynthResult generate_with_truth(const SynthSpec& spec) {
    spec.validate();
    const Rng master(spec.seed);
    SynthResult result;
    TagCorpus& corpus = result.corpus;

    // vocabulary
    std::vector<std::string> vocabulary(spec.n_tags);
    for (std::size_t t = 0; t < spec.n_tags; ++t) {
        vocabulary[t] = synthetic_tag_name(t);
    }
    for (std::size_t j = 0; j < spec.noise_tags; ++j) {
        result.noise_vocabulary.push_back(synthetic_tag_name(spec.n_tags + j));
    }
    result.groups.resize(spec.n_genres);
    for (std::size_t g = 0; g < spec.n_genres; ++g) {
        const auto [first, last] = group_range(g, spec.n_tags, spec.n_genres);
        result.groups[g].assign(vocabulary.begin() + static_cast<std::ptrdiff_t>(first),
                                vocabulary.begin() + static_cast<std::ptrdiff_t>(last));
    }

    // books and their tag applications
    std::vector<std::string> books(spec.n_books);
    std::vector<std::vector<std::size_t>> genre_books(spec.n_genres);
    for (std::size_t b = 0; b < spec.n_books; ++b) {
        books[b] = padded('b', b, spec.n_books);
        genre_books[b % spec.n_genres].push_back(b);
    }
    for (std::size_t b = 0; b < spec.n_books; ++b) {
        Rng rng = master.split(1).split(b);
        const std::size_t genre = b % spec.n_genres;
        const auto [first, last] = group_range(genre, spec.n_tags, spec.n_genres);
        for (std::size_t t = 0; t < spec.n_tags; ++t) {
            const bool own = t >= first && t < last;
            const double u = rng.uniform();
            if (own ? u < spec.genre_tag_rate : u < spec.crossover_rate) {
                const auto count = 3 + static_cast<long long>(rng.poisson(spec.genre_count_mean - 3.0));
                corpus.applications.push_back({books[b], vocabulary[t], count});
            }
        }
        if (!result.noise_vocabulary.empty()) {
            const auto extra = rng.poisson(spec.noise_per_book);
            std::set<std::size_t> chosen;
            for (std::uint64_t i = 0; i < extra; ++i) {
                chosen.insert(static_cast<std::size_t>(rng.below(result.noise_vocabulary.size())));
            }
            for (const std::size_t j : chosen) {
                corpus.applications.push_back(
                    {books[b], result.noise_vocabulary[j], 1 + static_cast<long long>(rng.below(2))});
            }
        }
    }

    // pages: page i refers to book i, sometimes also to a second book of the same genre
    std::vector<std::string> pages(spec.n_pages);
    for (std::size_t p = 0; p < spec.n_pages; ++p) {
        Rng rng = master.split(2).split(p);
        pages[p] = padded('p', p, spec.n_pages);
        auto& refs = corpus.page_books[pages[p]];
        refs.push_back(books[p]);
        const auto& peers = genre_books[p % spec.n_genres];
        if (peers.size() > 1 && rng.uniform() < spec.second_book_rate) {
            auto pick = static_cast<std::size_t>(rng.below(peers.size() - 1));
            if (pick >= p / spec.n_genres) {
                ++pick;  // skip the page's own book
            }
            refs.push_back(books[peers[pick]]);
        }
    }
    canonicalize(corpus);
    result.book_genre.resize(corpus.books.size());
    for (std::size_t b = 0; b < corpus.books.size(); ++b) {
        result.book_genre[b] = static_cast<std::size_t>(std::stoul(corpus.books[b].substr(1))) % spec.n_genres;
    }

    // per-page trait targets for planted effects
    const auto features = planted_features(result, spec, pages);
    std::vector<std::vector<double>> targets(spec.planted.size(), std::vector<double>(spec.n_pages));
    for (std::size_t e = 0; e < spec.planted.size(); ++e) {
        Rng rng = master.split(5).split(e);
        const double rho = spec.planted[e].rho;
        const double rest = std::sqrt(1.0 - rho * rho);
        for (std::size_t p = 0; p < spec.n_pages; ++p) {
            targets[e][p] = spec.trait_mean + spec.target_sd * (rho * features[e][p] + rest * rng.normal());
        }
    }

    // users
    const double inv_two_tau2 = 1.0 / (2.0 * spec.like_tau * spec.like_tau);
    std::vector<std::pair<double, std::size_t>> keys(spec.n_pages);
    for (std::size_t u = 0; u < spec.n_users; ++u) {
        UserRecord user;
        user.user_id = padded('u', u, spec.n_users);
        Rng trait_rng = master.split(3).split(u);
        for (double& score : user.traits) {
            const double raw = std::clamp(trait_rng.normal(spec.trait_mean, spec.trait_sd), spec.bounds.lower,
                                          spec.bounds.upper);
            score = std::round(raw * 100.0) / 100.0;
        }

        Rng count_rng = master.split(4).split(u);
        double drive = count_rng.normal();
        if (spec.disposition) {
            const double rho = spec.disposition->rho;
            const double z = (at(user.traits, spec.disposition->trait) - spec.trait_mean) / spec.trait_sd;
            drive = rho * z + std::sqrt(1.0 - rho * rho) * drive;
        }
        const double wanted = std::round(spec.likes_mean + spec.likes_sd * drive);
        const auto n_likes =
            static_cast<std::size_t>(std::clamp(wanted, 1.0, static_cast<double>(spec.n_pages)));

        // Gumbel top-k: sampling without replacement proportional to the tilt weights
        Rng pick_rng = master.split(6).split(u);
        for (std::size_t p = 0; p < spec.n_pages; ++p) {
            double log_weight = 0.0;
            for (std::size_t e = 0; e < spec.planted.size(); ++e) {
                const double d = at(user.traits, spec.planted[e].trait) - targets[e][p];
                log_weight -= d * d * inv_two_tau2;
            }
            double v = pick_rng.uniform();
            while (v <= 0.0) {
                v = pick_rng.uniform();
            }
            keys[p] = {log_weight - std::log(-std::log(v)), p};
        }
        std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n_likes), keys.end(),
                          [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
        for (std::size_t i = 0; i < n_likes; ++i) {
            user.liked_pages.push_back(pages[keys[i].second]);
        }
        std::sort(user.liked_pages.begin(), user.liked_pages.end());
        corpus.users.push_back(std::move(user));
    }
    canonicalize(corpus);
    return result;
}

TagCorpus generate(const SynthSpec& spec) { return generate_with_truth(spec).corpus; }

void write_truth(std::ostream& out, const SynthResult& result) {
    nlohmann::ordered_json doc;
    nlohmann::ordered_json genres = nlohmann::ordered_json::object();
    for (std::size_t b = 0; b < result.corpus.books.size(); ++b) {
        genres[result.corpus.books[b]] = result.book_genre[b];
    }
    doc["book_genre"] = std::move(genres);
    doc["tag_groups"] = result.groups;
    doc["noise_vocabulary"] = result.noise_vocabulary;
    out << doc.dump(2) << '\n';
}

}  // namespace tagprof
