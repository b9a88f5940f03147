#pragma once

#include "tagprof/corpus.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tagprof {

/// Ties the trait medians of pages to the consolidated feature of one genre's
/// tag group with target correlation `rho`.
struct PlantedEffect {
    std::size_t group = 0;
    Trait trait = Trait::openness;
    double rho = 0.3;
};

/// Ties each user's number of liked pages to one of their trait scores.
struct DispositionEffect {
    Trait trait = Trait::openness;
    double rho = 0.12;
};

struct SynthSpec {
    std::size_t n_books = 600;
    std::size_t n_tags = 120;
    std::size_t n_users = 4000;
    std::size_t n_pages = 500;
    std::size_t n_genres = 6;
    std::vector<PlantedEffect> planted;
    std::optional<DispositionEffect> disposition;

    /// Probability that a genre book carries each tag of its own group.
    double genre_tag_rate = 0.85;
    /// Mean count of an in-genre application (at least 3).
    double genre_count_mean = 5.0;
    /// Probability that a book carries any given tag from another group.
    double crossover_rate = 0.01;
    /// Extra vocabulary applied only once or twice per book.
    std::size_t noise_tags = 40;
    double noise_per_book = 3.0;
    /// Probability that a page also refers to a second book of its genre.
    double second_book_rate = 0.2;

    double trait_mean = 3.0;
    double trait_sd = 0.6;
    TraitBounds bounds;
    double likes_mean = 25.0;
    double likes_sd = 8.0;
    /// Spread of each page's planted trait targets around trait_mean.
    double target_sd = 0.5;
    /// Width of the like-probability tilt toward a page's targets.
    double like_tau = 0.5;

    std::uint64_t seed = 1;

    /// Throws std::invalid_argument for infeasible or malformed specs.
    void validate() const;
};

struct SynthResult {
    TagCorpus corpus;
    std::vector<std::size_t> book_genre;          // parallel to corpus.books
    std::vector<std::vector<std::string>> groups;  // genre tag groups
    std::vector<std::string> noise_vocabulary;
};

/// Deterministic per spec.seed; single-threaded.
SynthResult generate_with_truth(const SynthSpec& spec);
TagCorpus generate(const SynthSpec& spec);

/// Pseudo-word tag name for a vocabulary index; distinct indices give distinct names.
std::string synthetic_tag_name(std::size_t index);

/// JSON description of the planted genres: book -> genre and group -> tags.
void write_truth(std::ostream& out, const SynthResult& result);

}  // namespace tagprof
