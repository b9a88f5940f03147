#pragma once

#include "tagprof/diagnostics.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tagprof {

/// Big Five dimensions in the order used by every trait array in the library.
enum class Trait : std::size_t { extraversion = 0, agreeableness, openness, neuroticism, conscientiousness };

inline constexpr std::size_t kTraitCount = 5;
inline constexpr std::array<Trait, kTraitCount> kAllTraits{
    Trait::extraversion, Trait::agreeableness, Trait::openness, Trait::neuroticism, Trait::conscientiousness};

using TraitScores = std::array<double, kTraitCount>;

std::string_view trait_name(Trait trait) noexcept;
/// Throws std::invalid_argument for unknown names.
Trait trait_from_name(std::string_view name);

inline double& at(TraitScores& scores, Trait trait) { return scores[static_cast<std::size_t>(trait)]; }
inline double at(const TraitScores& scores, Trait trait) { return scores[static_cast<std::size_t>(trait)]; }

struct TagApplication {
    std::string book_id;
    std::string tag;
    long long count = 0;

    friend bool operator==(const TagApplication&, const TagApplication&) = default;
};

struct UserRecord {
    std::string user_id;
    TraitScores traits{};
    std::vector<std::string> liked_pages;  // sorted, unique

    friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

struct TraitBounds {
    double lower = 1.0;
    double upper = 5.0;
};

struct FilterPolicy {
    long long min_per_book = 3;
    long long min_total = 50;
    long long min_books = 15;
    long long min_chars = 3;
    long long min_letters = 1;
    long long max_nonenglish = 2;
    long long min_page_likers = 50;

    /// Throws std::invalid_argument if any threshold is negative.
    void validate() const;
};

/// Books, tags and users after loading. All lists are kept in canonical
/// (sorted) order so that serialization is byte-stable.
struct TagCorpus {
    std::vector<std::string> books;
    std::vector<std::string> tags;
    std::vector<TagApplication> applications;  // sorted by (book_id, tag)
    std::map<std::string, std::vector<std::string>> page_books;
    std::vector<UserRecord> users;  // sorted by user_id

    friend bool operator==(const TagCorpus&, const TagCorpus&) = default;
};

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CorpusPaths {
    std::filesystem::path applications;
    std::filesystem::path pages;  // optional
    std::filesystem::path users;  // optional
};

struct LoadOptions {
    TraitBounds bounds;
};

/// Lowercases ASCII letters, trims, and joins internal whitespace runs with '-'.
std::string normalize_tag(std::string_view raw);

/// Parses the three input files and enforces referential integrity.
/// Duplicate (book, tag) rows are merged by summing counts, with a warning.
/// Throws ParseError for malformed rows and CorpusError for dangling references.
TagCorpus load_corpus(const CorpusPaths& paths, const LoadOptions& options = {}, Diagnostics* diag = nullptr);

/// Stream-based variants; `source` names the input in error messages.
void read_applications(std::istream& in, const std::string& source, TagCorpus& corpus, Diagnostics* diag);
void read_pages(std::istream& in, const std::string& source, TagCorpus& corpus);
void read_users(std::istream& in, const std::string& source, TagCorpus& corpus, const TraitBounds& bounds);

/// Re-derives books/tags lists from applications and pages, sorts everything,
/// and checks referential integrity. Throws CorpusError on violations.
void canonicalize(TagCorpus& corpus);

void write_applications(std::ostream& out, const TagCorpus& corpus);
void write_pages(std::ostream& out, const TagCorpus& corpus);
void write_users(std::ostream& out, const TagCorpus& corpus);
void save_corpus(const TagCorpus& corpus, const CorpusPaths& paths);

/// Character rule on tags: length, letter count, and count of characters
/// outside [A-Za-z0-9-_'] (counted per UTF-8 code point).
bool passes_character_rules(std::string_view tag, const FilterPolicy& policy);

/// Removes, in this fixed order: (a) per-book applications below
/// min_per_book; (b) tags whose surviving total count or book count falls
/// below min_total / min_books; (c) tags failing the character rules.
/// Books, pages and users are left untouched.
TagCorpus filter_tags(const TagCorpus& corpus, const FilterPolicy& policy);

/// Median with the even-count convention (mean of the two middle values).
/// Throws std::invalid_argument on empty input.
double median(std::vector<double> values);

using PageTraits = std::map<std::string, TraitScores>;

/// Median trait scores over each page's likers; pages with fewer than
/// policy.min_page_likers likers are excluded.
PageTraits aggregate_page_traits(const TagCorpus& corpus, const FilterPolicy& policy);

/// `page_id,extraversion,agreeableness,openness,neuroticism,conscientiousness`
void write_page_traits(std::ostream& out, const PageTraits& traits);
PageTraits read_page_traits(std::istream& in, const std::string& source);

}  // namespace tagprof
