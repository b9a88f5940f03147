#pragma once

#include "tagprof/diagnostics.hpp"
#include "tagprof/lowrank.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tagprof {

struct SuffixRule {
    std::string suffix;
    std::string replacement;
    /// Characters that must remain before the suffix for the rule to match.
    std::size_t min_stem = 2;
};

/// Ordered suffix rewrites; the first matching rule wins. Words in
/// `exceptions` are returned unchanged.
struct LemmaRules {
    std::vector<SuffixRule> rules;
    std::set<std::string> exceptions;

    /// English plural rules suitable for tag vocabularies.
    static LemmaRules english();

    /// One rule per line as `suffix=>replacement` with an optional
    /// whitespace-separated minimum stem length; `!word` adds an exception;
    /// `#` starts a comment. Throws ParseError on malformed lines.
    static LemmaRules parse(std::istream& in, const std::string& source);
    static LemmaRules load(const std::filesystem::path& path);
};

/// Splits a normalized tag on '-', '_', '\'' and letter/digit boundaries.
std::vector<std::string> tokenize_tag(std::string_view tag);

std::string lemmatize(std::string_view word, const LemmaRules& rules);

struct LexicalSimilarity {
    CosineLookup lookup;
    SparseMatrix tag_lemma_tfidf;
    std::vector<std::string> zero_lemma_tags;
};

/// Tag-by-lemma counts, tf-idf weighted with tags as documents, reduced to
/// rank `rank` (0 selects min(50, vocabulary size)), then cosine similarity
/// between tag rows. Tags without lemmas have similarity 0 to everything.
LexicalSimilarity lexical_similarity_matrix(const std::vector<std::string>& tags, const LemmaRules& rules,
                                            Eigen::Index rank, std::uint64_t seed, Diagnostics* diag = nullptr);

/// w * s_co + (1 - w) * s_lex. Throws std::invalid_argument unless w in [0, 1].
double fuse_similarity(double s_co, double s_lex, double w = 0.95);

}  // namespace tagprof
