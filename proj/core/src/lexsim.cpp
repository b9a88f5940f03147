#include "tagprof/lexsim.hpp"

#include "tagprof/csv.hpp"
#include "tagprof/matrix.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace tagprof {

namespace {

enum class CharClass { separator, digit, other };

CharClass classify(char ch) {
    if (ch == '-' || ch == '_' || ch == '\'') {
        return CharClass::separator;
    }
    const auto c = static_cast<unsigned char>(ch);
    if (c >= '0' && c <= '9') {
        return CharClass::digit;
    }
    return CharClass::other;
}

}  // namespace

LemmaRules LemmaRules::english() {
    LemmaRules r;
    // Identity rules shield endings that the generic "s" rule would mangle.
    r.rules = {
        {"ss", "ss", 1},         {"us", "us", 1},         {"is", "is", 1},
        {"ovies", "ovie", 0},    {"ookies", "ookie", 0},  {"ombies", "ombie", 0},
        {"sses", "ss", 1},       {"ies", "y", 3},         {"ves", "f", 3},
        {"xes", "x", 2},         {"ches", "ch", 2},       {"shes", "sh", 2},
        {"s", "", 2},
    };
    r.exceptions = {"series", "species", "news", "physics", "mathematics", "economics", "politics", "ethics"};
    return r;
}

LemmaRules LemmaRules::parse(std::istream& in, const std::string& source) {
    LemmaRules r;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto text = csv::trim(line);
        if (text.empty()) {
            continue;
        }
        if (text.front() == '!') {
            const auto word = csv::trim(text.substr(1));
            if (word.empty()) {
                throw ParseError(source, line_no, "empty exception word");
            }
            r.exceptions.emplace(word);
            continue;
        }
        const auto arrow = text.find("=>");
        if (arrow == std::string_view::npos) {
            throw ParseError(source, line_no, "expected suffix=>replacement");
        }
        SuffixRule rule;
        rule.suffix = std::string(csv::trim(text.substr(0, arrow)));
        std::istringstream rest{std::string(text.substr(arrow + 2))};
        std::string replacement;
        std::string min_stem;
        rest >> replacement >> min_stem;
        rule.replacement = replacement;
        if (!min_stem.empty()) {
            try {
                const auto v = csv::parse_integer(min_stem);
                if (v < 0) {
                    throw std::invalid_argument("negative minimum stem");
                }
                rule.min_stem = static_cast<std::size_t>(v);
            } catch (const std::invalid_argument& e) {
                throw ParseError(source, line_no, e.what());
            }
        }
        if (rule.suffix.empty()) {
            throw ParseError(source, line_no, "empty suffix");
        }
        r.rules.push_back(std::move(rule));
    }
    return r;
}

LemmaRules LemmaRules::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return parse(in, path.string());
}

std::vector<std::string> tokenize_tag(std::string_view tag) {
    std::vector<std::string> words;
    std::string current;
    CharClass current_class = CharClass::separator;
    for (const char ch : tag) {
        const CharClass cls = classify(ch);
        if (cls == CharClass::separator || (cls != current_class && !current.empty())) {
            if (!current.empty()) {
                words.push_back(std::move(current));
                current.clear();
            }
        }
        if (cls != CharClass::separator) {
            const auto c = static_cast<unsigned char>(ch);
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
        }
        current_class = cls;
    }
    if (!current.empty()) {
        words.push_back(std::move(current));
    }
    return words;
}

std::string lemmatize(std::string_view word, const LemmaRules& rules) {
    if (rules.exceptions.contains(std::string(word))) {
        return std::string(word);
    }
    for (const auto& rule : rules.rules) {
        if (word.size() >= rule.suffix.size() + rule.min_stem && word.ends_with(rule.suffix)) {
            std::string out(word.substr(0, word.size() - rule.suffix.size()));
            out += rule.replacement;
            return out;
        }
    }
    return std::string(word);
}

LexicalSimilarity lexical_similarity_matrix(const std::vector<std::string>& tags, const LemmaRules& rules,
                                            Eigen::Index rank, std::uint64_t seed, Diagnostics* diag) {
    // Vocabulary is sorted so that the factorization is independent of tag order.
    std::vector<std::vector<std::string>> lemmas(tags.size());
    std::map<std::string, std::size_t> vocabulary;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        for (const auto& word : tokenize_tag(tags[i])) {
            lemmas[i].push_back(lemmatize(word, rules));
            vocabulary.emplace(lemmas[i].back(), 0);
        }
    }
    std::vector<std::string> vocab_labels;
    for (auto& [lemma, index] : vocabulary) {
        index = vocab_labels.size();
        vocab_labels.push_back(lemma);
    }

    LexicalSimilarity out;
    std::vector<Triplet> triplets;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (lemmas[i].empty()) {
            out.zero_lemma_tags.push_back(tags[i]);
            warn(diag, "tag '" + tags[i] + "' has no lemmas; lexical similarity 0");
        }
        for (const auto& lemma : lemmas[i]) {
            triplets.push_back({i, vocabulary.at(lemma), 1.0});
        }
    }
    const auto counts = SparseMatrix::from_triplets(tags, vocab_labels, std::move(triplets));
    out.tag_lemma_tfidf = tfidf(counts);

    const auto max_rank = static_cast<Eigen::Index>(std::min(out.tag_lemma_tfidf.rows(), out.tag_lemma_tfidf.cols()));
    if (max_rank == 0) {
        out.lookup = CosineLookup(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tags.size()), 1), tags);
        return out;
    }
    Eigen::Index effective = rank > 0 ? rank : std::min<Eigen::Index>(50, static_cast<Eigen::Index>(vocab_labels.size()));
    effective = std::clamp<Eigen::Index>(effective, 1, max_rank);
    const auto factors = truncated_svd(out.tag_lemma_tfidf, effective, seed);
    out.lookup = CosineLookup(factors.weighted_rows(), tags);
    return out;
}

double fuse_similarity(double s_co, double s_lex, double w) {
    if (!(w >= 0.0 && w <= 1.0)) {
        throw std::invalid_argument("fusion weight must lie in [0, 1]");
    }
    return w * s_co + (1.0 - w) * s_lex;
}

}  // namespace tagprof
