#include "tagprof/corpus.hpp"

#include "tagprof/csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <unordered_map>

namespace tagprof {

namespace {

constexpr std::array<std::string_view, kTraitCount> kTraitNames{
    "extraversion", "agreeableness", "openness", "neuroticism", "conscientiousness"};

bool is_blank(std::string_view line) {
    return csv::trim(line).empty();
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CorpusError("cannot open " + path.string());
    }
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw CorpusError("cannot write " + path.string());
    }
    return out;
}

bool is_ascii_letter(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_english_char(unsigned char c) {
    return is_ascii_letter(c) || (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '\'';
}

}  // namespace

std::string_view trait_name(Trait trait) noexcept {
    return kTraitNames[static_cast<std::size_t>(trait)];
}

Trait trait_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kTraitCount; ++i) {
        if (kTraitNames[i] == name) {
            return static_cast<Trait>(i);
        }
    }
    throw std::invalid_argument("unknown trait '" + std::string(name) + "'");
}

void FilterPolicy::validate() const {
    for (const long long v : {min_per_book, min_total, min_books, min_chars, min_letters, max_nonenglish,
                              min_page_likers}) {
        if (v < 0) {
            throw std::invalid_argument("filter thresholds must be non-negative");
        }
    }
}

std::string normalize_tag(std::string_view raw) {
    raw = csv::trim(raw);
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (const char ch : raw) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c) != 0) {
            pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back('-');
            pending_space = false;
        }
        out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
    return out;
}

void read_applications(std::istream& in, const std::string& source, TagCorpus& corpus, Diagnostics* diag) {
    std::map<std::pair<std::string, std::string>, long long> merged;
    for (const auto& app : corpus.applications) {
        merged[{app.book_id, app.tag}] += app.count;
    }

    std::string line;
    std::vector<std::string> fields;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) {
            continue;
        }
        if (!csv::split_line(line, fields)) {
            throw ParseError(source, line_no, "unterminated quoted field");
        }
        if (line_no == 1 && fields.size() == 3 && csv::trim(fields[0]) == "book_id" &&
            csv::trim(fields[1]) == "tag" && csv::trim(fields[2]) == "count") {
            continue;
        }
        if (fields.size() != 3) {
            throw ParseError(source, line_no, "expected 3 fields (book_id,tag,count), got " +
                                                  std::to_string(fields.size()));
        }
        std::string book(csv::trim(fields[0]));
        std::string tag = normalize_tag(fields[1]);
        if (book.empty()) {
            throw ParseError(source, line_no, "empty book_id");
        }
        if (tag.empty()) {
            throw ParseError(source, line_no, "empty tag");
        }
        long long count = 0;
        try {
            count = csv::parse_integer(fields[2]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, e.what());
        }
        if (count < 1) {
            throw ParseError(source, line_no, "count must be >= 1");
        }
        auto [it, inserted] = merged.try_emplace({book, tag}, 0);
        if (!inserted) {
            warn(diag, source + ":" + std::to_string(line_no) + ": duplicate (" + book + ", " + tag +
                           "); counts summed");
        }
        it->second += count;
    }

    corpus.applications.clear();
    corpus.applications.reserve(merged.size());
    for (auto& [key, count] : merged) {
        corpus.applications.push_back({key.first, key.second, count});
    }
}

void read_pages(std::istream& in, const std::string& source, TagCorpus& corpus) {
    std::string line;
    std::vector<std::string> fields;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) {
            continue;
        }
        if (!csv::split_line(line, fields)) {
            throw ParseError(source, line_no, "unterminated quoted field");
        }
        if (line_no == 1 && fields.size() == 2 && csv::trim(fields[0]) == "page_id" &&
            csv::trim(fields[1]) == "book_id") {
            continue;
        }
        if (fields.size() != 2) {
            throw ParseError(source, line_no, "expected 2 fields (page_id,book_id), got " +
                                                  std::to_string(fields.size()));
        }
        std::string page(csv::trim(fields[0]));
        std::string book(csv::trim(fields[1]));
        if (page.empty() || book.empty()) {
            throw ParseError(source, line_no, "empty page_id or book_id");
        }
        corpus.page_books[page].push_back(std::move(book));
    }
}

void read_users(std::istream& in, const std::string& source, TagCorpus& corpus, const TraitBounds& bounds) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) {
            continue;
        }
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) {
            throw ParseError(source, line_no, "expected a JSON object");
        }
        UserRecord user;
        const auto id = obj.find("user_id");
        if (id == obj.end() || !(id->is_string() || id->is_number_integer())) {
            throw ParseError(source, line_no, "missing or invalid user_id");
        }
        user.user_id = id->is_string() ? id->get<std::string>() : std::to_string(id->get<long long>());
        for (const Trait trait : kAllTraits) {
            const auto name = std::string(trait_name(trait));
            const auto value = obj.find(name);
            if (value == obj.end() || !value->is_number()) {
                throw ParseError(source, line_no, "missing or non-numeric trait '" + name + "'");
            }
            const double score = value->get<double>();
            if (!(score >= bounds.lower && score <= bounds.upper)) {
                throw ParseError(source, line_no, "trait '" + name + "' out of bounds");
            }
            at(user.traits, trait) = score;
        }
        const auto liked = obj.find("liked_pages");
        if (liked == obj.end() || !liked->is_array()) {
            throw ParseError(source, line_no, "missing liked_pages array");
        }
        for (const auto& page : *liked) {
            if (page.is_string()) {
                user.liked_pages.push_back(page.get<std::string>());
            } else if (page.is_number_integer()) {
                user.liked_pages.push_back(std::to_string(page.get<long long>()));
            } else {
                throw ParseError(source, line_no, "liked_pages entries must be strings or integers");
            }
        }
        corpus.users.push_back(std::move(user));
    }
}

void canonicalize(TagCorpus& corpus) {
    std::sort(corpus.applications.begin(), corpus.applications.end(),
              [](const TagApplication& a, const TagApplication& b) {
                  return std::tie(a.book_id, a.tag) < std::tie(b.book_id, b.tag);
              });
    for (std::size_t i = 1; i < corpus.applications.size(); ++i) {
        const auto& prev = corpus.applications[i - 1];
        const auto& cur = corpus.applications[i];
        if (prev.book_id == cur.book_id && prev.tag == cur.tag) {
            throw CorpusError("duplicate application (" + cur.book_id + ", " + cur.tag + ")");
        }
    }

    std::set<std::string> books;
    std::set<std::string> tags;
    for (const auto& app : corpus.applications) {
        if (app.count < 1 || app.tag.empty()) {
            throw CorpusError("invalid application (" + app.book_id + ", " + app.tag + ")");
        }
        tags.insert(app.tag);
    }
    // Books already known (e.g. whose tags were all filtered) stay known.
    books.insert(corpus.books.begin(), corpus.books.end());
    for (const auto& app : corpus.applications) {
        books.insert(app.book_id);
    }
    corpus.books.assign(books.begin(), books.end());
    corpus.tags.assign(tags.begin(), tags.end());

    for (auto& [page, page_books] : corpus.page_books) {
        std::sort(page_books.begin(), page_books.end());
        page_books.erase(std::unique(page_books.begin(), page_books.end()), page_books.end());
        if (page_books.empty()) {
            throw CorpusError("page " + page + " maps to no book");
        }
        for (const auto& book : page_books) {
            if (!books.contains(book)) {
                throw CorpusError("page " + page + " references unknown book " + book);
            }
        }
    }

    std::sort(corpus.users.begin(), corpus.users.end(),
              [](const UserRecord& a, const UserRecord& b) { return a.user_id < b.user_id; });
    for (std::size_t i = 0; i < corpus.users.size(); ++i) {
        auto& user = corpus.users[i];
        if (i > 0 && corpus.users[i - 1].user_id == user.user_id) {
            throw CorpusError("duplicate user " + user.user_id);
        }
        std::sort(user.liked_pages.begin(), user.liked_pages.end());
        user.liked_pages.erase(std::unique(user.liked_pages.begin(), user.liked_pages.end()),
                               user.liked_pages.end());
        for (const auto& page : user.liked_pages) {
            if (!corpus.page_books.contains(page)) {
                throw CorpusError("user " + user.user_id + " likes unknown page " + page);
            }
        }
    }
}

TagCorpus load_corpus(const CorpusPaths& paths, const LoadOptions& options, Diagnostics* diag) {
    TagCorpus corpus;
    {
        auto in = open_input(paths.applications);
        read_applications(in, paths.applications.string(), corpus, diag);
    }
    if (!paths.pages.empty()) {
        auto in = open_input(paths.pages);
        read_pages(in, paths.pages.string(), corpus);
    }
    if (!paths.users.empty()) {
        auto in = open_input(paths.users);
        read_users(in, paths.users.string(), corpus, options.bounds);
    }
    canonicalize(corpus);
    return corpus;
}

void write_applications(std::ostream& out, const TagCorpus& corpus) {
    out << "book_id,tag,count\n";
    for (const auto& app : corpus.applications) {
        csv::write_row(out, {app.book_id, app.tag, std::to_string(app.count)});
    }
}

void write_pages(std::ostream& out, const TagCorpus& corpus) {
    out << "page_id,book_id\n";
    for (const auto& [page, books] : corpus.page_books) {
        for (const auto& book : books) {
            csv::write_row(out, {page, book});
        }
    }
}

void write_users(std::ostream& out, const TagCorpus& corpus) {
    for (const auto& user : corpus.users) {
        nlohmann::ordered_json obj;
        obj["user_id"] = user.user_id;
        for (const Trait trait : kAllTraits) {
            obj[std::string(trait_name(trait))] = at(user.traits, trait);
        }
        obj["liked_pages"] = user.liked_pages;
        out << obj.dump() << '\n';
    }
}

void save_corpus(const TagCorpus& corpus, const CorpusPaths& paths) {
    {
        auto out = open_output(paths.applications);
        write_applications(out, corpus);
    }
    if (!paths.pages.empty()) {
        auto out = open_output(paths.pages);
        write_pages(out, corpus);
    }
    if (!paths.users.empty()) {
        auto out = open_output(paths.users);
        write_users(out, corpus);
    }
}

bool passes_character_rules(std::string_view tag, const FilterPolicy& policy) {
    long long chars = 0;
    long long letters = 0;
    long long nonenglish = 0;
    for (const char ch : tag) {
        const auto c = static_cast<unsigned char>(ch);
        if ((c & 0xC0) == 0x80) {
            continue;  // UTF-8 continuation byte
        }
        ++chars;
        if (is_ascii_letter(c)) {
            ++letters;
        }
        if (!is_english_char(c)) {
            ++nonenglish;
        }
    }
    return chars >= policy.min_chars && letters >= policy.min_letters && nonenglish <= policy.max_nonenglish;
}

TagCorpus filter_tags(const TagCorpus& corpus, const FilterPolicy& policy) {
    policy.validate();

    // (a) per-book threshold
    std::vector<TagApplication> kept;
    kept.reserve(corpus.applications.size());
    for (const auto& app : corpus.applications) {
        if (app.count >= policy.min_per_book) {
            kept.push_back(app);
        }
    }

    // (b) totals over surviving applications
    std::unordered_map<std::string, std::pair<long long, long long>> totals;  // tag -> (count, books)
    for (const auto& app : kept) {
        auto& t = totals[app.tag];
        t.first += app.count;
        t.second += 1;
    }

    // (c) character rules
    TagCorpus out;
    out.books = corpus.books;
    out.page_books = corpus.page_books;
    out.users = corpus.users;
    std::set<std::string> tags;
    for (auto& app : kept) {
        const auto& [total, books] = totals.at(app.tag);
        if (total < policy.min_total || books < policy.min_books) {
            continue;
        }
        if (!passes_character_rules(app.tag, policy)) {
            continue;
        }
        tags.insert(app.tag);
        out.applications.push_back(std::move(app));
    }
    out.tags.assign(tags.begin(), tags.end());
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("median of empty sequence");
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

PageTraits aggregate_page_traits(const TagCorpus& corpus, const FilterPolicy& policy) {
    std::map<std::string, std::vector<const UserRecord*>> likers;
    for (const auto& user : corpus.users) {
        for (const auto& page : user.liked_pages) {
            likers[page].push_back(&user);
        }
    }

    PageTraits result;
    for (const auto& [page, users] : likers) {
        if (!corpus.page_books.contains(page)) {
            continue;
        }
        if (static_cast<long long>(users.size()) < policy.min_page_likers || users.empty()) {
            continue;
        }
        TraitScores medians{};
        std::vector<double> scores(users.size());
        for (const Trait trait : kAllTraits) {
            for (std::size_t i = 0; i < users.size(); ++i) {
                scores[i] = at(users[i]->traits, trait);
            }
            at(medians, trait) = median(scores);
        }
        result.emplace(page, medians);
    }
    return result;
}

void write_page_traits(std::ostream& out, const PageTraits& traits) {
    std::vector<std::string> fields{"page_id"};
    for (const Trait trait : kAllTraits) {
        fields.emplace_back(trait_name(trait));
    }
    csv::write_row(out, fields);
    for (const auto& [page, scores] : traits) {
        fields.assign(1, page);
        for (const double v : scores) {
            fields.push_back(csv::format_double(v));
        }
        csv::write_row(out, fields);
    }
}

PageTraits read_page_traits(std::istream& in, const std::string& source) {
    const auto rows = csv::read_rows(in, source);
    PageTraits traits;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r == 0 && !rows[r].empty() && rows[r][0] == "page_id") {
            continue;
        }
        if (rows[r].size() != kTraitCount + 1) {
            throw ParseError(source, r + 1, "expected page_id and five trait scores");
        }
        TraitScores scores{};
        for (std::size_t t = 0; t < kTraitCount; ++t) {
            try {
                scores[t] = csv::parse_double(rows[r][t + 1]);
            } catch (const std::invalid_argument& e) {
                throw ParseError(source, r + 1, e.what());
            }
        }
        if (!traits.emplace(rows[r][0], scores).second) {
            throw ParseError(source, r + 1, "duplicate page " + rows[r][0]);
        }
    }
    return traits;
}

}  // namespace tagprof
