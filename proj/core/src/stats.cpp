#include "tagprof/stats.hpp"

#include "tagprof/csv.hpp"
#include "tagprof/lowrank.hpp"
#include "tagprof/parallel.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace tagprof {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_constant(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

double correlation_p_value(double r, std::size_t n) {
    if (n < 3) {
        throw std::invalid_argument("correlation_p_value: need n >= 3");
    }
    const double r2 = r * r;
    if (r2 >= 1.0) {
        return 0.0;
    }
    const auto df = static_cast<double>(n - 2);
    const double t2 = r2 * df / (1.0 - r2);
    // P(|T| > t) = I_{df / (df + t^2)}(df / 2, 1 / 2)
    return boost::math::ibeta(0.5 * df, 0.5, df / (df + t2));
}

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("pearson: inputs differ in length");
    }
    if (x.size() < 3) {
        throw std::invalid_argument("pearson: need at least 3 samples");
    }
    if (is_constant(x) || is_constant(y)) {
        throw std::domain_error("pearson: constant input has no variance");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    PearsonResult result;
    result.n = x.size();
    result.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    result.p = correlation_p_value(result.r, result.n);
    return result;
}

std::string_view significance_stars(double p) {
    if (!(p < 0.05)) {
        return "";
    }
    if (p < 0.001) {
        return "***";
    }
    if (p < 0.01) {
        return "**";
    }
    return "*";
}

std::vector<CorrelationEntry> correlation_table(const SparseMatrix& features, const PageTraits& traits,
                                                unsigned workers, Diagnostics* diag) {
    std::vector<std::size_t> rows;
    std::vector<const TraitScores*> scores;
    for (std::size_t r = 0; r < features.rows(); ++r) {
        const auto it = traits.find(features.row_labels()[r]);
        if (it != traits.end()) {
            rows.push_back(r);
            scores.push_back(&it->second);
        }
    }
    if (rows.size() < 3) {
        warn(diag, "correlation_table: fewer than 3 pages with both features and traits");
        return {};
    }

    std::vector<std::vector<double>> trait_columns(kTraitCount, std::vector<double>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t t = 0; t < kTraitCount; ++t) {
            trait_columns[t][i] = (*scores[i])[t];
        }
    }

    std::vector<std::size_t> columns(features.cols());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        columns[c] = c;
    }
    std::sort(columns.begin(), columns.end(), [&](std::size_t a, std::size_t b) {
        return features.col_labels()[a] < features.col_labels()[b];
    });

    const Eigen::MatrixXd dense = features.to_dense();
    std::vector<std::vector<CorrelationEntry>> per_column(columns.size());
    std::vector<std::string> column_warnings(columns.size());
    parallel_for(columns.size(), workers, [&](std::size_t k) {
        const std::size_t c = columns[k];
        std::vector<double> x(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            x[i] = dense(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(c));
        }
        if (is_constant(x)) {
            column_warnings[k] = "feature '" + features.col_labels()[c] + "' is constant; no correlations";
            return;
        }
        for (const Trait trait : kAllTraits) {
            CorrelationEntry entry;
            entry.feature = features.col_labels()[c];
            entry.trait = trait;
            entry.n = rows.size();
            const auto& y = trait_columns[static_cast<std::size_t>(trait)];
            if (is_constant(y)) {
                entry.defined = false;
                entry.r = kNaN;
                entry.p = kNaN;
            } else {
                const auto result = pearson(x, y);
                entry.r = result.r;
                entry.p = result.p;
            }
            per_column[k].push_back(std::move(entry));
        }
    });

    std::vector<CorrelationEntry> table;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (!column_warnings[k].empty()) {
            warn(diag, column_warnings[k]);
        }
        for (auto& e : per_column[k]) {
            table.push_back(std::move(e));
        }
    }
    return table;
}

TopCorrelations top_correlations(const std::vector<CorrelationEntry>& table, Trait trait, std::size_t count) {
    TopCorrelations top;
    for (const auto& e : table) {
        if (e.trait != trait || !e.defined) {
            continue;
        }
        if (e.r > 0.0) {
            top.positive.push_back(e);
        } else if (e.r < 0.0) {
            top.negative.push_back(e);
        }
    }
    auto by_r_desc = [](const CorrelationEntry& a, const CorrelationEntry& b) {
        return a.r != b.r ? a.r > b.r : a.feature < b.feature;
    };
    auto by_r_asc = [](const CorrelationEntry& a, const CorrelationEntry& b) {
        return a.r != b.r ? a.r < b.r : a.feature < b.feature;
    };
    std::sort(top.positive.begin(), top.positive.end(), by_r_desc);
    std::sort(top.negative.begin(), top.negative.end(), by_r_asc);
    if (top.positive.size() > count) {
        top.positive.resize(count);
    }
    if (top.negative.size() > count) {
        top.negative.resize(count);
    }
    return top;
}

std::pair<std::string_view, std::string_view> trait_poles(Trait trait) {
    switch (trait) {
        case Trait::extraversion:
            return {"Introverted", "Extraverted"};
        case Trait::agreeableness:
            return {"Disagreeable", "Agreeable"};
        case Trait::openness:
            return {"Traditional", "Open"};
        case Trait::neuroticism:
            return {"Levelheaded", "Neurotic"};
        case Trait::conscientiousness:
            return {"Tardy", "Conscientious"};
    }
    return {"", ""};
}

void write_correlations(std::ostream& out, const std::vector<CorrelationEntry>& table) {
    out << "feature,trait,r,p,stars,n\n";
    for (const auto& e : table) {
        if (!e.defined) {
            csv::write_row(out, {e.feature, std::string(trait_name(e.trait)), "NA", "NA", "", std::to_string(e.n)});
            continue;
        }
        csv::write_row(out, {e.feature, std::string(trait_name(e.trait)), csv::format_double(e.r),
                             csv::format_double(e.p), std::string(significance_stars(e.p)), std::to_string(e.n)});
    }
}

std::vector<CorrelationEntry> read_correlations(std::istream& in, const std::string& source) {
    const auto rows = csv::read_rows(in, source);
    std::vector<CorrelationEntry> table;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& f = rows[i];
        if (i == 0 && !f.empty() && f[0] == "feature") {
            continue;
        }
        if (f.size() != 6) {
            throw ParseError(source, i + 1, "expected feature,trait,r,p,stars,n");
        }
        CorrelationEntry e;
        try {
            e.feature = f[0];
            e.trait = trait_from_name(f[1]);
            e.n = static_cast<std::size_t>(csv::parse_integer(f[5]));
            if (f[2] == "NA") {
                e.defined = false;
                e.r = kNaN;
                e.p = kNaN;
            } else {
                e.r = csv::parse_double(f[2]);
                e.p = csv::parse_double(f[3]);
            }
        } catch (const std::invalid_argument& err) {
            throw ParseError(source, i + 1, err.what());
        }
        if (e.defined && f[4] != significance_stars(e.p)) {
            throw ParseError(source, i + 1, "stars do not match p");
        }
        table.push_back(std::move(e));
    }
    return table;
}

void write_top_table(std::ostream& out, const std::vector<CorrelationEntry>& table, std::size_t count) {
    out << "trait,low_pole,high_pole,rank,negative_feature,negative_r,negative_stars,positive_feature,positive_r,"
           "positive_stars\n";
    for (const Trait trait : kAllTraits) {
        const auto top = top_correlations(table, trait, count);
        const auto [low, high] = trait_poles(trait);
        const std::size_t rows = std::max(top.positive.size(), top.negative.size());
        for (std::size_t i = 0; i < rows; ++i) {
            std::vector<std::string> fields{std::string(trait_name(trait)), std::string(low), std::string(high),
                                            std::to_string(i + 1)};
            for (const auto* side : {&top.negative, &top.positive}) {
                if (i < side->size()) {
                    const auto& e = (*side)[i];
                    fields.push_back(e.feature);
                    fields.push_back(csv::format_fixed(e.r, 2));
                    fields.emplace_back(significance_stars(e.p));
                } else {
                    fields.insert(fields.end(), {"", "", ""});
                }
            }
            csv::write_row(out, fields);
        }
    }
}

void write_top_table_text(std::ostream& out, const std::vector<CorrelationEntry>& table, std::size_t count) {
    out << "TAG CLUSTERS MOST CORRELATED WITH PERSONALITY\n\n";
    for (const Trait trait : kAllTraits) {
        const auto top = top_correlations(table, trait, count);
        const auto [low, high] = trait_poles(trait);
        std::string name(trait_name(trait));
        name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
        out << std::left << std::setw(14) << low << std::setw(20) << name << high << '\n';
        const std::size_t rows = std::max(top.positive.size(), top.negative.size());
        for (std::size_t i = 0; i < rows; ++i) {
            std::ostringstream left;
            std::ostringstream right;
            if (i < top.negative.size()) {
                const auto& e = top.negative[i];
                left << std::right << std::setw(3) << significance_stars(e.p) << ' ' << std::setw(6)
                     << csv::format_fixed(e.r, 2) << "  " << e.feature;
            }
            if (i < top.positive.size()) {
                const auto& e = top.positive[i];
                right << e.feature << "  " << csv::format_fixed(e.r, 2) << ' ' << significance_stars(e.p);
            }
            out << "  " << std::left << std::setw(40) << left.str() << right.str() << '\n';
        }
        out << '\n';
    }
    out << "r = correlation coefficient; * p < 0.05; ** p < 0.01; *** p < 0.001.\n";
}

std::vector<GenreProfile> genre_profiles(const ClusterResult& genres, const PageTraits& traits, Diagnostics* diag) {
    const auto groups = genres.members();
    std::vector<GenreProfile> profiles;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        std::vector<const TraitScores*> scored;
        for (const auto item : groups[g]) {
            const auto it = traits.find(genres.items.at(item));
            if (it != traits.end()) {
                scored.push_back(&it->second);
            }
        }
        if (scored.empty()) {
            warn(diag, "genre " + genres.name_of(g) + " has no scored pages; dropped");
            continue;
        }
        GenreProfile profile;
        profile.label = genres.name_of(g);
        profile.members = scored.size();
        std::vector<double> values(scored.size());
        for (std::size_t t = 0; t < kTraitCount; ++t) {
            for (std::size_t i = 0; i < scored.size(); ++i) {
                values[i] = (*scored[i])[t];
            }
            profile.medians[t] = median(values);
        }
        profiles.push_back(std::move(profile));
    }
    if (profiles.size() < 2) {
        throw std::invalid_argument("genre_profiles: normalization needs at least 2 scored genres");
    }
    const auto g = static_cast<double>(profiles.size());
    for (std::size_t t = 0; t < kTraitCount; ++t) {
        double mean = 0.0;
        for (const auto& p : profiles) {
            mean += p.medians[t];
        }
        mean /= g;
        double var = 0.0;
        for (const auto& p : profiles) {
            var += (p.medians[t] - mean) * (p.medians[t] - mean);
        }
        const double sd = std::sqrt(var / g);
        for (auto& p : profiles) {
            p.normalized[t] = sd > 0.0 ? (p.medians[t] - mean) / sd : 0.0;
        }
    }
    return profiles;
}

ProfileProjection project_profiles_2d(const std::vector<GenreProfile>& profiles, std::uint64_t seed) {
    if (profiles.size() < 3) {
        throw std::invalid_argument("project_profiles_2d: need at least 3 genres");
    }
    const auto g = static_cast<Eigen::Index>(profiles.size());
    Eigen::MatrixXd m(g, static_cast<Eigen::Index>(kTraitCount));
    ProfileProjection out;
    for (Eigen::Index i = 0; i < g; ++i) {
        out.labels.push_back(profiles[static_cast<std::size_t>(i)].label);
        for (Eigen::Index t = 0; t < m.cols(); ++t) {
            m(i, t) = profiles[static_cast<std::size_t>(i)].normalized[static_cast<std::size_t>(t)];
        }
    }
    m.rowwise() -= m.colwise().mean();
    const auto factors = truncated_svd(m, 2, seed);
    out.coordinates = factors.weighted_rows();
    out.loadings = factors.v;
    const double total = m.squaredNorm();
    if (total > 0.0) {
        out.explained = factors.s.array().square() / total;
    }
    return out;
}

std::vector<CorrelationEntry> disposition_correlation(const std::vector<UserRecord>& users) {
    if (users.size() < 3) {
        throw std::invalid_argument("disposition_correlation: need at least 3 users");
    }
    std::vector<double> likes(users.size());
    for (std::size_t i = 0; i < users.size(); ++i) {
        likes[i] = static_cast<double>(users[i].liked_pages.size());
    }
    std::vector<CorrelationEntry> out;
    std::vector<double> scores(users.size());
    for (const Trait trait : kAllTraits) {
        for (std::size_t i = 0; i < users.size(); ++i) {
            scores[i] = at(users[i].traits, trait);
        }
        CorrelationEntry entry;
        entry.feature = "liked_pages";
        entry.trait = trait;
        entry.n = users.size();
        try {
            const auto result = pearson(scores, likes);
            entry.r = result.r;
            entry.p = result.p;
        } catch (const std::domain_error&) {
            entry.defined = false;
            entry.r = kNaN;
            entry.p = kNaN;
        }
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace tagprof
