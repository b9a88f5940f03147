#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tagprof::oracle {

Eigen::MatrixXd brute_tfidf(const Eigen::MatrixXd& counts) {
    const double n_docs = static_cast<double>(counts.rows());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(counts.rows(), counts.cols());
    for (Eigen::Index t = 0; t < counts.cols(); ++t) {
        int containing = 0;
        for (Eigen::Index b = 0; b < counts.rows(); ++b) {
            if (counts(b, t) != 0.0) {
                ++containing;
            }
        }
        if (containing == 0) {
            continue;
        }
        for (Eigen::Index b = 0; b < counts.rows(); ++b) {
            out(b, t) = counts(b, t) * std::log(1.0 + n_docs / containing);
        }
    }
    return out;
}

std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a, double tol, int max_sweeps) {
    const Eigen::Index n = a.rows();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                off += a(p, q) * a(p, q);
            }
        }
        if (off <= tol * tol * std::max(1.0, a.squaredNorm())) {
            break;
        }
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> values(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        values[static_cast<std::size_t>(i)] = a(i, i);
    }
    std::sort(values.begin(), values.end(), std::greater<>());
    return values;
}

std::vector<double> singular_values(const Eigen::MatrixXd& a) {
    const Eigen::MatrixXd gram = a.rows() >= a.cols() ? Eigen::MatrixXd(a.transpose() * a)
                                                      : Eigen::MatrixXd(a * a.transpose());
    auto values = jacobi_eigenvalues(gram);
    for (double& v : values) {
        v = std::sqrt(std::max(0.0, v));
    }
    return values;
}

Eigen::VectorXd ols_normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols() + 1;
    Eigen::MatrixXd design(n, p);
    design.col(0).setOnes();
    design.rightCols(x.cols()) = x;
    // augmented [X^T X | X^T y], solved by Gaussian elimination with partial pivoting
    Eigen::MatrixXd m(p, p + 1);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            double s = 0.0;
            for (Eigen::Index r = 0; r < n; ++r) {
                s += design(r, i) * design(r, j);
            }
            m(i, j) = s;
        }
        double s = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) {
            s += design(r, i) * y(r);
        }
        m(i, p) = s;
    }
    for (Eigen::Index c = 0; c < p; ++c) {
        Eigen::Index pivot = c;
        for (Eigen::Index r = c + 1; r < p; ++r) {
            if (std::abs(m(r, c)) > std::abs(m(pivot, c))) {
                pivot = r;
            }
        }
        m.row(c).swap(m.row(pivot));
        if (m(c, c) == 0.0) {
            throw std::runtime_error("ols oracle: singular normal equations");
        }
        for (Eigen::Index r = c + 1; r < p; ++r) {
            const double f = m(r, c) / m(c, c);
            m.row(r) -= f * m.row(c);
        }
    }
    Eigen::VectorXd beta(p);
    for (Eigen::Index i = p - 1; i >= 0; --i) {
        double s = m(i, p);
        for (Eigen::Index j = i + 1; j < p; ++j) {
            s -= m(i, j) * beta(j);
        }
        beta(i) = s / m(i, i);
    }
    return beta;
}

double t_two_sided_p(double t, double df, int intervals) {
    const double log_norm =
        std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) - 0.5 * std::log(df * std::numbers::pi);
    auto density = [&](double x) { return std::exp(log_norm - (df + 1.0) / 2.0 * std::log1p(x * x / df)); };
    const double upper = std::abs(t);
    if (intervals % 2 != 0) {
        ++intervals;
    }
    const double h = upper / intervals;
    double sum = density(0.0) + density(upper);
    for (int i = 1; i < intervals; ++i) {
        sum += density(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    const double central = sum * h / 3.0;  // integral over [0, |t|]
    return std::max(0.0, 1.0 - 2.0 * central);
}

MedoidSearch exhaustive_medoids(const std::vector<std::vector<double>>& d, std::size_t k) {
    const std::size_t n = d.size();
    MedoidSearch best;
    best.cost = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pick(k);
    std::function<void(std::size_t, std::size_t)> recurse = [&](std::size_t depth, std::size_t start) {
        if (depth == k) {
            double cost = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double nearest = std::numeric_limits<double>::infinity();
                for (const auto m : pick) {
                    nearest = std::min(nearest, d[i][m]);
                }
                cost += nearest;
            }
            if (cost < best.cost) {
                best.cost = cost;
                best.medoids = pick;
            }
            return;
        }
        for (std::size_t i = start; i < n; ++i) {
            pick[depth] = i;
            recurse(depth + 1, i + 1);
        }
    };
    recurse(0, 0);
    return best;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

ScratchDir::ScratchDir(const std::string& tag) {
    std::random_device rd;
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
        path_ = base / ("tagprof-" + tag + "-" + std::to_string(rd()));
        if (std::filesystem::create_directories(path_)) {
            break;
        }
    }
}

ScratchDir::~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace tagprof::oracle
