#include "tagprof/lowrank.hpp"

#include "tagprof/csv.hpp"
#include "tagprof/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace tagprof {

namespace {

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

std::vector<std::string> numbered(const char* prefix, Eigen::Index n) {
    std::vector<std::string> labels(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        labels[static_cast<std::size_t>(i)] = prefix + std::to_string(i);
    }
    return labels;
}

// Op provides rows(), cols(), apply(X) = A X and apply_t(X) = A^T X.
template <typename Op>
LowRankFactors subspace_svd(const Op& op, Eigen::Index rank, std::uint64_t seed, const SvdOptions& options) {
    const Eigen::Index n = op.rows();
    const Eigen::Index m = op.cols();
    const Eigen::Index smallest = std::min(n, m);
    if (rank < 1 || rank > smallest) {
        throw std::invalid_argument("truncated_svd: rank " + std::to_string(rank) + " outside [1, " +
                                    std::to_string(smallest) + "]");
    }
    const Eigen::Index block = std::min<Eigen::Index>(rank + std::max(0, options.oversample), smallest);

    Rng rng(seed);
    Eigen::MatrixXd omega(m, block);
    for (Eigen::Index j = 0; j < block; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
            omega(i, j) = rng.normal();
        }
    }

    Eigen::MatrixXd q = orthonormal_basis(op.apply(omega));
    Eigen::VectorXd previous = Eigen::VectorXd::Constant(rank, -1.0);
    Eigen::MatrixXd z;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd;
    double change = std::numeric_limits<double>::infinity();
    int iteration = 0;
    for (;;) {
        ++iteration;
        z = op.apply_t(q);  // (Q^T A)^T
        svd.compute(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd current = svd.singularValues().head(rank);
        const double scale = current(0);
        change = (current - previous).cwiseAbs().maxCoeff();
        // The full-width case is exact after one projection.
        if (scale == 0.0 || change <= options.tolerance * scale || block == smallest) {
            break;
        }
        if (iteration >= options.max_iterations) {
            throw ConvergenceError("truncated_svd did not converge in " + std::to_string(iteration) +
                                       " iterations (last change " + std::to_string(change) + ")",
                                   change / scale);
        }
        previous = current;
        q = orthonormal_basis(op.apply(orthonormal_basis(z)));
    }

    LowRankFactors f;
    f.s = svd.singularValues().head(rank);
    f.u = q * svd.matrixV().leftCols(rank);
    f.v = svd.matrixU().leftCols(rank);
    f.iterations = iteration;

    // Fix the sign of each component: largest |entry| of v positive.
    for (Eigen::Index j = 0; j < rank; ++j) {
        Eigen::Index arg = 0;
        f.v.col(j).cwiseAbs().maxCoeff(&arg);
        if (f.v(arg, j) < 0.0) {
            f.v.col(j) *= -1.0;
            f.u.col(j) *= -1.0;
        }
    }
    return f;
}

struct SparseOp {
    const SparseMatrix& a;
    Eigen::Index rows() const { return static_cast<Eigen::Index>(a.rows()); }
    Eigen::Index cols() const { return static_cast<Eigen::Index>(a.cols()); }
    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const { return a.multiply(x); }
    Eigen::MatrixXd apply_t(const Eigen::MatrixXd& x) const { return a.multiply_transposed(x); }
};

struct DenseOp {
    const Eigen::MatrixXd& a;
    Eigen::Index rows() const { return a.rows(); }
    Eigen::Index cols() const { return a.cols(); }
    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const { return a * x; }
    Eigen::MatrixXd apply_t(const Eigen::MatrixXd& x) const { return a.transpose() * x; }
};

}  // namespace

LowRankFactors truncated_svd(const SparseMatrix& matrix, Eigen::Index rank, std::uint64_t seed,
                             const SvdOptions& options) {
    auto f = subspace_svd(SparseOp{matrix}, rank, seed, options);
    f.row_labels = matrix.row_labels();
    f.col_labels = matrix.col_labels();
    return f;
}

LowRankFactors truncated_svd(const Eigen::MatrixXd& matrix, Eigen::Index rank, std::uint64_t seed,
                             const SvdOptions& options) {
    auto f = subspace_svd(DenseOp{matrix}, rank, seed, options);
    f.row_labels = numbered("r", matrix.rows());
    f.col_labels = numbered("c", matrix.cols());
    return f;
}

CosineLookup::CosineLookup(const Eigen::MatrixXd& vectors, std::vector<std::string> labels)
    : unit_(vectors), is_zero_(static_cast<std::size_t>(vectors.rows()), 0), labels_(std::move(labels)) {
    for (Eigen::Index i = 0; i < unit_.rows(); ++i) {
        const double norm = unit_.row(i).norm();
        if (norm == 0.0) {
            is_zero_[static_cast<std::size_t>(i)] = 1;
            zero_rows_.push_back(i);
        } else {
            unit_.row(i) /= norm;
        }
    }
}

double CosineLookup::operator()(Eigen::Index a, Eigen::Index b) const {
    if (a < 0 || b < 0 || a >= size() || b >= size()) {
        throw std::out_of_range("similarity index out of range");
    }
    if (is_zero_[static_cast<std::size_t>(a)] != 0 || is_zero_[static_cast<std::size_t>(b)] != 0) {
        return 0.0;
    }
    if (a == b) {
        return 1.0;
    }
    return std::clamp(unit_.row(a).dot(unit_.row(b)), -1.0, 1.0);
}

double tag_similarity(const LowRankFactors& factors, Eigen::Index t, Eigen::Index t2, Diagnostics* diag) {
    const Eigen::Index n = factors.v.rows();
    if (t < 0 || t2 < 0 || t >= n || t2 >= n) {
        throw std::out_of_range("tag index out of range");
    }
    const Eigen::VectorXd a = factors.v.row(t).transpose().cwiseProduct(factors.s);
    const Eigen::VectorXd b = factors.v.row(t2).transpose().cwiseProduct(factors.s);
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        warn(diag, "zero factor vector; similarity defined as 0");
        return 0.0;
    }
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

CosineLookup column_similarity(const LowRankFactors& factors, Diagnostics* diag) {
    CosineLookup lookup(factors.weighted_columns(), factors.col_labels);
    for (const Eigen::Index i : lookup.zero_rows()) {
        const auto label = static_cast<std::size_t>(i) < factors.col_labels.size()
                               ? factors.col_labels[static_cast<std::size_t>(i)]
                               : std::to_string(i);
        warn(diag, "'" + label + "' has a zero factor vector; similarity defined as 0");
    }
    return lookup;
}

void write_factors(const LowRankFactors& factors, const std::filesystem::path& prefix) {
    const auto components = numbered("component-", factors.rank());
    auto open = [&](const char* suffix) {
        std::ofstream out(prefix.string() + suffix, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + prefix.string() + suffix);
        }
        return out;
    };
    {
        auto out = open("_u.csv");
        write_dense(out, factors.u, factors.row_labels, components, "row");
    }
    {
        auto out = open("_s.csv");
        out << "component,singular_value\n";
        for (Eigen::Index i = 0; i < factors.rank(); ++i) {
            csv::write_row(out, {components[static_cast<std::size_t>(i)], csv::format_double(factors.s(i))});
        }
    }
    {
        auto out = open("_v.csv");
        write_dense(out, factors.v, factors.col_labels, components, "column");
    }
}

}  // namespace tagprof
