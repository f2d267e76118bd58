#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ramac/detail/numeric.hpp"
#include "ramac/errors.hpp"

namespace ramac::markov {

/// Discrete-time chain in COLUMN-stochastic convention: entry (r, c) is the
/// probability of moving to state r given current state c, so equilibrium
/// satisfies P s = s. Note most textbooks use the row-stochastic transpose.
class TransitionMatrix {
public:
    TransitionMatrix(Eigen::MatrixXd entries, std::vector<std::string> labels)
        : entries_(std::move(entries)), labels_(std::move(labels)) {
        if (entries_.rows() < 1 || entries_.rows() != entries_.cols()) {
            throw domain_error("transition matrix must be square with dim >= 1");
        }
        if (labels_.empty()) {
            labels_.reserve(static_cast<std::size_t>(entries_.rows()));
            for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
                labels_.push_back("s" + std::to_string(i));
            }
        }
        if (static_cast<Eigen::Index>(labels_.size()) != entries_.rows()) {
            throw domain_error("label count must match matrix dimension");
        }
    }

    int dim() const { return static_cast<int>(entries_.rows()); }
    /// P(next = to | current = from).
    double operator()(int to, int from) const { return entries_(to, from); }
    const Eigen::MatrixXd& entries() const { return entries_; }
    const std::vector<std::string>& labels() const { return labels_; }

private:
    Eigen::MatrixXd entries_;
    std::vector<std::string> labels_;
};

struct ColumnViolation {
    int column = 0;
    double column_sum = 0.0;
    std::vector<int> out_of_range_rows;
};

/// Result of validate_stochastic: a report, not a failure.
struct StochasticReport {
    bool ok = true;
    std::vector<ColumnViolation> violations;

    std::string describe() const {
        if (ok) return "ok";
        std::string out;
        for (const auto& v : violations) {
            out += "column " + std::to_string(v.column) + ": sum " +
                   ramac::detail::format_sig(v.column_sum, 12);
            if (!v.out_of_range_rows.empty()) {
                out += ", out-of-range rows:";
                for (int r : v.out_of_range_rows) out += " " + std::to_string(r);
            }
            out += "\n";
        }
        return out;
    }
};

inline constexpr double column_sum_tol = 1e-12;

inline StochasticReport validate_stochastic(const TransitionMatrix& p) {
    StochasticReport report;
    for (int c = 0; c < p.dim(); ++c) {
        ColumnViolation v;
        v.column = c;
        v.column_sum = 0.0;
        for (int r = 0; r < p.dim(); ++r) {
            const double x = p(r, c);
            v.column_sum += x;
            if (!(x >= 0.0 && x <= 1.0)) v.out_of_range_rows.push_back(r);
        }
        if (!v.out_of_range_rows.empty() ||
            std::fabs(v.column_sum - 1.0) > column_sum_tol) {
            report.violations.push_back(std::move(v));
        }
    }
    report.ok = report.violations.empty();
    return report;
}

struct DistributionVector {
    std::vector<double> probabilities;
    std::vector<std::string> labels;

    double operator[](std::size_t i) const { return probabilities[i]; }
    std::size_t size() const { return probabilities.size(); }
};

struct SolveOptions {
    double residual_tol = 1e-10;   // required ||P s - s||_inf of the result
    double rank_tol = 1e-8;        // uniqueness test on P - I
    double power_tol = 1e-12;      // fallback power iteration tolerance
    long max_power_steps = 1000000;
};

namespace detail_markov {

inline double equilibrium_residual(const Eigen::MatrixXd& p, const Eigen::VectorXd& s) {
    return (p * s - s).lpNorm<Eigen::Infinity>();
}

inline Eigen::VectorXd clean_distribution(Eigen::VectorXd s) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] < 0.0 && s[i] > -1e-12) s[i] = 0.0;
    }
    const double total = s.sum();
    if (total <= 0.0) throw non_unique_equilibrium_error("stationary solve degenerated");
    return s / total;
}

}  // namespace detail_markov

/// Stationary distribution of a valid column-stochastic matrix: one balance
/// equation is replaced by the normalization row and the system solved
/// directly; power iteration is the fallback when the solve is ill behaved.
/// Throws non_unique_equilibrium_error when the chain has no unique
/// equilibrium (null space of P - I not one-dimensional, or a
/// non-convergent fallback).
inline DistributionVector stationary_distribution(const TransitionMatrix& p,
                                                  const SolveOptions& opt = {}) {
    const auto report = validate_stochastic(p);
    if (!report.ok) {
        throw domain_error("matrix is not column-stochastic:\n" + report.describe());
    }
    const int n = p.dim();
    const Eigen::MatrixXd& m = p.entries();

    // Uniqueness: P - I always has rank <= n-1; anything lower means
    // several equilibria and downstream metrics would be meaningless.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m - Eigen::MatrixXd::Identity(n, n));
    lu.setThreshold(opt.rank_tol);
    if (lu.rank() < n - 1) {
        throw non_unique_equilibrium_error(
            "chain is reducible: null space of P - I has dimension " +
            std::to_string(n - lu.rank()));
    }

    Eigen::MatrixXd a = m - Eigen::MatrixXd::Identity(n, n);
    a.row(0).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b[0] = 1.0;
    Eigen::VectorXd s = a.colPivHouseholderQr().solve(b);

    if (!s.allFinite() || detail_markov::equilibrium_residual(m, s) > opt.residual_tol) {
        // Power iteration fallback.
        s = Eigen::VectorXd::Constant(n, 1.0 / n);
        bool converged = false;
        for (long step = 0; step < opt.max_power_steps; ++step) {
            Eigen::VectorXd next = m * s;
            next /= next.sum();
            const double delta = (next - s).lpNorm<Eigen::Infinity>();
            s = std::move(next);
            if (delta <= opt.power_tol) {
                converged = true;
                break;
            }
        }
        if (!converged || detail_markov::equilibrium_residual(m, s) > opt.residual_tol) {
            throw non_unique_equilibrium_error(
                "power iteration did not converge to a unique equilibrium");
        }
    }

    s = detail_markov::clean_distribution(std::move(s));
    DistributionVector out;
    out.probabilities.assign(s.data(), s.data() + s.size());
    out.labels = p.labels();
    return out;
}

}  // namespace ramac::markov
