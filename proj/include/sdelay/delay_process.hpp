#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sdelay::delay {

/// Dense row-major square matrix; the chains here have at most a handful of states.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}
    SquareMatrix(std::size_t n, std::vector<double> row_major);

    static SquareMatrix identity(std::size_t n);

    std::size_t size() const noexcept { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
    const std::vector<double>& data() const noexcept { return a_; }

    SquareMatrix& operator*=(double s) {
        for (double& v : a_) v *= s;
        return *this;
    }

    friend SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b);

private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

struct GeneratorIssue {
    std::size_t row;
    std::size_t col;  // == row for a row-sum violation
    double value;
    std::string message;
};

/// Structured outcome of a conservativity check.
struct GeneratorReport {
    std::vector<GeneratorIssue> issues;
    bool ok() const noexcept { return issues.empty(); }
    std::string describe() const;
};

/// Off-diagonals must be >= 0 and every row must sum to 0 within 1e-12.
GeneratorReport validate_generator(const SquareMatrix& q);

/// Finite-state Markov delay: states D_1 < ... < D_r, generator Q, and the
/// compensated reference delay D_0. Indices are 0-based in the API.
class DelayModel {
public:
    DelayModel(std::vector<double> states, SquareMatrix q, double d0);

    std::size_t size() const noexcept { return states_.size(); }
    const std::vector<double>& states() const noexcept { return states_; }
    const SquareMatrix& generator() const noexcept { return q_; }
    double d0() const noexcept { return d0_; }
    double min_delay() const noexcept { return states_.front(); }
    double max_delay() const noexcept { return states_.back(); }

    /// Diagonal of Lambda_D (the state delays themselves).
    const std::vector<double>& lambda_d() const noexcept { return states_; }
    /// Sigma_D = ((D_i - D_0) / D_0)_i.
    const std::vector<double>& sigma_d() const noexcept { return sigma_; }

    double exit_rate(std::size_t i) const { return -q_(i, i); }

private:
    std::vector<double> states_;
    SquareMatrix q_;
    double d0_;
    std::vector<double> sigma_;
};

/// P(t) = exp(Q t), the time-homogeneous solution of the forward equation.
SquareMatrix transition_matrix(const DelayModel& model, double t);

/// Stationary law from the generator alone (pi Q = 0, sum pi = 1), by
/// Gaussian elimination; requires an irreducible chain.
std::vector<double> stationary_distribution(const DelayModel& model);

/// Right-continuous piecewise-constant realization: state_indices[k] is held
/// on [jump_times[k], jump_times[k+1]) (or up to the horizon for the last).
struct DelayPath {
    std::vector<double> jump_times;
    std::vector<std::size_t> state_indices;
    double horizon = 0.0;

    std::size_t segments() const noexcept { return jump_times.size(); }
    bool operator==(const DelayPath&) const = default;
};

/// Exact event-driven (Gillespie) sample on [0, horizon].
DelayPath sample_path(const DelayModel& model, std::size_t initial_index, double horizon,
                      std::uint64_t seed);

struct DelayState {
    std::size_t index;
    double delay;
};

/// State held at time t (post-jump state at a jump time).
DelayState delta_at(const DelayModel& model, const DelayPath& path, double t);
std::size_t index_at(const DelayPath& path, double t);

/// Delimited text: "# horizon <T>" comment, header "jump_time,state_index",
/// one row per segment. state_index is 1-based in the file.
void write_path(std::ostream& out, const DelayPath& path);
DelayPath read_path(std::istream& in);

}  // namespace sdelay::delay
