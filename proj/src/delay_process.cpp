#include "sdelay/delay_process.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "sdelay/errors.hpp"
#include "sdelay/random.hpp"

namespace sdelay::delay {

SquareMatrix::SquareMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), a_(std::move(row_major)) {
    if (a_.size() != n * n) throw std::invalid_argument("SquareMatrix: expected n*n entries");
}

SquareMatrix SquareMatrix::identity(std::size_t n) {
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) {
    const std::size_t n = a.size();
    SquareMatrix c(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

std::string GeneratorReport::describe() const {
    std::ostringstream os;
    for (const auto& issue : issues) {
        os << "row " << issue.row + 1;
        if (issue.col != issue.row) os << ", col " << issue.col + 1;
        os << ": " << issue.message << " (" << issue.value << ")\n";
    }
    return os.str();
}

GeneratorReport validate_generator(const SquareMatrix& q) {
    GeneratorReport report;
    for (std::size_t i = 0; i < q.size(); ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            const double v = q(i, j);
            if (!std::isfinite(v)) {
                report.issues.push_back({i, j, v, "non-finite rate"});
                continue;
            }
            if (i != j && v < 0.0) report.issues.push_back({i, j, v, "negative off-diagonal rate"});
            row_sum += v;
        }
        if (std::abs(row_sum) > 1e-12) {
            report.issues.push_back({i, i, row_sum, "row does not sum to zero"});
        }
    }
    return report;
}

DelayModel::DelayModel(std::vector<double> states, SquareMatrix q, double d0)
    : states_(std::move(states)), q_(std::move(q)), d0_(d0) {
    if (states_.empty()) throw ConfigError("need at least one delay state", "delay.states");
    if (q_.size() != states_.size()) {
        throw ConfigError("generator must be r x r with r = number of states", "delay.q_matrix");
    }
    for (std::size_t i = 0; i < states_.size(); ++i) {
        if (!(states_[i] > 0.0)) throw ConfigError("delays must be positive", "delay.states");
        if (i > 0 && !(states_[i] > states_[i - 1])) {
            throw ConfigError("delays must be strictly increasing", "delay.states");
        }
    }
    if (!(d0 > 0.0)) throw ConfigError("must be > 0", "delay.d0");
    if (d0 < states_.front() || d0 > states_.back()) {
        throw ConfigError("reference delay must lie in [D_1, D_r]", "delay.d0");
    }
    if (auto report = validate_generator(q_); !report.ok()) {
        throw ConfigError("generator is not conservative:\n" + report.describe(), "delay.q_matrix");
    }
    sigma_.reserve(states_.size());
    for (double d : states_) sigma_.push_back((d - d0_) / d0_);
}

SquareMatrix transition_matrix(const DelayModel& model, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("transition_matrix: t must be >= 0");
    const std::size_t n = model.size();
    const SquareMatrix& q = model.generator();

    double norm = 0.0;  // max absolute row sum of Q t
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += std::abs(q(i, j));
        norm = std::max(norm, row * t);
    }
    int squarings = 0;
    while (norm > 0.5) {
        norm *= 0.5;
        ++squarings;
    }
    const double scale = t / std::ldexp(1.0, squarings);

    SquareMatrix a(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = q(i, j) * scale;

    // Taylor series of exp(A) with ||A|| <= 0.5; 1/k! 0.5^k < 1e-20 by k = 18.
    SquareMatrix result = SquareMatrix::identity(n);
    SquareMatrix term = SquareMatrix::identity(n);
    for (int k = 1; k <= 20; ++k) {
        term = term * a;
        term *= 1.0 / k;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) result(i, j) += term(i, j);
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

std::vector<double> stationary_distribution(const DelayModel& model) {
    // Solve Q^T pi = 0 with the last equation replaced by sum(pi) = 1.
    const std::size_t n = model.size();
    const SquareMatrix& q = model.generator();
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = q(j, i);
    for (std::size_t j = 0; j < n; ++j) a[n - 1][j] = 1.0;
    a[n - 1][n] = 1.0;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-14) throw NumericalError("stationary_distribution: reducible chain");
        std::swap(a[col], a[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> pi(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = a[i][n] / a[i][i];
    return pi;
}

DelayPath sample_path(const DelayModel& model, std::size_t initial_index, double horizon,
                      std::uint64_t seed) {
    if (initial_index >= model.size()) throw ConfigError("out of range", "delay.initial_index");
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_path: horizon must be > 0");

    std::mt19937_64 rng(seed);
    const SquareMatrix& q = model.generator();
    DelayPath path;
    path.horizon = horizon;
    double t = 0.0;
    std::size_t j = initial_index;
    while (true) {
        path.jump_times.push_back(t);
        path.state_indices.push_back(j);
        const double rate = model.exit_rate(j);
        if (!(rate > 0.0)) break;  // absorbing
        t += exponential(rng, rate);
        if (t >= horizon) break;
        double target = uniform01(rng) * rate;
        std::size_t next = j;
        for (std::size_t k = 0; k < model.size(); ++k) {
            if (k == j || q(j, k) <= 0.0) continue;
            next = k;
            target -= q(j, k);
            if (target < 0.0) break;
        }
        j = next;
    }
    return path;
}

std::size_t index_at(const DelayPath& path, double t) {
    if (path.jump_times.empty()) throw std::invalid_argument("delta_at: empty path");
    if (!(t >= 0.0 && t <= path.horizon)) {
        throw std::out_of_range("delta_at: t outside [0, horizon]");
    }
    auto it = std::upper_bound(path.jump_times.begin(), path.jump_times.end(), t);
    return path.state_indices[static_cast<std::size_t>(it - path.jump_times.begin()) - 1];
}

DelayState delta_at(const DelayModel& model, const DelayPath& path, double t) {
    const std::size_t j = index_at(path, t);
    return {j, model.states().at(j)};
}

void write_path(std::ostream& out, const DelayPath& path) {
    out.precision(17);
    out << "# horizon " << path.horizon << "\n";
    out << "jump_time,state_index\n";
    for (std::size_t k = 0; k < path.segments(); ++k) {
        out << path.jump_times[k] << "," << path.state_indices[k] + 1 << "\n";
    }
}

DelayPath read_path(std::istream& in) {
    DelayPath path;
    path.horizon = std::numeric_limits<double>::quiet_NaN();
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            double value = 0.0;
            if (ls >> key && key == "horizon" && ls >> value) path.horizon = value;
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("jump_time", 0) == 0) continue;
        }
        std::istringstream ls(line);
        double time = 0.0;
        char comma = 0;
        long long index = 0;
        if (!(ls >> time >> comma >> index) || comma != ',' || index < 1) {
            throw ConfigError("malformed path row at line " + std::to_string(line_no));
        }
        if (!path.jump_times.empty() && !(time > path.jump_times.back())) {
            throw ConfigError("jump times must be strictly increasing (line " +
                              std::to_string(line_no) + ")");
        }
        path.jump_times.push_back(time);
        path.state_indices.push_back(static_cast<std::size_t>(index - 1));
    }
    if (path.jump_times.empty() || path.jump_times.front() != 0.0) {
        throw ConfigError("path must start with a segment at t = 0");
    }
    if (std::isnan(path.horizon)) path.horizon = path.jump_times.back();
    return path;
}

}  // namespace sdelay::delay
