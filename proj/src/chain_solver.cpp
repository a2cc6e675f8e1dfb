#include "moqc/error.hpp"
#include "moqc/numeric_solver.hpp"

#include <Eigen/LU>

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>

namespace moqc {

void SolverConfig::validate() const {
    auto positive = [](bool ok, const char* what) {
        if (!ok) throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be positive");
    };
    positive(value_tol > 0.0, "value_tol");
    positive(max_value_iters > 0, "max_value_iters");
    positive(policy_improvement_tol > 0.0, "policy_improvement_tol");
    positive(max_policy_iters > 0, "max_policy_iters");
    positive(workers > 0, "workers");
}

void validate_weights(const WeightVector& w, std::size_t m) {
    if (static_cast<std::size_t>(w.size()) != m)
        throw Error(ErrorKind::ShapeMismatch, "weight vector has " + std::to_string(w.size()) + " entries, expected " +
                                                  std::to_string(m));
    if (!w.allFinite() || std::abs(w.lpNorm<1>() - 1.0) > 1e-12)
        throw Error(ErrorKind::InvalidArgument, "weight vector must have unit 1-norm");
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& task) {
    const std::size_t threads = std::min(count, std::max<std::size_t>(workers, 1));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                task(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

ChainSolver::ChainSolver(const MarkovChain& chain, const SolverConfig& config) : chain_(chain), config_(config) {
    Digraph g;
    g.starts = chain.row_starts;
    g.targets.reserve(chain.entries.size());
    for (const auto& e : chain.entries) g.targets.push_back(e.target);
    scc_ = strongly_connected_components(g);
    bottom_.assign(scc_.components.size(), 1);
    for (std::size_t k = 0; k < scc_.components.size(); ++k)
        for (std::uint32_t s : scc_.components[k])
            for (const auto& e : chain.row(s))
                if (scc_.component_of[e.target] != k) bottom_[k] = 0;
}

std::vector<double> ChainSolver::solve(const std::vector<double>& r) const {
    const std::size_t n = chain_.num_states();
    if (r.size() != n) throw Error(ErrorKind::ShapeMismatch, "reward vector length differs from chain size");
    std::vector<double> x(n, 0.0);
    std::vector<std::uint32_t> local;

    for (std::size_t k = 0; k < scc_.components.size(); ++k) {
        const auto& comp = scc_.components[k];
        if (bottom_[k]) {
            for (std::uint32_t s : comp)
                if (r[s] != 0.0)
                    throw Error(ErrorKind::Divergence, "state " + std::to_string(s) +
                                                           " lies in a closed recurrent class but has reward " +
                                                           format_double(r[s]));
            continue;
        }
        if (comp.size() == 1) {
            const std::uint32_t s = comp[0];
            double self = 0.0, b = r[s];
            for (const auto& e : chain_.row(s)) {
                if (e.target == s) {
                    self += e.probability;
                } else {
                    b += e.probability * x[e.target];
                }
            }
            x[s] = b / (1.0 - self);
            continue;
        }
        if (local.empty()) local.assign(n, 0);
        for (std::size_t i = 0; i < comp.size(); ++i) local[comp[i]] = static_cast<std::uint32_t>(i);

        if (comp.size() <= config_.dense_limit) {
            const auto m = static_cast<Eigen::Index>(comp.size());
            Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
            Eigen::VectorXd b(m);
            for (Eigen::Index i = 0; i < m; ++i) {
                const std::uint32_t s = comp[static_cast<std::size_t>(i)];
                double rhs = r[s];
                for (const auto& e : chain_.row(s)) {
                    if (scc_.component_of[e.target] == k) {
                        a(i, local[e.target]) -= e.probability;
                    } else {
                        rhs += e.probability * x[e.target];
                    }
                }
                b(i) = rhs;
            }
            const Eigen::VectorXd sol = a.partialPivLu().solve(b);
            if (!sol.allFinite()) throw Error(ErrorKind::NumericalFailure, "singular transient block in chain solve");
            for (Eigen::Index i = 0; i < m; ++i) x[comp[static_cast<std::size_t>(i)]] = sol(i);
            continue;
        }

        // Large block: Gauss-Seidel in ascending state order.
        std::vector<double> outside(comp.size(), 0.0);
        for (std::size_t i = 0; i < comp.size(); ++i) {
            const std::uint32_t s = comp[i];
            double rhs = r[s];
            for (const auto& e : chain_.row(s))
                if (scc_.component_of[e.target] != k) rhs += e.probability * x[e.target];
            outside[i] = rhs;
        }
        double change = 0.0;
        std::size_t iter = 0;
        for (; iter < config_.max_value_iters; ++iter) {
            change = 0.0;
            for (std::size_t i = 0; i < comp.size(); ++i) {
                const std::uint32_t s = comp[i];
                double self = 0.0, v = outside[i];
                for (const auto& e : chain_.row(s)) {
                    if (scc_.component_of[e.target] != k) continue;
                    if (e.target == s) {
                        self += e.probability;
                    } else {
                        v += e.probability * x[e.target];
                    }
                }
                v /= (1.0 - self);
                change = std::max(change, std::abs(v - x[s]));
                x[s] = v;
            }
            if (change <= config_.value_tol) break;
        }
        if (iter == config_.max_value_iters)
            throw Error(ErrorKind::NonConvergence, "Gauss-Seidel stopped after " + std::to_string(iter) +
                                                       " sweeps with last change " + format_double(change));
    }
    return x;
}

std::vector<std::vector<double>> ChainSolver::solve_all(const std::vector<std::vector<double>>& rewards) const {
    std::vector<std::vector<double>> out(rewards.size());
    parallel_for(rewards.size(), config_.workers, [&](std::size_t i) { out[i] = solve(rewards[i]); });
    return out;
}

} // namespace moqc
