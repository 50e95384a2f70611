#pragma once

// Replicate fan-out and Monte Carlo summaries.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "nncrit/error.hpp"

namespace nncrit::simlab {

template <class T>
struct ReplicateOutcome {
    std::optional<T> value;
    std::string error;  // set when the replicate threw
};

inline unsigned resolve_workers(unsigned workers) {
    if (workers > 0) return workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Runs fn(r) for r = 0..R-1 on up to `workers` threads (0 = all cores).
/// Outcomes are stored by replicate index, so the result does not depend on
/// scheduling as long as fn(r) depends only on r.
template <class F>
auto run_replicates(std::size_t R, unsigned workers, F&& fn)
    -> std::vector<ReplicateOutcome<std::invoke_result_t<F&, std::size_t>>> {
    using T = std::invoke_result_t<F&, std::size_t>;
    std::vector<ReplicateOutcome<T>> out(R);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= R) return;
            try {
                out[r].value.emplace(fn(r));
            } catch (const std::exception& e) {
                out[r].error = e.what();
            } catch (...) {
                out[r].error = "unknown exception";
            }
        }
    };
    const unsigned n = std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(R, 1));
    if (n <= 1) {
        work();
        return out;
    }
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return out;
}

struct Interval {
    double lo = 0.0, hi = 0.0;
    /// The unclipped interval leaves [0, 1].
    bool outside_unit() const { return lo < 0.0 || hi > 1.0; }
};

/// p_hat -/+ 1.96 sqrt(p_hat (1 - p_hat) / R), unclipped.
inline Interval wald_ci(double p_hat, std::size_t R) {
    if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw DomainError("wald_ci: p_hat must lie in [0,1]");
    if (R < 1) throw DomainError("wald_ci: need R >= 1");
    const double half = 1.96 * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(R));
    return {p_hat - half, p_hat + half};
}

struct MeanSd {
    double mean = 0.0, sd = 0.0;
    std::size_t n = 0;
};

/// Mean and sample standard deviation, summed in the given order.
inline MeanSd mean_sd(const std::vector<double>& v) {
    MeanSd m;
    m.n = v.size();
    if (v.empty()) return m;
    double s = 0.0;
    for (double x : v) s += x;
    m.mean = s / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return m;
}

}  // namespace nncrit::simlab
