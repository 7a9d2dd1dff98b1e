#pragma once
// Shared test fixtures and independent oracles. The oracles deliberately
// re-derive the math from scratch rather than calling the library paths
// they are checking.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spc/runners.hpp"

namespace testsupport {

// Independent evaluation of the shrunk-CDF bound: per-segment sum, own
// arithmetic for the level, margin and scaling.
inline double naive_margin(int k, std::int64_t r, std::int64_t t) {
    const double tc = static_cast<double>(t < 2 ? 2 : t);
    return std::sqrt(9.0 * std::pow(2.0, k) * std::log(k * tc) / static_cast<double>(r));
}

inline double naive_shrink(double p, std::int64_t r, std::int64_t t) {
    int k = static_cast<int>(std::floor(std::log2(1.0 / p)));
    if (k < 1) k = 1;
    const double m = naive_margin(k, r, t);
    if (m > 0.5) return 0.0;
    return p / (1.0 + m);
}

inline double naive_lcb(std::vector<double> values, std::int64_t t, double kappa0) {
    std::sort(values.begin(), values.end());
    const std::int64_t r = static_cast<std::int64_t>(values.size());
    double sum = 0.0;
    double prev = 0.0;
    for (std::int64_t m = 0; m < r; ++m) {
        const double v = values[static_cast<std::size_t>(m)];
        const double p = static_cast<double>(r - m) / static_cast<double>(r);
        sum += (v - prev) * naive_shrink(p, r, t);
        prev = v;
    }
    return std::max(kappa0, sum);
}

// Dense matrix with runtimes supplied per (config, instance).
template <class F>
spc::RuntimeMatrix make_matrix(int n_configs, int n_instances, F&& runtime_of) {
    spc::RuntimeMatrix m;
    for (int i = 0; i < n_configs; ++i) m.config_ids.push_back("c" + std::to_string(i));
    for (int j = 0; j < n_instances; ++j) m.instance_ids.push_back("i" + std::to_string(j));
    for (int i = 0; i < n_configs; ++i) {
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(n_instances));
        for (int j = 0; j < n_instances; ++j) row.push_back(runtime_of(i, j));
        m.runtimes.push_back(std::move(row));
    }
    return m;
}

inline spc::RuntimeMatrix constant_matrix(std::vector<double> per_config_runtime,
                                          int n_instances = 1) {
    return make_matrix(static_cast<int>(per_config_runtime.size()), n_instances,
                       [&](int i, int) { return per_config_runtime[static_cast<std::size_t>(i)]; });
}

}  // namespace testsupport
