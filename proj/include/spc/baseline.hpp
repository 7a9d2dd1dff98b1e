#pragma once
/*
  Fixed-queue uniform-doubling baseline.

  At each cap level kappa0 * 2^a, in order, every configuration is run on
  queue_size fresh instances with non-resuming charges, until the budget
  is exhausted. Nothing adaptive happens: the point of this baseline is
  the amount of time it burns before any run at a distinguishing cap
  begins. The queue size is the fixed lower bound 12 eps^-2 ln(3 beta n /
  zeta); the real procedure grows its queue with the number of active
  instances, which this simplification deliberately ignores.
*/

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spc/runners.hpp"

namespace spc {

inline std::int64_t sp_queue_size(double epsilon, double zeta, std::int64_t n,
                                  std::int64_t beta_levels) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("sp_queue_size: epsilon must be > 0");
    if (!(zeta > 0.0) || !(zeta < 1.0))
        throw std::invalid_argument("sp_queue_size: zeta must be in (0, 1)");
    if (n < 1 || beta_levels < 1)
        throw std::invalid_argument("sp_queue_size: n and beta_levels must be >= 1");
    const double raw = 12.0 / (epsilon * epsilon) *
                       std::log(3.0 * static_cast<double>(beta_levels) *
                                static_cast<double>(n) / zeta);
    return static_cast<std::int64_t>(std::ceil(raw));
}

struct BaselineConfigStats {
    std::string config_id;
    std::int64_t attempts = 0;
    std::int64_t completions = 0;
    double charged_s = 0.0;
};

struct BaselineLevel {
    int level = 0;       // cap = kappa0 * 2^level
    double cap_s = 0.0;
    std::vector<BaselineConfigStats> per_config;
    double charged_s = 0.0;
};

struct BaselineReport {
    std::vector<BaselineLevel> levels;
    double charged_total_s = 0.0;
    std::int64_t queue_size = 0;
};

inline BaselineReport run_baseline(const RuntimeMatrix& matrix, std::int64_t queue_size,
                                   double kappa0, double budget_seconds,
                                   std::uint64_t seed = 0) {
    if (queue_size < 1) throw std::invalid_argument("run_baseline: queue_size must be >= 1");
    if (!(kappa0 > 0.0)) throw std::invalid_argument("run_baseline: kappa0 must be > 0");
    validate_matrix(matrix, kappa0);

    BaselineReport rep;
    rep.queue_size = queue_size;
    std::vector<InstanceStream> streams;
    for (const auto& id : matrix.config_ids)
        streams.emplace_back(derive_stream_seed(seed, id), matrix.num_instances());

    double cap = kappa0;
    for (int level = 0; rep.charged_total_s < budget_seconds && std::isfinite(cap); ++level) {
        BaselineLevel lv;
        lv.level = level;
        lv.cap_s = cap;
        for (std::int64_t c = 0; c < matrix.num_configs(); ++c) {
            BaselineConfigStats st;
            st.config_id = matrix.config_ids[static_cast<std::size_t>(c)];
            for (std::int64_t i = 0; i < queue_size; ++i) {
                if (rep.charged_total_s >= budget_seconds) break;
                const InstanceDraw d = streams[static_cast<std::size_t>(c)].next();
                const RunResult res =
                    run_simulated(matrix, c, d.pool_index, cap, 0.0, ChargeMode::NonResuming);
                st.attempts += 1;
                if (res.completed) st.completions += 1;
                st.charged_s += res.charged;
                lv.charged_s += res.charged;
                rep.charged_total_s += res.charged;
            }
            lv.per_config.push_back(std::move(st));
        }
        rep.levels.push_back(std::move(lv));
        cap *= 2.0;
    }
    return rep;
}

}  // namespace spc
