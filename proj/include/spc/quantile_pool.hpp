#pragma once
/*
  Many-configurations extension: parallel search levels over doubled
  sample sizes, time-shared on one thread.

  Level k draws ceil(c * k * 2^k) configurations i.i.d. from the pool
  distribution and runs a full scheduler over the sample; a level-k win
  targets the top 2^-k quantile of the pool. Levels share virtual time
  with weights proportional to 1/k^2 via a deficit scheduler: every
  charged second is credited to active levels in weight proportion, each
  step is executed by the level with the largest deficit and billed to
  it. Level k+1 is activated lazily once level k has charged kappa0 times
  its sample size (enough to touch every sampled config once at the base
  cap, in expectation).
*/

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "spc/scheduler.hpp"

namespace spc {

struct PoolOptions {
    double kappa0 = 1e-3;
    double multiplier = 2.0;
    std::uint64_t seed = 0;
    ChargeMode charge_mode = ChargeMode::NonResuming;
    std::optional<double> max_cap;
    double sample_constant = 1.0;  // c in ceil(c * k * 2^k)
    int first_level = 1;
    int max_level = 62;
};

// Draws one configuration id from the (possibly infinite) pool.
using ConfigSampler = std::function<std::string(std::uint64_t draw_seed)>;

// Builds a runtime source indexed consistently with the given id list.
using SourceFactory =
    std::function<std::unique_ptr<RuntimeSource>(const std::vector<std::string>& config_ids)>;

inline std::int64_t level_sample_size(int k, double c) {
    if (k < 1) throw std::invalid_argument("level must be >= 1");
    if (!(c > 0.0)) throw std::invalid_argument("sample constant must be > 0");
    return static_cast<std::int64_t>(std::ceil(c * static_cast<double>(k) * std::ldexp(1.0, k)));
}

struct PoolEvent {
    int level = 0;
    EventRecord event;
};

class QuantilePool {
public:
    QuantilePool(PoolOptions opt, ConfigSampler sampler, SourceFactory source_factory,
                 std::vector<std::string> instance_ids)
        : opt_(opt),
          sampler_(std::move(sampler)),
          source_factory_(std::move(source_factory)),
          instance_ids_(std::move(instance_ids)) {
        if (opt_.first_level < 1 || opt_.first_level > opt_.max_level)
            throw std::invalid_argument("bad pool level window");
        activate_level(opt_.first_level);
    }

    static std::uint64_t level_seed(std::uint64_t pool_seed, int k) {
        return mix64(pool_seed ^ mix64(static_cast<std::uint64_t>(k)));
    }

    // Samples the level and starts a fresh scheduler over the unique ids.
    void activate_level(int k) {
        for (const auto& lv : levels_)
            if (lv->k == k) throw std::invalid_argument("level already active");
        auto lv = std::make_unique<Level>();
        lv->k = k;
        const std::uint64_t seed = level_seed(opt_.seed, k);
        const std::int64_t n = level_sample_size(k, opt_.sample_constant);
        for (std::int64_t i = 0; i < n; ++i) {
            const std::string id = sampler_(mix64(seed + static_cast<std::uint64_t>(i) *
                                                             0x9E3779B97F4A7C15ull));
            lv->drawn_ids.push_back(id);
            bool dup = false;
            for (const auto& u : lv->unique_ids) dup = dup || u == id;
            if (!dup) lv->unique_ids.push_back(id);
        }
        lv->source = source_factory_(lv->unique_ids);
        SchedulerOptions sopt;
        sopt.kappa0 = opt_.kappa0;
        sopt.multiplier = opt_.multiplier;
        sopt.seed = seed;
        sopt.charge_mode = opt_.charge_mode;
        sopt.max_cap = opt_.max_cap;
        lv->scheduler = std::make_unique<Scheduler>(sopt, lv->unique_ids, instance_ids_);
        levels_.push_back(std::move(lv));
    }

    // One deficit-scheduled step of the neediest level.
    PoolEvent step() {
        if (levels_.empty()) throw std::logic_error("pool has no active level");
        std::size_t pick = 0;
        for (std::size_t i = 1; i < levels_.size(); ++i)
            if (levels_[i]->deficit > levels_[pick]->deficit) pick = i;

        Level& lv = *levels_[pick];
        const double before = lv.scheduler->charged_total();
        PoolEvent pe;
        pe.level = lv.k;
        pe.event = lv.scheduler->step(*lv.source);
        const double delta = lv.scheduler->charged_total() - before;
        lv.charged += delta;
        total_charged_ += delta;

        double weight_sum = 0.0;
        for (const auto& l : levels_) weight_sum += level_weight(l->k);
        for (const auto& l : levels_) l->deficit += delta * level_weight(l->k) / weight_sum;
        lv.deficit -= delta;

        maybe_activate_next();
        return pe;
    }

    void run_until_charged(double budget_seconds, const std::atomic<bool>* interrupt = nullptr) {
        while (total_charged_ < budget_seconds) {
            if (interrupt && interrupt->load()) return;
            step();
        }
    }

    std::string winner(int k) const { return level(k).scheduler->report().winner; }

    const Scheduler& level_scheduler(int k) const { return *level(k).scheduler; }

    void set_level_event_sink(int k, EventSink sink) {
        mutable_level(k).scheduler->set_event_sink(std::move(sink));
    }

    const std::vector<std::string>& level_drawn_ids(int k) const { return level(k).drawn_ids; }
    const std::vector<std::string>& level_unique_ids(int k) const { return level(k).unique_ids; }
    double level_charged(int k) const { return level(k).charged; }

    std::vector<int> active_levels() const {
        std::vector<int> ks;
        for (const auto& l : levels_) ks.push_back(l->k);
        return ks;
    }

    double total_charged() const { return total_charged_; }

private:
    struct Level {
        int k = 0;
        std::vector<std::string> drawn_ids;
        std::vector<std::string> unique_ids;
        std::unique_ptr<RuntimeSource> source;
        std::unique_ptr<Scheduler> scheduler;
        double charged = 0.0;
        double deficit = 0.0;
    };

    static double level_weight(int k) { return 1.0 / (static_cast<double>(k) * k); }

    const Level& level(int k) const {
        for (const auto& l : levels_)
            if (l->k == k) return *l;
        throw std::invalid_argument("level " + std::to_string(k) + " is not active");
    }

    Level& mutable_level(int k) {
        for (auto& l : levels_)
            if (l->k == k) return *l;
        throw std::invalid_argument("level " + std::to_string(k) + " is not active");
    }

    void maybe_activate_next() {
        const Level& top = *levels_.back();
        if (top.k >= opt_.max_level) return;
        const double threshold =
            opt_.kappa0 * static_cast<double>(top.drawn_ids.size());
        if (top.charged >= threshold) activate_level(top.k + 1);
    }

    PoolOptions opt_;
    ConfigSampler sampler_;
    SourceFactory source_factory_;
    std::vector<std::string> instance_ids_;
    std::vector<std::unique_ptr<Level>> levels_;  // ascending k
    double total_charged_ = 0.0;
};

}  // namespace spc
