#pragma once
/*
  Per-configuration testing controller.

  Maintains one configuration's instance stream, pending-run FIFO queue,
  captime doubling and the observation table. Invariants kept after every
  step:
    (1) the first r stream ordinals are active (observations 1..r exist);
    (2) the number of pending runs never exceeds the queue target q;
    (3) pending caps are non-decreasing from head to tail, the tail cap is
        at most multiplier * head cap, and no recorded cap exceeds
        multiplier * theta.

  A step either activates the next stream instance (when the queue is
  below target) and runs it at the current captime theta, or pops the
  queue head and runs it at its scheduled cap, which becomes the new
  theta. Timed-out runs are re-enqueued at the tail with the cap scaled
  by the multiplier ("procrastination").
*/

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spc/lcb.hpp"
#include "spc/runners.hpp"

namespace spc {

// Queue target ceil(25 * log2(t * log2 r)), clamped so it is always >= 1
// and well defined for degenerate t, r. Before any instance is active the
// target is the initialization value 1.
inline std::int64_t target_queue_size(std::int64_t r, std::int64_t t) {
    if (r <= 0) return 1;
    const double tc = static_cast<double>(std::max<std::int64_t>(t, 2));
    const double rc = static_cast<double>(std::max<std::int64_t>(r, 2));
    const double raw = std::ceil(25.0 * std::log2(tc * std::max(1.0, std::log2(rc))));
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(raw));
}

struct CappedObservation {
    double capped_value = 0.0;  // min(true runtime, cap) of the latest attempt
    double cap_used = 0.0;      // cap of the latest attempt
    bool completed = false;
};

struct PendingRun {
    std::int64_t ordinal = 0;
    double next_cap = 0.0;
};

struct StepOutcome {
    std::int64_t ordinal = 0;
    std::int64_t instance_index = 0;
    std::uint64_t run_seed = 0;
    double cap = 0.0;
    double measured = 0.0;
    bool completed = false;
    double charged = 0.0;
    bool run_ok = true;
    bool activated = false;  // true when a fresh instance entered the stream
};

struct StepError : std::runtime_error {
    StepError(const std::string& config, std::int64_t instance, double cap,
              const std::string& why)
        : std::runtime_error("step failed for config " + config + ", instance index " +
                             std::to_string(instance) + ", cap " + std::to_string(cap) + ": " +
                             why),
          config_id(config),
          instance_index(instance),
          cap_seconds(cap) {}
    std::string config_id;
    std::int64_t instance_index;
    double cap_seconds;
};

class ConfigTester {
public:
    ConfigTester(std::string config_id, std::int64_t source_index, double kappa0,
                 double multiplier, InstanceStream stream,
                 std::optional<double> max_cap = std::nullopt)
        : config_id_(std::move(config_id)),
          source_index_(source_index),
          kappa0_(kappa0),
          multiplier_(multiplier),
          max_cap_(max_cap),
          stream_(stream),
          theta_(kappa0),
          q_(1) {
        if (!(kappa0 > 0.0)) throw std::invalid_argument("kappa0 must be > 0");
        if (!(multiplier > 1.0)) throw std::invalid_argument("multiplier must be > 1");
        if (max_cap_ && !(*max_cap_ >= kappa0))
            throw std::invalid_argument("max cap must be >= kappa0");
    }

    StepOutcome step(std::int64_t t, RuntimeSource& source,
                     const std::vector<std::string>& instance_ids) {
        StepOutcome out;
        if (static_cast<std::int64_t>(queue_.size()) < q_) {
            r_ += 1;
            out.ordinal = r_;
            out.cap = theta_;
            out.activated = true;
            stream_.next();  // cursor tracks r
            observations_.push_back(CappedObservation{});
        } else {
            const PendingRun head = queue_.front();
            queue_.pop_front();
            theta_ = head.next_cap;
            out.ordinal = head.ordinal;
            out.cap = head.next_cap;
        }

        const InstanceDraw draw = stream_.at(out.ordinal);
        out.instance_index = draw.pool_index;
        out.run_seed = draw.run_seed;

        CappedObservation& obs = observations_[static_cast<std::size_t>(out.ordinal - 1)];
        const double prev_cap = out.activated ? 0.0 : obs.cap_used;

        RunResult res;
        try {
            res = source.run(source_index_, instance_ids[static_cast<std::size_t>(draw.pool_index)],
                             draw.run_seed, out.cap, prev_cap);
        } catch (const SourceError& e) {
            throw StepError(config_id_, draw.pool_index, out.cap, e.what());
        }

        bool completed = res.completed;
        double recorded = completed ? res.measured : out.cap;
        if (!completed && max_cap_ && out.cap >= *max_cap_) {
            // The global never-exceed cap censors the run as complete-at-max.
            completed = true;
            recorded = out.cap;
        }

        if (!out.activated) remove_value(obs.capped_value);
        insert_value(recorded);
        obs.capped_value = recorded;
        obs.cap_used = out.cap;
        obs.completed = completed;

        if (!completed) {
            double next = out.cap * multiplier_;
            if (max_cap_) next = std::min(next, *max_cap_);
            queue_.push_back(PendingRun{out.ordinal, next});
        }

        cumulative_charged_ += res.charged;
        q_ = target_queue_size(r_, t);

        out.measured = recorded;
        out.completed = completed;
        out.charged = res.charged;
        out.run_ok = res.run_ok;
        return out;
    }

    // Tail mass of the empirical CDF of latest capped values, ascending.
    TailMass tail_mass() const {
        detail::TailMassBuilder b(r_);
        for (const auto& [value, count] : value_counts_) b.add(value, count);
        return b.finish();
    }

    double lcb_at(std::int64_t t) const {
        if (r_ == 0) return kappa0_;
        return lcb_from_mass(tail_mass(), t, kappa0_);
    }

    std::int64_t num_active() const { return r_; }

    double capped_mean_value() const {
        if (r_ == 0) return std::numeric_limits<double>::infinity();
        double s = 0.0;
        for (const auto& [value, count] : value_counts_)
            s += value * static_cast<double>(count);
        return s / static_cast<double>(r_);
    }

    // nullopt when all invariants hold, else a description of the breach.
    std::optional<std::string> check_invariants() const {
        std::ostringstream why;
        if (static_cast<std::int64_t>(observations_.size()) != r_) {
            why << "observation table has " << observations_.size() << " entries, r = " << r_;
            return why.str();
        }
        if (static_cast<std::int64_t>(queue_.size()) > q_) {
            why << "queue length " << queue_.size() << " exceeds target " << q_;
            return why.str();
        }
        std::vector<bool> seen(static_cast<std::size_t>(r_) + 1, false);
        double prev = 0.0;
        for (std::size_t i = 0; i < queue_.size(); ++i) {
            const PendingRun& p = queue_[i];
            if (p.ordinal < 1 || p.ordinal > r_ || seen[static_cast<std::size_t>(p.ordinal)]) {
                why << "queue entry " << i << " has bad or duplicate ordinal " << p.ordinal;
                return why.str();
            }
            seen[static_cast<std::size_t>(p.ordinal)] = true;
            if (i > 0 && p.next_cap < prev) {
                why << "queue caps decrease at position " << i;
                return why.str();
            }
            prev = p.next_cap;
        }
        if (!queue_.empty() &&
            queue_.back().next_cap > multiplier_ * queue_.front().next_cap * (1 + 1e-12)) {
            why << "tail cap " << queue_.back().next_cap << " exceeds multiplier * head cap";
            return why.str();
        }
        for (std::size_t i = 0; i < observations_.size(); ++i) {
            if (observations_[i].cap_used > multiplier_ * theta_ * (1 + 1e-12)) {
                why << "observation " << i + 1 << " used cap " << observations_[i].cap_used
                    << " > multiplier * theta = " << multiplier_ * theta_;
                return why.str();
            }
        }
        return std::nullopt;
    }

    const std::string& config_id() const { return config_id_; }
    std::int64_t source_index() const { return source_index_; }
    double kappa0() const { return kappa0_; }
    double multiplier() const { return multiplier_; }
    const std::optional<double>& max_cap() const { return max_cap_; }
    double theta() const { return theta_; }
    std::int64_t queue_target() const { return q_; }
    double cumulative_charged() const { return cumulative_charged_; }
    const std::deque<PendingRun>& queue() const { return queue_; }
    const std::vector<CappedObservation>& observations() const { return observations_; }
    const InstanceStream& stream() const { return stream_; }

    // Rebuilds a tester from checkpointed state.
    static ConfigTester from_state(std::string config_id, std::int64_t source_index,
                                   double kappa0, double multiplier,
                                   std::optional<double> max_cap, InstanceStream stream,
                                   double theta, std::int64_t q, double cumulative_charged,
                                   std::deque<PendingRun> queue,
                                   std::vector<CappedObservation> observations) {
        ConfigTester ct(std::move(config_id), source_index, kappa0, multiplier, stream, max_cap);
        ct.theta_ = theta;
        ct.q_ = q;
        ct.cumulative_charged_ = cumulative_charged;
        ct.queue_ = std::move(queue);
        ct.observations_ = std::move(observations);
        ct.r_ = static_cast<std::int64_t>(ct.observations_.size());
        for (const auto& obs : ct.observations_) ct.insert_value(obs.capped_value);
        return ct;
    }

private:
    void insert_value(double v) { value_counts_[v] += 1; }

    void remove_value(double v) {
        auto it = value_counts_.find(v);
        if (it != value_counts_.end() && --it->second == 0) value_counts_.erase(it);
    }

    std::string config_id_;
    std::int64_t source_index_ = 0;
    double kappa0_ = 0.0;
    double multiplier_ = 2.0;
    std::optional<double> max_cap_;
    InstanceStream stream_;

    std::int64_t r_ = 0;
    double theta_ = 0.0;
    std::int64_t q_ = 1;
    std::deque<PendingRun> queue_;
    std::vector<CappedObservation> observations_;       // ordinal L at index L-1
    std::map<double, std::int64_t> value_counts_;       // latest values, with multiplicity
    double cumulative_charged_ = 0.0;
};

}  // namespace spc
