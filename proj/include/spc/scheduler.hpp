#pragma once
/*
  The anytime main loop: pick the tester with the smallest lower
  confidence bound, pass it one step, repeat until the budget runs out or
  the run is interrupted. The returned candidate is the configuration
  with the most active instances.

  Determinism contract: identical (seed, matrix, parameters) produce
  identical event logs, and a run restored from a checkpoint continues
  byte-identically to one that was never interrupted. Everything the
  decisions depend on lives in the checkpoint; the selection index is
  derived state and is rebuilt on restore.
*/

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spc/event_log.hpp"
#include "spc/lcb_index.hpp"
#include "spc/runners.hpp"
#include "spc/tester.hpp"

namespace spc {

struct SchedulerOptions {
    double kappa0 = 1e-3;
    double multiplier = 2.0;
    std::uint64_t seed = 0;
    ChargeMode charge_mode = ChargeMode::NonResuming;
    std::optional<double> max_cap;  // global never-exceed cap (off by default)
};

// ---------------------------------------------------------------------------
// Post-hoc (epsilon, delta)-optimality certificate

struct Certificate {
    double epsilon = 0.0;
    double delta = 0.0;
    double lambda = 1.0;
    double confidence = 0.0;  // 1 - exp(-2 lambda)
    std::int64_t r_winner = 0;
    std::int64_t t = 0;
};

inline bool certificate_inequality_holds(double epsilon, double delta, double lambda,
                                         std::int64_t r_winner, std::int64_t t) {
    const double inner = std::max(1.0, std::log2(1.0 / delta));
    const double tc = static_cast<double>(std::max<std::int64_t>(t, 2));
    const double rhs = 72.0 * lambda * std::log2(tc * inner) / static_cast<double>(r_winner);
    return epsilon * epsilon * delta >= rhs;
}

// Smallest delta in (0, 1/2] satisfying the certificate inequality, found
// by bisection to relative tolerance 1e-9 (the left side grows with delta
// while the right side shrinks). nullopt when even delta = 1/2 fails.
inline std::optional<Certificate> certify_delta(std::int64_t r_winner, std::int64_t t,
                                                double epsilon, double lambda) {
    if (r_winner < 1) throw std::invalid_argument("certify_delta: r_winner must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("certify_delta: epsilon must be > 0");
    if (!(lambda >= 1.0)) throw std::invalid_argument("certify_delta: lambda must be >= 1");

    auto holds = [&](double d) {
        return certificate_inequality_holds(epsilon, d, lambda, r_winner, t);
    };
    if (!holds(0.5)) return std::nullopt;

    double lo = 0.25, hi = 0.5;
    while (holds(lo)) {
        hi = lo;
        lo *= 0.5;
        if (lo < 1e-300) break;  // inequality holds for arbitrarily small delta
    }
    while (hi - lo > 1e-9 * hi) {
        const double mid = 0.5 * (lo + hi);
        (holds(mid) ? hi : lo) = mid;
    }
    return Certificate{epsilon, hi, lambda, 1.0 - std::exp(-2.0 * lambda), r_winner, t};
}

// ---------------------------------------------------------------------------

struct ConfigReport {
    std::string id;
    std::int64_t r = 0;
    double lcb_s = 0.0;
    double capped_mean_s = 0.0;
    double charged_s = 0.0;
};

struct RunReport {
    std::string winner;
    int winner_index = 0;
    std::int64_t t = 0;
    double charged_total_s = 0.0;
    std::vector<ConfigReport> configs;
};

enum class StopReason { BudgetExhausted, Interrupted, StepLimit };

class Scheduler {
public:
    Scheduler(SchedulerOptions opt, std::vector<std::string> config_ids,
              std::vector<std::string> instance_ids)
        : opt_(opt), instance_ids_(std::move(instance_ids)) {
        if (config_ids.empty()) throw std::invalid_argument("scheduler needs >= 1 configuration");
        if (instance_ids_.empty()) throw std::invalid_argument("scheduler needs >= 1 instance");
        testers_.reserve(config_ids.size());
        for (std::size_t i = 0; i < config_ids.size(); ++i) {
            InstanceStream stream(derive_stream_seed(opt.seed, config_ids[i]),
                                  static_cast<std::int64_t>(instance_ids_.size()));
            testers_.emplace_back(config_ids[i], static_cast<std::int64_t>(i), opt.kappa0,
                                  opt.multiplier, stream, opt.max_cap);
        }
        index_.rebuild(testers_, t_);
    }

    void set_event_sink(EventSink sink) { sink_ = std::move(sink); }

    // Argmin-LCB selection at the current iteration; consumes one position
    // of the round-robin pointer on exact ties.
    int select_next() { return index_.select(testers_, t_, rr_pointer_); }

    EventRecord step(RuntimeSource& source) {
        const int idx = select_next();
        t_ += 1;
        ConfigTester& ct = testers_[static_cast<std::size_t>(idx)];
        const StepOutcome out = ct.step(t_, source, instance_ids_);
        charged_total_ += out.charged;
        index_.on_stepped(testers_, idx, t_);

        EventRecord e;
        e.t = t_;
        e.config = ct.config_id();
        e.instance = instance_ids_[static_cast<std::size_t>(out.instance_index)];
        e.cap_s = out.cap;
        e.measured_s = out.measured;
        e.completed = out.completed;
        e.lcb_s = index_.cached_value(idx);
        e.r = ct.num_active();
        e.q = ct.queue_target();
        e.charged_total_s = charged_total_;
        if (sink_) sink_(e);
        return e;
    }

    StopReason run_steps(std::int64_t steps, RuntimeSource& source,
                         const std::atomic<bool>* interrupt = nullptr) {
        for (std::int64_t i = 0; i < steps; ++i) {
            if (interrupt && interrupt->load()) return StopReason::Interrupted;
            step(source);
        }
        return StopReason::StepLimit;
    }

    // Virtual budget: run until the charged simulated time reaches it.
    StopReason run_until_charged(double budget_seconds, RuntimeSource& source,
                                 const std::atomic<bool>* interrupt = nullptr,
                                 double checkpoint_every = 0.0,
                                 const std::function<void(const Scheduler&)>& on_checkpoint = {}) {
        double next_ckpt = checkpoint_every > 0.0
                               ? (std::floor(charged_total_ / checkpoint_every) + 1.0) *
                                     checkpoint_every
                               : 0.0;
        while (charged_total_ < budget_seconds) {
            if (interrupt && interrupt->load()) return StopReason::Interrupted;
            step(source);
            if (checkpoint_every > 0.0 && charged_total_ >= next_ckpt) {
                if (on_checkpoint) on_checkpoint(*this);
                next_ckpt = (std::floor(charged_total_ / checkpoint_every) + 1.0) *
                            checkpoint_every;
            }
        }
        return StopReason::BudgetExhausted;
    }

    // Wall-clock budget for real backends (per invocation).
    StopReason run_until_wall(double budget_seconds, RuntimeSource& source,
                              const std::atomic<bool>* interrupt = nullptr,
                              double checkpoint_every = 0.0,
                              const std::function<void(const Scheduler&)>& on_checkpoint = {}) {
        const auto start = std::chrono::steady_clock::now();
        auto elapsed = [&] {
            return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        };
        double next_ckpt = checkpoint_every;
        while (elapsed() < budget_seconds) {
            if (interrupt && interrupt->load()) return StopReason::Interrupted;
            step(source);
            if (checkpoint_every > 0.0 && elapsed() >= next_ckpt) {
                if (on_checkpoint) on_checkpoint(*this);
                next_ckpt += checkpoint_every;
            }
        }
        return StopReason::BudgetExhausted;
    }

    // Candidate = most active instances; ties by smaller empirical capped
    // mean, then lower index.
    int current_winner() const {
        int best = 0;
        for (int i = 1; i < static_cast<int>(testers_.size()); ++i) {
            const auto& a = testers_[static_cast<std::size_t>(i)];
            const auto& b = testers_[static_cast<std::size_t>(best)];
            if (a.num_active() > b.num_active()) {
                best = i;
            } else if (a.num_active() == b.num_active() &&
                       a.capped_mean_value() < b.capped_mean_value()) {
                best = i;
            }
        }
        return best;
    }

    RunReport report() const {
        RunReport rep;
        rep.winner_index = current_winner();
        rep.winner = testers_[static_cast<std::size_t>(rep.winner_index)].config_id();
        rep.t = t_;
        rep.charged_total_s = charged_total_;
        for (const auto& ct : testers_) {
            ConfigReport cr;
            cr.id = ct.config_id();
            cr.r = ct.num_active();
            cr.lcb_s = ct.lcb_at(t_);
            cr.capped_mean_s = ct.num_active() > 0 ? ct.capped_mean_value() : 0.0;
            cr.charged_s = ct.cumulative_charged();
            rep.configs.push_back(std::move(cr));
        }
        return rep;
    }

    // -----------------------------------------------------------------------
    // Checkpointing

    nlohmann::ordered_json snapshot() const {
        nlohmann::ordered_json j;
        j["format"] = "spc-checkpoint";
        j["version"] = 1;
        j["t"] = t_;
        j["rr_pointer"] = rr_pointer_;
        j["charged_total_s"] = charged_total_;
        j["seed"] = opt_.seed;
        j["kappa0"] = opt_.kappa0;
        j["multiplier"] = opt_.multiplier;
        j["charge_mode"] = to_string(opt_.charge_mode);
        if (opt_.max_cap)
            j["max_cap"] = *opt_.max_cap;
        else
            j["max_cap"] = nullptr;
        j["instance_ids"] = instance_ids_;
        nlohmann::ordered_json testers = nlohmann::ordered_json::array();
        for (const auto& ct : testers_) {
            nlohmann::ordered_json tj;
            tj["config_id"] = ct.config_id();
            tj["source_index"] = ct.source_index();
            tj["theta"] = ct.theta();
            tj["q"] = ct.queue_target();
            tj["charged_s"] = ct.cumulative_charged();
            tj["stream_cursor"] = ct.stream().cursor();
            nlohmann::ordered_json queue = nlohmann::ordered_json::array();
            for (const auto& p : ct.queue())
                queue.push_back(nlohmann::ordered_json::array({p.ordinal, p.next_cap}));
            tj["queue"] = std::move(queue);
            nlohmann::ordered_json obs = nlohmann::ordered_json::array();
            for (const auto& o : ct.observations())
                obs.push_back(nlohmann::ordered_json::array(
                    {o.capped_value, o.cap_used, o.completed ? 1 : 0}));
            tj["observations"] = std::move(obs);
            testers.push_back(std::move(tj));
        }
        j["testers"] = std::move(testers);
        return j;
    }

    static Scheduler restore(const nlohmann::json& j) {
        if (!j.is_object() || j.value("format", "") != std::string("spc-checkpoint"))
            throw std::runtime_error("not an spc checkpoint document");
        if (j.at("version").get<int>() != 1)
            throw std::runtime_error("unsupported checkpoint version " +
                                     j.at("version").dump());
        SchedulerOptions opt;
        opt.seed = j.at("seed").get<std::uint64_t>();
        opt.kappa0 = j.at("kappa0").get<double>();
        opt.multiplier = j.at("multiplier").get<double>();
        opt.charge_mode = charge_mode_from_string(j.at("charge_mode").get<std::string>());
        if (!j.at("max_cap").is_null()) opt.max_cap = j.at("max_cap").get<double>();

        Scheduler s(opt, j.at("instance_ids").get<std::vector<std::string>>());
        s.t_ = j.at("t").get<std::int64_t>();
        s.rr_pointer_ = j.at("rr_pointer").get<std::int64_t>();
        s.charged_total_ = j.at("charged_total_s").get<double>();
        for (const auto& tj : j.at("testers")) {
            std::deque<PendingRun> queue;
            for (const auto& p : tj.at("queue"))
                queue.push_back(PendingRun{p.at(0).get<std::int64_t>(), p.at(1).get<double>()});
            std::vector<CappedObservation> obs;
            for (const auto& o : tj.at("observations"))
                obs.push_back(CappedObservation{o.at(0).get<double>(), o.at(1).get<double>(),
                                                o.at(2).get<int>() != 0});
            const auto config_id = tj.at("config_id").get<std::string>();
            InstanceStream stream(derive_stream_seed(opt.seed, config_id),
                                  static_cast<std::int64_t>(s.instance_ids_.size()),
                                  tj.at("stream_cursor").get<std::int64_t>());
            s.testers_.push_back(ConfigTester::from_state(
                config_id, tj.at("source_index").get<std::int64_t>(), opt.kappa0,
                opt.multiplier, opt.max_cap, stream, tj.at("theta").get<double>(),
                tj.at("q").get<std::int64_t>(), tj.at("charged_s").get<double>(),
                std::move(queue), std::move(obs)));
        }
        if (s.testers_.empty()) throw std::runtime_error("checkpoint contains no testers");
        s.index_.rebuild(s.testers_, s.t_);
        return s;
    }

    std::int64_t iteration() const { return t_; }
    double charged_total() const { return charged_total_; }
    std::int64_t rr_pointer() const { return rr_pointer_; }
    const SchedulerOptions& options() const { return opt_; }
    const std::vector<ConfigTester>& testers() const { return testers_; }
    const std::vector<std::string>& instance_ids() const { return instance_ids_; }

private:
    // Restore path: testers are appended afterwards.
    Scheduler(SchedulerOptions opt, std::vector<std::string> instance_ids)
        : opt_(opt), instance_ids_(std::move(instance_ids)) {
        if (instance_ids_.empty()) throw std::runtime_error("checkpoint has no instances");
    }

    SchedulerOptions opt_;
    std::vector<std::string> instance_ids_;
    std::vector<ConfigTester> testers_;
    LcbIndex index_;
    std::int64_t t_ = 0;
    std::int64_t rr_pointer_ = 0;
    double charged_total_ = 0.0;
    EventSink sink_;
};

}  // namespace spc
