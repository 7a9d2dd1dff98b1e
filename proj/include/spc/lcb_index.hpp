#pragma once
/*
  Exact argmin-LCB selection over all testers without an O(n * r) rescan
  per iteration.

  Facts the index relies on:
    - every LCB is >= kappa0, and a tester at the kappa0 floor stays there
      until it is stepped (margins only grow with t);
    - for an un-stepped tester the bound is non-increasing in t, and
      between "level death" events (a margin crossing 1/2, which zeroes a
      mass level) it decays by at most sqrt(ln t_cached / ln t), since
      every margin grows at most like sqrt(ln t / ln t_cached).

  Floor testers live in an ordered set: while it is non-empty the argmin
  is exactly that set, resolved by the rotating round-robin pointer.
  Non-floor testers carry a cached bound v computed at t_c and a lazy
  min-heap key kappa = v * sqrt(ln t_c), so kappa / sqrt(ln t) lower
  bounds their current LCB until their next level death; a recompute
  event is scheduled at the earliest death (or the far-off point where
  smooth decay alone could reach the floor). Selection pops heap
  candidates until the remaining keys certify that nothing unexamined can
  be at or below the best exact value found, so the returned index and
  its tie set equal what a full rescan would produce, independent of
  cache staleness. Caches are derived state: rebuilt on restore, so
  resumed runs take identical decisions.
*/

#include <cstdint>
#include <limits>
#include <queue>
#include <set>
#include <vector>

#include "spc/tester.hpp"

namespace spc {

class LcbIndex {
public:
    void rebuild(const std::vector<ConfigTester>& testers, std::int64_t t) {
        const std::size_t n = testers.size();
        cache_.assign(n, Cache{});
        gen_.assign(n, 0);
        visited_round_.assign(n, 0);
        round_ = 0;
        floor_set_.clear();
        kappa_heap_ = {};
        events_ = {};
        for (std::size_t i = 0; i < n; ++i) refresh(testers, static_cast<int>(i), t);
    }

    // Exact argmin of lcb_at(t) with round-robin rotation among exact ties.
    int select(const std::vector<ConfigTester>& testers, std::int64_t t,
               std::int64_t& rr_pointer) {
        process_due_events(testers, t);

        if (!floor_set_.empty()) return rotate_set(floor_set_, rr_pointer);

        ++round_;
        const double sqrt_ln_t = std::sqrt(std::log(static_cast<double>(std::max<std::int64_t>(t, 2))));
        double best = std::numeric_limits<double>::infinity();
        std::vector<int> ties;
        std::vector<KappaEntry> live_again;

        for (;;) {
            skip_stale_kappa();
            if (kappa_heap_.empty()) break;
            const KappaEntry top = kappa_heap_.top();
            if (top.kappa / sqrt_ln_t > best) break;
            kappa_heap_.pop();
            const int i = top.idx;
            if (visited_round_[static_cast<std::size_t>(i)] == round_) {
                live_again.push_back(top);  // fresh entry of an already-exact tester
                continue;
            }
            visited_round_[static_cast<std::size_t>(i)] = round_;
            refresh(testers, i, t);
            const double v = cache_[static_cast<std::size_t>(i)].value;
            if (v < best) {
                best = v;
                ties.clear();
                ties.push_back(i);
            } else if (v == best) {
                ties.push_back(i);
            }
        }
        for (const auto& e : live_again) kappa_heap_.push(e);

        std::sort(ties.begin(), ties.end());
        return rotate_sorted(ties, rr_pointer);
    }

    // The stepped tester's state changed; re-cache it at the post-step time.
    void on_stepped(const std::vector<ConfigTester>& testers, int idx, std::int64_t t) {
        refresh(testers, idx, t);
        maybe_compact(testers, t);
    }

    double cached_value(int idx) const { return cache_[static_cast<std::size_t>(idx)].value; }

private:
    struct Cache {
        double value = 0.0;
        std::int64_t t_c = 0;
        bool floor = true;
    };

    struct KappaEntry {
        double kappa;
        int idx;
        std::uint64_t gen;
        bool operator>(const KappaEntry& o) const {
            if (kappa != o.kappa) return kappa > o.kappa;
            if (idx != o.idx) return idx > o.idx;
            return gen > o.gen;
        }
    };

    struct Event {
        std::int64_t due;
        int idx;
        std::uint64_t gen;
        bool operator>(const Event& o) const {
            if (due != o.due) return due > o.due;
            if (idx != o.idx) return idx > o.idx;
            return gen > o.gen;
        }
    };

    // Exact recompute of tester i at iteration t; updates every container.
    void refresh(const std::vector<ConfigTester>& testers, int i, std::int64_t t) {
        const ConfigTester& ct = testers[static_cast<std::size_t>(i)];
        const double kappa0 = ct.kappa0();
        Cache& c = cache_[static_cast<std::size_t>(i)];
        ++gen_[static_cast<std::size_t>(i)];

        if (ct.num_active() == 0) {
            c = Cache{kappa0, t, true};
            floor_set_.insert(i);
            return;
        }
        const TailMass tm = ct.tail_mass();
        const double integral = lcb_integral(tm, t);
        if (integral <= kappa0) {
            c = Cache{kappa0, t, true};
            floor_set_.insert(i);
            return;
        }
        c = Cache{integral, t, false};
        floor_set_.erase(i);

        const double tc = static_cast<double>(std::max<std::int64_t>(t, 2));
        kappa_heap_.push(KappaEntry{integral * std::sqrt(std::log(tc)), i,
                                    gen_[static_cast<std::size_t>(i)]});

        const std::int64_t due = next_recompute_due(tm, integral, kappa0, t);
        if (due < std::numeric_limits<std::int64_t>::max()) {
            events_.push(Event{due, i, gen_[static_cast<std::size_t>(i)]});
            ++event_pushes_;
        }
    }

    // Earliest iteration at which the cached lower bound shape may break:
    // the first death among currently-alive levels, or the point where
    // smooth sqrt(ln) decay alone could pull the bound down to kappa0.
    static std::int64_t next_recompute_due(const TailMass& tm, double value, double kappa0,
                                           std::int64_t t) {
        std::int64_t due = std::numeric_limits<std::int64_t>::max();
        for (const auto& lm : tm.levels) {
            if (confidence_margin(lm.level, tm.r, t) <= 0.5)
                due = std::min(due, margin_death_iteration(lm.level, tm.r));
        }
        const double ratio = value / kappa0;
        const double ln_target =
            std::log(static_cast<double>(std::max<std::int64_t>(t, 2))) * ratio * ratio;
        if (ln_target <= 43.0) {
            const auto smooth = static_cast<std::int64_t>(std::exp(ln_target));
            due = std::min(due, std::max(t + 1, smooth));
        }
        return std::max(due, t + 1);
    }

    void process_due_events(const std::vector<ConfigTester>& testers, std::int64_t t) {
        while (!events_.empty() && events_.top().due <= t) {
            const Event e = events_.top();
            events_.pop();
            if (e.gen != gen_[static_cast<std::size_t>(e.idx)]) continue;
            refresh(testers, e.idx, t);
        }
    }

    void skip_stale_kappa() {
        while (!kappa_heap_.empty() &&
               kappa_heap_.top().gen != gen_[static_cast<std::size_t>(kappa_heap_.top().idx)])
            kappa_heap_.pop();
    }

    void maybe_compact(const std::vector<ConfigTester>& testers, std::int64_t t) {
        const std::size_t n = testers.size();
        const std::size_t limit = 64 + 6 * n;
        if (kappa_heap_.size() > limit) {
            kappa_heap_ = {};
            for (std::size_t i = 0; i < n; ++i) {
                const Cache& c = cache_[i];
                if (c.floor) continue;
                const double tc = static_cast<double>(std::max<std::int64_t>(c.t_c, 2));
                kappa_heap_.push(KappaEntry{c.value * std::sqrt(std::log(tc)),
                                            static_cast<int>(i), gen_[i]});
            }
        }
        if (event_pushes_ > limit && events_.size() > limit) {
            events_ = {};
            event_pushes_ = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (cache_[i].floor) continue;
                refresh(testers, static_cast<int>(i), t);
            }
        }
    }

    // First element of the sorted set >= pointer (cyclically); advances it.
    static int rotate_set(const std::set<int>& s, std::int64_t& rr_pointer) {
        auto it = s.lower_bound(static_cast<int>(rr_pointer));
        if (it == s.end()) it = s.begin();
        rr_pointer = *it + 1;
        return *it;
    }

    static int rotate_sorted(const std::vector<int>& sorted, std::int64_t& rr_pointer) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), static_cast<int>(rr_pointer));
        if (it == sorted.end()) it = sorted.begin();
        rr_pointer = *it + 1;
        return *it;
    }

    std::vector<Cache> cache_;
    std::vector<std::uint64_t> gen_;
    std::vector<std::uint64_t> visited_round_;
    std::uint64_t round_ = 0;
    std::set<int> floor_set_;
    std::priority_queue<KappaEntry, std::vector<KappaEntry>, std::greater<KappaEntry>> kappa_heap_;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events_;
    std::size_t event_pushes_ = 0;
};

}  // namespace spc
