#pragma once
/*
  Offline analyses over runtime matrices and event logs.

  - eps_delta_analysis: for each configuration and each delta, the
    smallest epsilon for which the configuration is still
    (epsilon, delta)-optimal on the matrix: cap each row at its empirical
    (1 - delta)-quantile, compare the capped mean against the best
    uncapped row mean.

  - trajectory_from_events: anytime trajectory (charged time, incumbent,
    incumbent capped mean) at requested virtual-time grid points, by
    replaying the event log. The incumbent at a grid point equals the
    winner rule applied to the log prefix.
*/

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spc/event_log.hpp"
#include "spc/runners.hpp"

namespace spc {

struct EpsDeltaRow {
    double delta = 0.0;
    std::string config_id;
    double eps_min = 0.0;
};

// Smallest observed cap theta* with empirical Pr(R > theta*) <= delta,
// i.e. the empirical (1 - delta)-quantile of the row.
inline double empirical_cap_for_delta(const std::vector<double>& sorted_row, double delta) {
    const std::int64_t m = static_cast<std::int64_t>(sorted_row.size());
    for (std::int64_t i = 0; i < m; ++i) {
        // entries strictly above sorted_row[i]
        std::int64_t gt = m - (std::int64_t)(std::upper_bound(sorted_row.begin(),
                                                              sorted_row.end(), sorted_row[i]) -
                                             sorted_row.begin());
        if (static_cast<double>(gt) <= delta * static_cast<double>(m)) return sorted_row[i];
    }
    return sorted_row.back();
}

inline std::vector<EpsDeltaRow> eps_delta_analysis(const RuntimeMatrix& matrix,
                                                   const std::vector<double>& deltas,
                                                   std::optional<double> max_cap = std::nullopt) {
    for (double d : deltas)
        if (!(d > 0.0) || !(d < 1.0))
            throw std::invalid_argument("analysis delta must be in (0, 1)");

    // Apply the never-exceed cap first, if configured.
    std::vector<std::vector<double>> rows = matrix.runtimes;
    if (max_cap)
        for (auto& row : rows)
            for (auto& v : row) v = std::min(v, *max_cap);

    double opt = std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
        double s = 0.0;
        for (double v : row) s += v;
        opt = std::min(opt, s / static_cast<double>(row.size()));
    }

    std::vector<EpsDeltaRow> out;
    for (double delta : deltas) {
        for (std::size_t c = 0; c < rows.size(); ++c) {
            std::vector<double> sorted = rows[c];
            std::sort(sorted.begin(), sorted.end());
            const double theta = empirical_cap_for_delta(sorted, delta);
            double capped_sum = 0.0;
            for (double v : sorted) capped_sum += std::min(v, theta);
            const double capped_mean = capped_sum / static_cast<double>(sorted.size());
            out.push_back(EpsDeltaRow{delta, matrix.config_ids[c],
                                      std::max(0.0, capped_mean / opt - 1.0)});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

struct TrajectoryRow {
    double charged_s = 0.0;
    std::string incumbent;
    double incumbent_mean_s = 0.0;
};

namespace detail {

// Reconstructs per-config tester facts (r, latest value per ordinal) from
// the event stream alone. Ordinals are recoverable because an activation
// shows up as an r increment and everything else pops the FIFO head.
class LogReplayer {
public:
    void apply(const EventRecord& e) {
        order_index(e.config);
        State& st = states_[e.config];
        std::int64_t ordinal;
        if (e.r > st.r) {
            st.r = e.r;
            ordinal = e.r;
            st.latest.push_back(0.0);
        } else {
            if (st.queue.empty())
                throw std::runtime_error("malformed event log: pop from empty queue for " +
                                         e.config);
            ordinal = st.queue.front();
            st.queue.pop_front();
        }
        st.latest[static_cast<std::size_t>(ordinal - 1)] = e.measured_s;
        if (!e.completed) st.queue.push_back(ordinal);
    }

    // Winner rule: max r, then smaller capped mean, then earlier first
    // appearance (matching scheduler index order at startup ties).
    std::pair<std::string, double> incumbent() const {
        std::string best;
        std::int64_t best_r = -1;
        double best_mean = std::numeric_limits<double>::infinity();
        for (const auto& id : order_) {
            const State& st = states_.at(id);
            double mean = std::numeric_limits<double>::infinity();
            if (st.r > 0) {
                double s = 0.0;
                for (double v : st.latest) s += v;
                mean = s / static_cast<double>(st.r);
            }
            if (st.r > best_r || (st.r == best_r && mean < best_mean)) {
                best = id;
                best_r = st.r;
                best_mean = mean;
            }
        }
        return {best, best_r > 0 ? best_mean : 0.0};
    }

    std::size_t order_index(const std::string& id) {
        for (std::size_t i = 0; i < order_.size(); ++i)
            if (order_[i] == id) return i;
        order_.push_back(id);
        return order_.size() - 1;
    }

private:
    struct State {
        std::int64_t r = 0;
        std::vector<double> latest;  // ordinal-indexed latest capped value
        std::deque<std::int64_t> queue;
    };
    std::map<std::string, State> states_;
    std::vector<std::string> order_;
};

}  // namespace detail

inline std::vector<TrajectoryRow> trajectory_from_events(const std::vector<EventRecord>& events,
                                                         std::vector<double> grid) {
    std::sort(grid.begin(), grid.end());
    std::vector<TrajectoryRow> rows;
    detail::LogReplayer rp;
    std::size_t next = 0;
    for (double g : grid) {
        while (next < events.size() && events[next].charged_total_s <= g) {
            rp.apply(events[next]);
            ++next;
        }
        auto [id, mean] = rp.incumbent();
        rows.push_back(TrajectoryRow{g, id, mean});
    }
    return rows;
}

}  // namespace spc
