#pragma once
/*
  Execution backends and the per-tester instance stream.

  A RuntimeSource answers "run configuration i on instance j with cap
  theta" and reports what the run cost under the active charge model:
    - non-resuming: every attempt is paid in full (charged = measured);
    - resuming: a re-attempt at a larger cap pays only the increment
      beyond the previous cap.

  The simulated source reads true runtimes from a dense matrix and is
  bit-deterministic. Instance streams are counter-based: the draw for
  ordinal L is a pure function of (master seed, config id, L), so a
  stream's only state is its cursor and replay is exact.
*/

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace spc {

enum class ChargeMode { NonResuming, Resuming };

inline const char* to_string(ChargeMode m) {
    return m == ChargeMode::NonResuming ? "non-resuming" : "resuming";
}

inline ChargeMode charge_mode_from_string(const std::string& s) {
    if (s == "non-resuming") return ChargeMode::NonResuming;
    if (s == "resuming") return ChargeMode::Resuming;
    throw std::invalid_argument("unknown charge mode: " + s);
}

struct RunResult {
    double measured = 0.0;   // capped wall-clock / simulated runtime
    bool completed = false;  // finished within the cap
    double charged = 0.0;    // cost under the charge model
    bool run_ok = true;      // process exited cleanly (real backend only)
};

// Thrown by backends; the tester wraps it with (config, instance, cap).
struct SourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class RuntimeSource {
public:
    virtual ~RuntimeSource() = default;
    // prev_cap is the largest cap this (config, ordinal) pair was attempted
    // with before (0 on the first attempt).
    virtual RunResult run(std::int64_t config_index, const std::string& instance_id,
                          std::uint64_t run_seed, double cap, double prev_cap) = 0;
};

// ---------------------------------------------------------------------------
// Runtime matrix

struct RuntimeMatrix {
    std::vector<std::string> config_ids;
    std::vector<std::string> instance_ids;
    std::vector<std::vector<double>> runtimes;  // [config][instance], all >= kappa0

    std::int64_t num_configs() const { return static_cast<std::int64_t>(config_ids.size()); }
    std::int64_t num_instances() const { return static_cast<std::int64_t>(instance_ids.size()); }

    double true_runtime(std::int64_t config, std::int64_t instance) const {
        if (config < 0 || config >= num_configs())
            throw SourceError("unknown config index " + std::to_string(config));
        if (instance < 0 || instance >= num_instances())
            throw SourceError("unknown instance index " + std::to_string(instance));
        return runtimes[static_cast<std::size_t>(config)][static_cast<std::size_t>(instance)];
    }

    std::int64_t config_index(const std::string& id) const {
        for (std::int64_t i = 0; i < num_configs(); ++i)
            if (config_ids[static_cast<std::size_t>(i)] == id) return i;
        throw SourceError("unknown config id " + id);
    }
};

inline void validate_matrix(const RuntimeMatrix& m, double kappa0) {
    for (std::size_t i = 0; i < m.runtimes.size(); ++i) {
        if (m.runtimes[i].size() != m.instance_ids.size())
            throw std::runtime_error("matrix row " + std::to_string(i + 1) + " is ragged");
        for (std::size_t j = 0; j < m.runtimes[i].size(); ++j) {
            const double v = m.runtimes[i][j];
            if (!(v >= kappa0) || !std::isfinite(v))
                throw std::runtime_error("matrix entry (" + m.config_ids[i] + ", " +
                                         m.instance_ids[j] + ") = " + std::to_string(v) +
                                         " violates the kappa0 lower bound");
        }
    }
}

// CSV format: header "config_id,<instance_1>,...", then one row per
// configuration with runtimes in decimal seconds.
inline RuntimeMatrix load_matrix(const std::string& path, double kappa0) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path);

    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            std::size_t b = 0;
            while (b < cell.size() && cell[b] == ' ') ++b;
            out.push_back(cell.substr(b));
        }
        return out;
    };

    RuntimeMatrix m;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("matrix file is empty: " + path);
    auto header = split(line);
    if (header.size() < 2 || header[0] != "config_id")
        throw std::runtime_error("matrix header must start with 'config_id': " + path);
    m.instance_ids.assign(header.begin() + 1, header.end());

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != header.size())
            throw std::runtime_error("matrix row " + std::to_string(row) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        m.config_ids.push_back(cells[0]);
        std::vector<double> vals;
        vals.reserve(cells.size() - 1);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(cells[c], &pos);
                if (pos != cells[c].size()) throw std::invalid_argument(cells[c]);
                vals.push_back(v);
            } catch (const std::exception&) {
                throw std::runtime_error("matrix row " + std::to_string(row) + ", column " +
                                         std::to_string(c + 1) + ": non-numeric cell '" +
                                         cells[c] + "'");
            }
        }
        m.runtimes.push_back(std::move(vals));
    }
    if (m.config_ids.empty()) throw std::runtime_error("matrix has no configuration rows: " + path);
    validate_matrix(m, kappa0);
    return m;
}

// R(i,j,theta) = min(R(i,j), theta) with the charge model applied.
inline RunResult run_simulated(const RuntimeMatrix& m, std::int64_t config,
                               std::int64_t instance, double cap, double prev_cap,
                               ChargeMode mode) {
    if (!(cap > 0.0)) throw std::invalid_argument("run_simulated: cap must be > 0");
    const double truth = m.true_runtime(config, instance);
    RunResult res;
    res.measured = std::min(truth, cap);
    res.completed = truth <= cap;
    res.charged = mode == ChargeMode::NonResuming
                      ? res.measured
                      : std::min(truth, cap) - std::min(truth, prev_cap);
    return res;
}

class SimulatedSource : public RuntimeSource {
public:
    SimulatedSource(const RuntimeMatrix& matrix, ChargeMode mode)
        : matrix_(matrix), mode_(mode) {
        for (std::int64_t j = 0; j < matrix.num_instances(); ++j)
            instance_index_[matrix.instance_ids[static_cast<std::size_t>(j)]] = j;
    }

    RunResult run(std::int64_t config_index, const std::string& instance_id,
                  std::uint64_t /*run_seed*/, double cap, double prev_cap) override {
        auto it = instance_index_.find(instance_id);
        if (it == instance_index_.end()) throw SourceError("unknown instance id " + instance_id);
        return run_simulated(matrix_, config_index, it->second, cap, prev_cap, mode_);
    }

    const RuntimeMatrix& matrix() const { return matrix_; }
    ChargeMode mode() const { return mode_; }

private:
    const RuntimeMatrix& matrix_;
    ChargeMode mode_;
    std::unordered_map<std::string, std::int64_t> instance_index_;
};

// ---------------------------------------------------------------------------
// Instance stream

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_string(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

// Independent per-tester stream seed, reproducible from the master seed.
inline std::uint64_t derive_stream_seed(std::uint64_t master_seed, const std::string& config_id) {
    return mix64(master_seed ^ mix64(hash_string(config_id)));
}

struct InstanceDraw {
    std::int64_t pool_index = 0;
    std::uint64_t run_seed = 0;
};

// An i.i.d. uniform-with-replacement stream over a finite instance pool.
// The draw for ordinal L is a pure function of (stream seed, L).
class InstanceStream {
public:
    InstanceStream() = default;
    InstanceStream(std::uint64_t stream_seed, std::int64_t pool_size, std::int64_t cursor = 0)
        : seed_(stream_seed), pool_size_(pool_size), cursor_(cursor) {
        if (pool_size_ < 1) throw std::invalid_argument("instance pool is empty");
    }

    static InstanceDraw draw(std::uint64_t stream_seed, std::int64_t ordinal,
                             std::int64_t pool_size) {
        if (pool_size < 1) throw std::invalid_argument("instance pool is empty");
        const std::uint64_t base =
            stream_seed + static_cast<std::uint64_t>(ordinal) * 0x9E3779B97F4A7C15ull;
        InstanceDraw d;
        d.pool_index = static_cast<std::int64_t>(mix64(base) %
                                                 static_cast<std::uint64_t>(pool_size));
        d.run_seed = mix64(base ^ 0xD6E8FEB86659FD93ull);
        return d;
    }

    InstanceDraw next() {
        ++cursor_;
        return draw(seed_, cursor_, pool_size_);
    }

    InstanceDraw at(std::int64_t ordinal) const { return draw(seed_, ordinal, pool_size_); }

    std::uint64_t seed() const { return seed_; }
    std::int64_t cursor() const { return cursor_; }
    std::int64_t pool_size() const { return pool_size_; }

private:
    std::uint64_t seed_ = 0;
    std::int64_t pool_size_ = 1;
    std::int64_t cursor_ = 0;
};

}  // namespace spc
