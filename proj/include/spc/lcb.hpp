#pragma once
/*
  Lower confidence bound on a configuration's mean runtime from
  right-censored (capped) observations.

  Given r capped samples with empirical CDF G, the bound is the expectation
  of a CDF obtained by shrinking the survival function toward zero:

      L = integral_0^inf  shrink(1 - G(x), r, t) dx,

  where for a tail probability p at level k = floor(log2(1/p)),

      shrink(p, r, t) = p / (1 + margin(k, r, t))   if margin <= 1/2,
                        0                           otherwise,
      margin(k, r, t) = sqrt(9 * 2^k * ln(k t) / r).

  The margin widens geometrically for smaller tail probabilities, so the
  CDF is shrunk most aggressively where it is least constrained by data.
  G is a step function, so L is a finite sum computable in O(r) from the
  sorted sample values.

  Conventions baked in here (callers rely on them):
    - k is clamped to >= 1 (p = 1 would give k = 0 and ln(k t) = ln t is
      fine, but k = 0 makes the k*t product degenerate at t = 1; shrinking
      with k = 1 instead only lowers the bound, so it stays valid).
    - t is clamped to >= 2 so ln(k t) > 0.
    - The bound is floored at kappa0, the smallest possible runtime.
*/

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace spc {

// floor(log2(1/p)) clamped to >= 1.
inline int tail_level(double p) {
    return std::max(1, static_cast<int>(std::floor(std::log2(1.0 / p))));
}

// Confidence margin sqrt(9 * 2^k * ln(k t) / r). Overflows gracefully to
// +inf for huge k, which downstream code treats as "margin > 1/2".
inline double confidence_margin(int k, std::int64_t r, std::int64_t t) {
    if (k < 1) throw std::invalid_argument("confidence_margin: level must be >= 1");
    if (r < 1) throw std::invalid_argument("confidence_margin: sample count must be >= 1");
    const double tc = static_cast<double>(std::max<std::int64_t>(t, 2));
    const double pow2k = std::ldexp(1.0, std::min(k, 2000));
    return std::sqrt(9.0 * pow2k * std::log(static_cast<double>(k) * tc) /
                     static_cast<double>(r));
}

// Shrunk tail probability; 0 once the margin exceeds 1/2. Always <= p.
inline double scaled_tail(double p, std::int64_t r, std::int64_t t) {
    if (!(p > 0.0) || p > 1.0)
        throw std::invalid_argument("scaled_tail: p must be in (0, 1]");
    const double m = confidence_margin(tail_level(p), r, t);
    return m <= 0.5 ? p / (1.0 + m) : 0.0;
}

// Sorted multiset of the latest capped runtimes of a configuration's
// active instances.
struct EmpiricalCdf {
    std::vector<double> values;  // non-decreasing, size >= 1 for lcb()

    std::int64_t count() const { return static_cast<std::int64_t>(values.size()); }

    static EmpiricalCdf from_samples(std::vector<double> samples) {
        std::sort(samples.begin(), samples.end());
        return EmpiricalCdf{std::move(samples)};
    }
};

struct LcbValue {
    double bound = 0.0;
    std::int64_t r = 0;
    std::int64_t t = 0;
};

// Tail mass of the CDF grouped by level: mass[k] is the integral of
// 1 - G(x) restricted to segments whose tail probability has level k.
// Grouping by level lets the bound be re-evaluated at a new iteration t
// in O(#levels) instead of O(r), since t enters only through the margin.
struct LevelMass {
    int level = 0;
    double mass = 0.0;
};

struct TailMass {
    std::vector<LevelMass> levels;  // ascending level
    std::int64_t r = 0;
};

namespace detail {

// Walks (value, multiplicity) pairs in ascending value order and
// accumulates segment mass into per-level buckets. Levels come out
// ascending because the tail probability only decreases along the walk.
class TailMassBuilder {
public:
    explicit TailMassBuilder(std::int64_t r) : r_(r), remaining_(r) {}

    void add(double value, std::int64_t multiplicity) {
        const double width = value - prev_;
        if (width > 0.0 && remaining_ > 0) {
            const double p = static_cast<double>(remaining_) / static_cast<double>(r_);
            const int k = tail_level(p);
            if (!out_.levels.empty() && out_.levels.back().level == k)
                out_.levels.back().mass += width * p;
            else
                out_.levels.push_back({k, width * p});
        }
        prev_ = value;
        remaining_ -= multiplicity;
    }

    TailMass finish() {
        out_.r = r_;
        return std::move(out_);
    }

private:
    std::int64_t r_;
    std::int64_t remaining_;
    double prev_ = 0.0;
    TailMass out_;
};

}  // namespace detail

inline TailMass tail_mass_from_sorted(const std::vector<double>& sorted_values) {
    detail::TailMassBuilder b(static_cast<std::int64_t>(sorted_values.size()));
    std::size_t i = 0;
    while (i < sorted_values.size()) {
        std::size_t j = i;
        while (j < sorted_values.size() && sorted_values[j] == sorted_values[i]) ++j;
        b.add(sorted_values[i], static_cast<std::int64_t>(j - i));
        i = j;
    }
    return b.finish();
}

// The shrunk expectation, before the kappa0 floor.
inline double lcb_integral(const TailMass& tm, std::int64_t t) {
    double sum = 0.0;
    for (const auto& lm : tm.levels) {
        const double m = confidence_margin(lm.level, tm.r, t);
        if (m <= 0.5) sum += lm.mass / (1.0 + m);
    }
    return sum;
}

inline double lcb_from_mass(const TailMass& tm, std::int64_t t, double kappa0) {
    return std::max(kappa0, lcb_integral(tm, t));
}

// L(G, r, t) with the kappa0 floor. O(r) given sorted values.
inline LcbValue lcb(const EmpiricalCdf& cdf, std::int64_t t, double kappa0) {
    if (cdf.values.empty())
        throw std::invalid_argument("lcb: empty CDF (use kappa0 directly for r = 0)");
    const TailMass tm = tail_mass_from_sorted(cdf.values);
    return LcbValue{lcb_from_mass(tm, t, kappa0), cdf.count(), t};
}

inline double capped_mean(const EmpiricalCdf& cdf) {
    if (cdf.values.empty()) throw std::invalid_argument("capped_mean: empty CDF");
    double s = 0.0;
    for (double v : cdf.values) s += v;
    return s / static_cast<double>(cdf.count());
}

// First iteration at which margin(k, r, .) exceeds 1/2, i.e. the level
// stops contributing to the bound. Returns INT64_MAX when out of reach.
inline std::int64_t margin_death_iteration(int k, std::int64_t r) {
    constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();
    const double x = static_cast<double>(r) / (36.0 * std::ldexp(1.0, std::min(k, 2000)));
    if (x > 43.0) return kNever;
    const double bound = std::exp(x) / static_cast<double>(k);
    if (!(bound < 4.0e18)) return kNever;
    std::int64_t td = static_cast<std::int64_t>(std::floor(bound)) + 1;
    // Align exactly with confidence_margin's floating-point comparisons.
    while (td > 3 && confidence_margin(k, r, td - 1) > 0.5) --td;
    while (confidence_margin(k, r, td) <= 0.5) ++td;
    return td;
}

}  // namespace spc
