#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "spc/process_runner.hpp"
#include "spc/runners.hpp"
#include "support.hpp"

using namespace spc;
using Catch::Approx;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("load_matrix: happy path") {
    const auto path = write_temp("spc_m1.csv",
                                 "config_id,i1\n"
                                 "fast,0.1\n"
                                 "slow,1.0\n");
    const RuntimeMatrix m = load_matrix(path, 0.001);
    REQUIRE(m.num_configs() == 2);
    REQUIRE(m.num_instances() == 1);
    CHECK(m.config_ids[0] == "fast");
    CHECK(m.true_runtime(0, 0) == 0.1);
    CHECK(m.true_runtime(1, 0) == 1.0);
}

TEST_CASE("load_matrix: errors") {
    const auto below = write_temp("spc_m2.csv", "config_id,i1\nc0,0.0005\n");
    CHECK_THROWS_WITH(load_matrix(below, 0.001), Catch::Matchers::ContainsSubstring("kappa0"));

    const auto ragged = write_temp("spc_m3.csv", "config_id,i1,i2\nc0,0.5\n");
    CHECK_THROWS_WITH(load_matrix(ragged, 0.001), Catch::Matchers::ContainsSubstring("row 2"));

    const auto textual = write_temp("spc_m4.csv", "config_id,i1\nc0,abc\n");
    CHECK_THROWS_WITH(load_matrix(textual, 0.001),
                      Catch::Matchers::ContainsSubstring("non-numeric"));

    CHECK_THROWS_WITH(load_matrix("/nonexistent/m.csv", 0.001),
                      Catch::Matchers::ContainsSubstring("cannot open"));
}

TEST_CASE("run_simulated: min rule and charge models") {
    auto m = testsupport::constant_matrix({0.1});

    const RunResult capped = run_simulated(m, 0, 0, 0.064, 0.0, ChargeMode::NonResuming);
    CHECK(capped.measured == 0.064);
    CHECK_FALSE(capped.completed);
    CHECK(capped.charged == 0.064);

    const RunResult resumed = run_simulated(m, 0, 0, 0.128, 0.064, ChargeMode::Resuming);
    CHECK(resumed.measured == 0.1);
    CHECK(resumed.completed);
    CHECK(resumed.charged == Approx(0.036).epsilon(1e-12));

    CHECK_THROWS_AS(run_simulated(m, 5, 0, 0.1, 0.0, ChargeMode::NonResuming), SourceError);
    CHECK_THROWS_AS(run_simulated(m, 0, 9, 0.1, 0.0, ChargeMode::NonResuming), SourceError);
}

TEST_CASE("charge accounting matches a brute-force replay") {
    // Non-resuming: total charge across caps c, 2c, ... equals
    // sum_a min(true, cap_a). Resuming: total equals min(true, last cap).
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto m = testsupport::constant_matrix({1.0});
    for (int trial = 0; trial < 200; ++trial) {
        const double truth = 0.001 * std::pow(4000.0, U(rng));
        m.runtimes[0][0] = truth;
        const int levels = 1 + static_cast<int>(rng() % 14);
        double cap = 0.001;
        double prev = 0.0;
        double nonresuming_total = 0.0, resuming_total = 0.0, oracle = 0.0;
        for (int a = 0; a < levels; ++a) {
            nonresuming_total += run_simulated(m, 0, 0, cap, prev, ChargeMode::NonResuming).charged;
            resuming_total += run_simulated(m, 0, 0, cap, prev, ChargeMode::Resuming).charged;
            oracle += std::min(truth, cap);
            prev = cap;
            cap *= 2.0;
        }
        REQUIRE(nonresuming_total == Approx(oracle).epsilon(1e-12));
        REQUIRE(resuming_total == Approx(std::min(truth, prev)).epsilon(1e-12));
    }
}

TEST_CASE("instance stream: determinism and degenerate pool") {
    InstanceStream a(derive_stream_seed(9, "cfg"), 20);
    InstanceStream b(derive_stream_seed(9, "cfg"), 20);
    for (int i = 0; i < 1000; ++i) {
        const auto da = a.next();
        const auto db = b.next();
        REQUIRE(da.pool_index == db.pool_index);
        REQUIRE(da.run_seed == db.run_seed);
    }
    // pool of one: always instance 0
    InstanceStream single(123456, 1);
    for (int i = 0; i < 50; ++i) CHECK(single.next().pool_index == 0);
    CHECK_THROWS_AS(InstanceStream(1, 0), std::invalid_argument);
    // seekable: at(ordinal) equals the sequential draw
    InstanceStream c(derive_stream_seed(9, "cfg"), 20);
    const auto d3 = InstanceStream::draw(derive_stream_seed(9, "cfg"), 3, 20);
    c.next();
    c.next();
    const auto s3 = c.next();
    CHECK(d3.pool_index == s3.pool_index);
    CHECK(d3.run_seed == s3.run_seed);
}

TEST_CASE("instance stream: chi-square uniformity") {
    const int pool = 20;
    const int draws = 100000;
    InstanceStream s(derive_stream_seed(404, "uniformity"), pool);
    std::vector<std::int64_t> counts(pool, 0);
    for (int i = 0; i < draws; ++i) counts[static_cast<std::size_t>(s.next().pool_index)]++;
    const double expected = static_cast<double>(draws) / pool;
    double chi2 = 0.0;
    for (auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    // critical value for 19 degrees of freedom at the 1% level
    CHECK(chi2 < 36.191);
}

TEST_CASE("run_process: completion, cap kill, spawn failure") {
    const RunResult done = run_process("sleep 0.1", "x", 1, 1.0);
    CHECK(done.completed);
    CHECK(done.run_ok);
    CHECK(done.measured == Approx(0.1).margin(0.05));

    const RunResult killed = run_process("sleep 0.5", "x", 1, 0.05);
    CHECK_FALSE(killed.completed);
    CHECK(killed.measured == 0.05);

    CHECK_THROWS_AS(run_process("/definitely/not/a/binary", "x", 1, 0.5), SourceError);

    // nonzero exit: completed under the default policy, flagged not-ok
    const RunResult failed = run_process("exit 3", "x", 1, 0.5);
    CHECK(failed.completed);
    CHECK_FALSE(failed.run_ok);
    const RunResult as_timeout =
        run_process("exit 3", "x", 1, 0.5, NonzeroExitPolicy::TreatAsTimeout);
    CHECK_FALSE(as_timeout.completed);
}

TEST_CASE("placeholder substitution") {
    CHECK(substitute_placeholders("solver {instance} -s {seed} -t {cutoff}", "a.cnf", 42, 1.5) ==
          "solver a.cnf -s 42 -t 1.5");
}
