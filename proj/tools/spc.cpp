// Command-line surface for the runtime-configuration search engine:
// run/resume the anytime search, emit event logs and trajectories, compute
// optimality certificates, run the fixed-queue baseline and the
// many-configurations pool, and produce (epsilon, delta)-optimality tables
// for a runtime matrix.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spc/analysis.hpp"
#include "spc/baseline.hpp"
#include "spc/process_runner.hpp"
#include "spc/quantile_pool.hpp"
#include "spc/scheduler.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::atomic<bool> g_interrupted{false};

void handle_signal(int) { g_interrupted.store(true); }

struct BackendConfig {
    std::string matrix_path;
    std::string command_template;
    std::string configs_file;
    std::string instances_dir;

    bool simulated() const { return !matrix_path.empty(); }
};

struct RunFlags {
    BackendConfig backend;
    double kappa0 = 0.001;
    double multiplier = 2.0;
    std::uint64_t seed = 0;
    double budget_seconds = 0.0;
    std::string checkpoint_path;
    double checkpoint_every = 0.0;
    std::string charge_mode = "non-resuming";
    double max_cap = 0.0;  // 0 = unset
    std::string output_dir = "spc-out";
};

void add_backend_flags(CLI::App* cmd, BackendConfig& b) {
    cmd->add_option("--matrix", b.matrix_path, "runtime matrix CSV (simulated backend)");
    cmd->add_option("--command", b.command_template,
                    "command template with {instance} {seed} {cutoff} (real backend)");
    cmd->add_option("--configs", b.configs_file,
                    "file with one 'id<TAB>command template' line per configuration");
    cmd->add_option("--instances", b.instances_dir, "instance directory (real backend)");
}

void add_run_flags(CLI::App* cmd, RunFlags& f) {
    add_backend_flags(cmd, f.backend);
    cmd->add_option("--kappa0", f.kappa0, "guaranteed minimum runtime, seconds");
    cmd->add_option("--multiplier", f.multiplier, "captime multiplier")->default_val(2.0);
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--budget-seconds", f.budget_seconds,
                    "virtual budget (simulated) or wall-clock budget (real)");
    cmd->add_option("--checkpoint", f.checkpoint_path, "checkpoint file path");
    cmd->add_option("--checkpoint-every", f.checkpoint_every,
                    "checkpoint interval in budget seconds");
    cmd->add_option("--charge-mode", f.charge_mode, "non-resuming or resuming")
        ->check(CLI::IsMember({"non-resuming", "resuming"}))
        ->default_val("non-resuming");
    cmd->add_option("--max-cap", f.max_cap, "global never-exceed cap, seconds (unset = off)");
    cmd->add_option("--output", f.output_dir, "output directory")->default_val("spc-out");
}

std::vector<std::string> list_instances(const std::string& dir) {
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) out.push_back(entry.path().string());
    std::sort(out.begin(), out.end());
    if (out.empty()) throw std::runtime_error("no instance files under " + dir);
    return out;
}

struct Backend {
    std::vector<std::string> config_ids;
    std::vector<std::string> instance_ids;
    std::unique_ptr<spc::RuntimeSource> source;
    std::optional<spc::RuntimeMatrix> matrix;  // kept alive for the simulated source
    bool simulated = false;
};

Backend open_backend(const BackendConfig& b, double kappa0, const std::string& charge_mode) {
    Backend out;
    if (b.simulated()) {
        out.simulated = true;
        out.matrix = spc::load_matrix(b.matrix_path, kappa0);
        out.config_ids = out.matrix->config_ids;
        out.instance_ids = out.matrix->instance_ids;
        out.source = std::make_unique<spc::SimulatedSource>(
            *out.matrix, spc::charge_mode_from_string(charge_mode));
        return out;
    }
    if (b.instances_dir.empty())
        throw std::runtime_error("real backend needs --instances (or use --matrix)");
    out.instance_ids = list_instances(b.instances_dir);
    std::vector<std::string> templates;
    if (!b.configs_file.empty()) {
        std::ifstream in(b.configs_file);
        if (!in) throw std::runtime_error("cannot open configs file: " + b.configs_file);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos) {
                out.config_ids.push_back("cfg" + std::to_string(out.config_ids.size()));
                templates.push_back(line);
            } else {
                out.config_ids.push_back(line.substr(0, tab));
                templates.push_back(line.substr(tab + 1));
            }
        }
        if (templates.empty()) throw std::runtime_error("configs file is empty");
    } else if (!b.command_template.empty()) {
        out.config_ids.push_back("cfg0");
        templates.push_back(b.command_template);
    } else {
        throw std::runtime_error("provide --matrix, --command or --configs");
    }
    out.source = std::make_unique<spc::ProcessSource>(std::move(templates));
    return out;
}

ordered_json report_to_json(const spc::RunReport& rep, const std::string& stop_reason) {
    ordered_json j;
    j["winner"] = rep.winner;
    j["t"] = rep.t;
    j["charged_total_s"] = rep.charged_total_s;
    j["stop_reason"] = stop_reason;
    ordered_json configs = ordered_json::array();
    for (const auto& c : rep.configs) {
        ordered_json cj;
        cj["id"] = c.id;
        cj["r"] = c.r;
        cj["lcb_s"] = c.lcb_s;
        cj["capped_mean_s"] = c.capped_mean_s;
        cj["charged_s"] = c.charged_s;
        configs.push_back(std::move(cj));
    }
    j["configs"] = std::move(configs);
    return j;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

// shortest round-trip representation, matching the JSON outputs
std::string fmt(double x) { return json(x).dump(); }

const char* stop_reason_name(spc::StopReason r) {
    switch (r) {
        case spc::StopReason::BudgetExhausted: return "budget-exhausted";
        case spc::StopReason::Interrupted: return "interrupted";
        default: return "step-limit";
    }
}

// Shared by run and resume once a scheduler exists.
int drive_run(spc::Scheduler& sched, Backend& backend, const RunFlags& flags,
              const std::string& checkpoint_path, bool append_events) {
    fs::create_directories(flags.output_dir);
    const std::string events_path = flags.output_dir + "/events.jsonl";
    const std::string report_path = flags.output_dir + "/report.json";

    std::ofstream events(events_path, append_events ? std::ios::app : std::ios::trunc);
    if (!events) throw std::runtime_error("cannot write " + events_path);
    sched.set_event_sink([&](const spc::EventRecord& e) { events << event_to_jsonl(e) << "\n"; });

    auto write_checkpoint = [&](const spc::Scheduler& s) {
        ordered_json doc = s.snapshot();
        ordered_json run;
        run["budget_seconds"] = flags.budget_seconds;
        run["budget_kind"] = backend.simulated ? "virtual" : "wall";
        run["checkpoint_every"] = flags.checkpoint_every;
        run["matrix"] = flags.backend.matrix_path;
        run["command"] = flags.backend.command_template;
        run["configs"] = flags.backend.configs_file;
        run["instances"] = flags.backend.instances_dir;
        run["output"] = flags.output_dir;
        doc["run"] = std::move(run);
        write_text(checkpoint_path, doc.dump(2) + "\n");
    };

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    spc::StopReason reason;
    try {
        if (backend.simulated) {
            reason = sched.run_until_charged(flags.budget_seconds, *backend.source,
                                             &g_interrupted, flags.checkpoint_every,
                                             write_checkpoint);
        } else {
            reason = sched.run_until_wall(flags.budget_seconds, *backend.source, &g_interrupted,
                                          flags.checkpoint_every, write_checkpoint);
        }
    } catch (const std::exception&) {
        // backend failure: leave a resumable checkpoint behind
        write_checkpoint(sched);
        events.flush();
        throw;
    }

    write_checkpoint(sched);  // anytime contract: always flush a final checkpoint
    events.flush();
    const auto rep = sched.report();
    write_text(report_path, report_to_json(rep, stop_reason_name(reason)).dump(2) + "\n");
    std::cout << "winner " << rep.winner << "  t=" << rep.t
              << "  charged_total_s=" << rep.charged_total_s << "\n";
    return 0;
}

int cmd_run(const RunFlags& flags) {
    if (!(flags.budget_seconds > 0.0)) throw std::runtime_error("--budget-seconds must be > 0");
    Backend backend = open_backend(flags.backend, flags.kappa0, flags.charge_mode);
    spc::SchedulerOptions opt;
    opt.kappa0 = flags.kappa0;
    opt.multiplier = flags.multiplier;
    opt.seed = flags.seed;
    opt.charge_mode = spc::charge_mode_from_string(flags.charge_mode);
    if (flags.max_cap > 0.0) opt.max_cap = flags.max_cap;
    spc::Scheduler sched(opt, backend.config_ids, backend.instance_ids);
    const std::string ckpt = flags.checkpoint_path.empty()
                                 ? flags.output_dir + "/checkpoint.json"
                                 : flags.checkpoint_path;
    fs::create_directories(flags.output_dir);
    return drive_run(sched, backend, flags, ckpt, /*append_events=*/false);
}

int cmd_resume(RunFlags flags) {
    if (flags.checkpoint_path.empty()) throw std::runtime_error("resume needs --checkpoint");
    std::ifstream in(flags.checkpoint_path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + flags.checkpoint_path);
    json doc = json::parse(in, nullptr, true);

    // run-section values serve as defaults; explicit flags override them
    if (doc.contains("run")) {
        const auto& run = doc["run"];
        if (flags.budget_seconds <= 0.0) flags.budget_seconds = run.value("budget_seconds", 0.0);
        if (flags.checkpoint_every <= 0.0)
            flags.checkpoint_every = run.value("checkpoint_every", 0.0);
        if (flags.backend.matrix_path.empty()) flags.backend.matrix_path = run.value("matrix", "");
        if (flags.backend.command_template.empty())
            flags.backend.command_template = run.value("command", "");
        if (flags.backend.configs_file.empty())
            flags.backend.configs_file = run.value("configs", "");
        if (flags.backend.instances_dir.empty())
            flags.backend.instances_dir = run.value("instances", "");
        if (flags.output_dir == "spc-out") flags.output_dir = run.value("output", "spc-out");
    }
    if (!(flags.budget_seconds > 0.0)) throw std::runtime_error("--budget-seconds must be > 0");

    spc::Scheduler sched = spc::Scheduler::restore(doc);
    flags.kappa0 = sched.options().kappa0;
    flags.charge_mode = to_string(sched.options().charge_mode);
    Backend backend = open_backend(flags.backend, flags.kappa0, flags.charge_mode);
    if (backend.config_ids.size() != sched.testers().size())
        throw std::runtime_error("backend configuration count differs from checkpoint");
    for (std::size_t i = 0; i < backend.config_ids.size(); ++i)
        if (backend.config_ids[i] != sched.testers()[i].config_id())
            throw std::runtime_error("backend config ids differ from checkpoint");
    return drive_run(sched, backend, flags, flags.checkpoint_path, /*append_events=*/true);
}

int cmd_trajectory(const std::string& events_path, std::vector<double> grid, double grid_step,
                   double grid_max, const std::string& output) {
    std::ifstream in(events_path);
    if (!in) throw std::runtime_error("cannot open event log: " + events_path);
    std::vector<spc::EventRecord> events;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            events.push_back(spc::event_from_jsonl(line));
        } catch (const std::exception& e) {
            throw std::runtime_error("malformed event log at line " + std::to_string(lineno) +
                                     ": " + e.what());
        }
    }
    if (grid.empty() && grid_step > 0.0) {
        const double limit =
            grid_max > 0.0 ? grid_max : (events.empty() ? 0.0 : events.back().charged_total_s);
        for (double g = grid_step; g <= limit + 1e-12; g += grid_step) grid.push_back(g);
    }
    const auto rows = spc::trajectory_from_events(events, grid);
    std::ostringstream csv;
    csv << "charged_s,incumbent,incumbent_capped_mean_s\n";
    for (const auto& r : rows)
        csv << fmt(r.charged_s) << "," << r.incumbent << "," << fmt(r.incumbent_mean_s) << "\n";
    if (output.empty())
        std::cout << csv.str();
    else
        write_text(output, csv.str());
    return 0;
}

int cmd_certificate(const std::string& checkpoint_path, double epsilon, double lambda) {
    std::ifstream in(checkpoint_path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + checkpoint_path);
    spc::Scheduler sched = spc::Scheduler::restore(json::parse(in));
    const auto rep = sched.report();
    const auto& winner = rep.configs[static_cast<std::size_t>(rep.winner_index)];

    ordered_json j;
    j["winner"] = rep.winner;
    j["r_winner"] = winner.r;
    j["t"] = rep.t;
    j["epsilon"] = epsilon;
    j["lambda"] = lambda;
    if (winner.r < 1) {
        j["feasible"] = false;
        std::cout << j.dump(2) << "\n";
        std::cout << "no certificate at these parameters\n";
        return 0;
    }
    const auto cert = spc::certify_delta(winner.r, rep.t, epsilon, lambda);
    if (!cert) {
        j["feasible"] = false;
        std::cout << j.dump(2) << "\n";
        std::cout << "no certificate at these parameters\n";
        return 0;
    }
    j["feasible"] = true;
    j["delta"] = cert->delta;
    j["confidence"] = cert->confidence;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_analyze(const std::string& matrix_path, const std::vector<double>& deltas,
                double max_cap, const std::string& output) {
    const auto m = spc::load_matrix(matrix_path, 0.0);
    std::optional<double> cap;
    if (max_cap > 0.0) cap = max_cap;
    const auto rows = spc::eps_delta_analysis(m, deltas, cap);
    std::ostringstream csv;
    csv << "delta,config_id,eps_min\n";
    for (const auto& r : rows)
        csv << fmt(r.delta) << "," << r.config_id << "," << fmt(r.eps_min) << "\n";
    if (output.empty())
        std::cout << csv.str();
    else
        write_text(output, csv.str());
    return 0;
}

int cmd_baseline(const std::string& matrix_path, double kappa0, std::int64_t queue_size,
                 double epsilon, double zeta, std::int64_t beta_levels, double budget,
                 std::uint64_t seed, const std::string& output) {
    const auto m = spc::load_matrix(matrix_path, kappa0);
    if (queue_size <= 0) {
        if (!(epsilon > 0.0))
            throw std::runtime_error("provide --queue-size or (--epsilon, --zeta, --beta-levels)");
        queue_size = spc::sp_queue_size(epsilon, zeta, m.num_configs(), beta_levels);
    }
    const auto rep = spc::run_baseline(m, queue_size, kappa0, budget, seed);
    ordered_json j;
    j["queue_size"] = rep.queue_size;
    j["charged_total_s"] = rep.charged_total_s;
    ordered_json levels = ordered_json::array();
    for (const auto& lv : rep.levels) {
        ordered_json lj;
        lj["level"] = lv.level;
        lj["cap_s"] = lv.cap_s;
        lj["charged_s"] = lv.charged_s;
        ordered_json per = ordered_json::array();
        for (const auto& st : lv.per_config) {
            ordered_json sj;
            sj["config_id"] = st.config_id;
            sj["attempts"] = st.attempts;
            sj["completions"] = st.completions;
            sj["charged_s"] = st.charged_s;
            per.push_back(std::move(sj));
        }
        lj["configs"] = std::move(per);
        levels.push_back(std::move(lj));
    }
    j["levels"] = std::move(levels);
    const std::string text = j.dump(2) + "\n";
    if (output.empty())
        std::cout << text;
    else
        write_text(output, text);
    return 0;
}

// Samples one configuration from a user generator: the command is run with
// {seed} substituted and must print one config line (used verbatim as the
// configuration's command template and id).
std::string run_generator_command(const std::string& command, std::uint64_t seed) {
    const std::string cmd = spc::substitute_placeholders(command, "", seed, 0.0);
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) throw std::runtime_error("cannot run generator command");
    std::string line;
    char buf[4096];
    if (std::fgets(buf, sizeof buf, p)) line = buf;
    const int rc = ::pclose(p);
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    if (rc != 0 || line.empty())
        throw std::runtime_error("generator command produced no configuration");
    return line;
}

int cmd_pool(const std::string& matrix_path, const std::string& generator_command,
             const std::string& instances_dir, double kappa0, double multiplier,
             std::uint64_t seed, double budget, double sample_constant, int first_level,
             int max_level, const std::string& charge_mode, const std::string& output_dir) {
    if (!(budget > 0.0)) throw std::runtime_error("--budget-seconds must be > 0");

    spc::PoolOptions opt;
    opt.kappa0 = kappa0;
    opt.multiplier = multiplier;
    opt.seed = seed;
    opt.charge_mode = spc::charge_mode_from_string(charge_mode);
    opt.sample_constant = sample_constant;
    opt.first_level = first_level;
    opt.max_level = max_level;

    std::optional<spc::RuntimeMatrix> matrix;
    std::vector<std::string> instance_ids;
    spc::ConfigSampler sampler;
    spc::SourceFactory factory;

    if (!matrix_path.empty()) {
        // finite-pool uniform sampler over the matrix's configuration rows
        matrix = spc::load_matrix(matrix_path, kappa0);
        instance_ids = matrix->instance_ids;
        const spc::RuntimeMatrix* mp = &*matrix;
        sampler = [mp](std::uint64_t draw_seed) {
            return mp->config_ids[static_cast<std::size_t>(
                draw_seed % static_cast<std::uint64_t>(mp->num_configs()))];
        };
        const spc::ChargeMode mode = opt.charge_mode;
        factory = [mp, mode](const std::vector<std::string>& ids)
            -> std::unique_ptr<spc::RuntimeSource> {
            spc::RuntimeMatrix sub;
            sub.instance_ids = mp->instance_ids;
            for (const auto& id : ids) {
                const auto row = mp->config_index(id);
                sub.config_ids.push_back(id);
                sub.runtimes.push_back(mp->runtimes[static_cast<std::size_t>(row)]);
            }
            struct OwningSource : spc::RuntimeSource {
                spc::RuntimeMatrix m;
                std::unique_ptr<spc::SimulatedSource> inner;
                OwningSource(spc::RuntimeMatrix mm, spc::ChargeMode cm) : m(std::move(mm)) {
                    inner = std::make_unique<spc::SimulatedSource>(m, cm);
                }
                spc::RunResult run(std::int64_t c, const std::string& inst, std::uint64_t s,
                                   double cap, double prev) override {
                    return inner->run(c, inst, s, cap, prev);
                }
            };
            return std::make_unique<OwningSource>(std::move(sub), mode);
        };
    } else if (!generator_command.empty()) {
        if (instances_dir.empty())
            throw std::runtime_error("--generator-command needs --instances");
        instance_ids = list_instances(instances_dir);
        sampler = [generator_command](std::uint64_t draw_seed) {
            return run_generator_command(generator_command, draw_seed);
        };
        factory = [](const std::vector<std::string>& ids)
            -> std::unique_ptr<spc::RuntimeSource> {
            return std::make_unique<spc::ProcessSource>(ids);
        };
    } else {
        throw std::runtime_error("provide --matrix or --generator-command");
    }

    spc::QuantilePool pool(opt, sampler, factory, instance_ids);
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    pool.run_until_charged(budget, &g_interrupted);

    ordered_json j;
    j["total_charged_s"] = pool.total_charged();
    ordered_json levels = ordered_json::array();
    for (int k : pool.active_levels()) {
        ordered_json lj;
        lj["k"] = k;
        lj["sampled"] = pool.level_drawn_ids(k).size();
        lj["unique"] = pool.level_unique_ids(k).size();
        lj["charged_s"] = pool.level_charged(k);
        lj["winner"] = pool.winner(k);
        const auto rep = pool.level_scheduler(k).report();
        lj["t"] = rep.t;
        lj["winner_r"] =
            rep.configs[static_cast<std::size_t>(rep.winner_index)].r;
        levels.push_back(std::move(lj));
    }
    j["levels"] = std::move(levels);
    const std::string text = j.dump(2) + "\n";
    if (output_dir.empty()) {
        std::cout << text;
    } else {
        fs::create_directories(output_dir);
        write_text(output_dir + "/pool_report.json", text);
        std::cout << text;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anytime runtime-configuration search over censored runs"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "start a search");
    add_run_flags(run, run_flags);

    RunFlags resume_flags;
    auto* resume = app.add_subcommand("resume", "continue from a checkpoint");
    add_run_flags(resume, resume_flags);

    std::string traj_events, traj_output;
    std::vector<double> traj_grid;
    double traj_step = 0.0, traj_max = 0.0;
    auto* traj = app.add_subcommand("trajectory", "incumbent trajectory from an event log");
    traj->add_option("--events", traj_events, "event log (JSONL)")->required();
    traj->add_option("--grid", traj_grid, "explicit grid of charged-time points");
    traj->add_option("--grid-step", traj_step, "uniform grid step");
    traj->add_option("--grid-max", traj_max, "uniform grid end (default: log end)");
    traj->add_option("--output", traj_output, "output CSV (default stdout)");

    std::string cert_ckpt;
    double cert_eps = 0.0, cert_lambda = 1.0;
    auto* cert = app.add_subcommand("certificate", "post-hoc optimality certificate");
    cert->add_option("--checkpoint", cert_ckpt)->required();
    cert->add_option("--epsilon", cert_eps)->required();
    cert->add_option("--lambda", cert_lambda)->default_val(1.0);

    std::string an_matrix, an_output;
    std::vector<double> an_deltas;
    double an_max_cap = 0.0;
    auto* an = app.add_subcommand("analyze", "per-delta optimality-gap table for a matrix");
    an->add_option("--matrix", an_matrix)->required();
    an->add_option("--delta", an_deltas, "timeout-probability level(s)")->required();
    an->add_option("--max-cap", an_max_cap);
    an->add_option("--output", an_output, "output CSV (default stdout)");

    std::string bl_matrix, bl_output;
    double bl_kappa0 = 0.001, bl_eps = 0.0, bl_zeta = 0.1, bl_budget = 0.0;
    std::int64_t bl_queue = 0, bl_beta = 1;
    std::uint64_t bl_seed = 0;
    auto* bl = app.add_subcommand("baseline", "fixed-queue doubling baseline");
    bl->add_option("--matrix", bl_matrix)->required();
    bl->add_option("--kappa0", bl_kappa0);
    bl->add_option("--queue-size", bl_queue);
    bl->add_option("--epsilon", bl_eps);
    bl->add_option("--zeta", bl_zeta);
    bl->add_option("--beta-levels", bl_beta);
    bl->add_option("--budget-seconds", bl_budget)->required();
    bl->add_option("--seed", bl_seed);
    bl->add_option("--output", bl_output, "output JSON (default stdout)");

    std::string pool_matrix, pool_generator, pool_instances, pool_output,
        pool_mode = "non-resuming";
    double pool_kappa0 = 0.001, pool_mult = 2.0, pool_budget = 0.0, pool_c = 1.0;
    int pool_first = 1, pool_max = 16;
    std::uint64_t pool_seed = 0;
    auto* pool = app.add_subcommand("pool", "parallel quantile-targeting search levels");
    pool->add_option("--matrix", pool_matrix, "finite pool: uniform over matrix rows");
    pool->add_option("--generator-command", pool_generator,
                     "command printing one sampled config line; {seed} is substituted");
    pool->add_option("--instances", pool_instances, "instance directory (generator pools)");
    pool->add_option("--kappa0", pool_kappa0);
    pool->add_option("--multiplier", pool_mult)->default_val(2.0);
    pool->add_option("--seed", pool_seed);
    pool->add_option("--budget-seconds", pool_budget)->required();
    pool->add_option("--sample-constant", pool_c, "c in ceil(c * k * 2^k)")->default_val(1.0);
    pool->add_option("--first-level", pool_first)->default_val(1);
    pool->add_option("--max-level", pool_max)->default_val(16);
    pool->add_option("--charge-mode", pool_mode)
        ->check(CLI::IsMember({"non-resuming", "resuming"}))
        ->default_val("non-resuming");
    pool->add_option("--output", pool_output, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_flags);
        if (resume->parsed()) return cmd_resume(resume_flags);
        if (traj->parsed())
            return cmd_trajectory(traj_events, traj_grid, traj_step, traj_max, traj_output);
        if (cert->parsed()) return cmd_certificate(cert_ckpt, cert_eps, cert_lambda);
        if (an->parsed()) return cmd_analyze(an_matrix, an_deltas, an_max_cap, an_output);
        if (bl->parsed())
            return cmd_baseline(bl_matrix, bl_kappa0, bl_queue, bl_eps, bl_zeta, bl_beta,
                                bl_budget, bl_seed, bl_output);
        if (pool->parsed())
            return cmd_pool(pool_matrix, pool_generator, pool_instances, pool_kappa0, pool_mult,
                            pool_seed, pool_budget, pool_c, pool_first, pool_max, pool_mode,
                            pool_output);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
