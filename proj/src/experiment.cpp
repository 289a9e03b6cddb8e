#include "q2ma/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <limits>
#include <thread>

#include "q2ma/errors.hpp"
#include "q2ma/metropolis.hpp"
#include "q2ma/tolerances.hpp"

namespace q2ma {

namespace {

// ----- strict config readers -----

void expect_object(const Json& value, const std::string& where) {
    if (!value.is_object()) throw ConfigError(where + ": expected an object");
}

void expect_keys(const Json& obj, const std::string& where,
                 std::initializer_list<const char*> allowed) {
    expect_object(obj, where);
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
}

const Json& require_key(const Json& obj, const std::string& where, const char* key) {
    expect_object(obj, where);
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(where + ": missing required key '" + key + "'");
    return *it;
}

double as_double(const Json& value, const std::string& where) {
    if (!value.is_number()) throw ConfigError(where + ": expected a number");
    return value.get<double>();
}

long long as_integer(const Json& value, const std::string& where) {
    if (!value.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return value.get<long long>();
}

std::string as_string(const Json& value, const std::string& where) {
    if (!value.is_string()) throw ConfigError(where + ": expected a string");
    return value.get<std::string>();
}

double get_double_or(const Json& obj, const std::string& where, const char* key,
                     double fallback) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : as_double(*it, where + "." + key);
}

bool get_bool_or(const Json& obj, const std::string& where, const char* key,
                 bool fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_boolean()) throw ConfigError(where + "." + key + ": expected a boolean");
    return it->get<bool>();
}

std::uint64_t get_seed_or(const Json& obj, const std::string& where, const char* key,
                          std::uint64_t fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    long long v = as_integer(*it, where + "." + key);
    if (v < 0) throw ConfigError(where + "." + key + ": seed must be >= 0");
    return static_cast<std::uint64_t>(v);
}

// ----- instance construction -----

Hamiltonian parse_hamiltonian(const Json& obj, const std::string& where) {
    expect_object(obj, where);
    std::string model = as_string(require_key(obj, where, "model"), where + ".model");
    if (model == "diag") {
        expect_keys(obj, where, {"model", "energies"});
        const Json& list = require_key(obj, where, "energies");
        if (!list.is_array() || list.empty()) {
            throw ConfigError(where + ".energies: expected a non-empty array");
        }
        std::vector<double> energies;
        energies.reserve(list.size());
        for (std::size_t k = 0; k < list.size(); ++k) {
            energies.push_back(
                as_double(list[k], where + ".energies[" + std::to_string(k) + "]"));
        }
        return build_diagonal(energies);
    }
    std::size_t n = 0;
    {
        long long raw = as_integer(require_key(obj, where, "n"), where + ".n");
        if (raw < 1 || raw > static_cast<long long>(k_max_qubits)) {
            throw ConfigError(where + ".n: must lie in [1, " +
                              std::to_string(k_max_qubits) + "]");
        }
        n = static_cast<std::size_t>(raw);
    }
    if (model == "ising") {
        expect_keys(obj, where, {"model", "n", "coupling", "periodic"});
        return build_ising(n, get_double_or(obj, where, "coupling", 1.0),
                           get_bool_or(obj, where, "periodic", false));
    }
    if (model == "tfim") {
        expect_keys(obj, where, {"model", "n", "coupling", "field"});
        double field = as_double(require_key(obj, where, "field"), where + ".field");
        return build_transverse_ising(n, get_double_or(obj, where, "coupling", 1.0),
                                      field);
    }
    if (model == "random2local" || model == "randomdense") {
        expect_keys(obj, where, {"model", "n", "seed", "coupling"});
        std::uint64_t seed = get_seed_or(obj, where, "seed", 0);
        return build_random_hermitian(n, seed, model == "random2local",
                                      get_double_or(obj, where, "coupling", 1.0));
    }
    throw ConfigError(where + ".model: unknown model '" + model + "'");
}

KickModel parse_kick(const Json& value, const std::string& where,
                     const EigenSystem& es) {
    std::string kind = as_string(value, where);
    if (kind == "uniform-flips") return build_uniform_flip_kick(es);
    if (kind == "uniform-hadamards") return build_uniform_hadamard_kick(es);
    if (kind == "identity") return build_identity_kick(es);
    const std::string prefix = "single-flip:";
    if (kind.rfind(prefix, 0) == 0) {
        std::string rest = kind.substr(prefix.size());
        std::size_t used = 0;
        unsigned long spin = 0;
        try {
            spin = std::stoul(rest, &used);
        } catch (const std::exception&) {
            throw ConfigError(where + ": bad qubit index in '" + kind + "'");
        }
        if (used != rest.size() || spin >= es.n) {
            throw ConfigError(where + ": qubit index out of range in '" + kind + "'");
        }
        return build_flip_kick(es, spin);
    }
    throw ConfigError(where + ": unknown kick '" + kind +
                      "' (expected uniform-flips, uniform-hadamards, single-flip:<q>, identity)");
}

void ensure_walk_size(const Instance& instance, bool allow_large) {
    if (instance.es.n >= 5 && !allow_large) {
        throw SizeOutOfRange("walk space for n=" + std::to_string(instance.es.n) +
                             " needs --allow-large");
    }
}

constexpr Eigen::Index k_dense_walk_limit = 2048;

// ----- shared output fragments -----

Json eigenvalue_list(const RealVector& values) {
    Json list = Json::array();
    for (Eigen::Index k = 0; k < values.size(); ++k) list.push_back(values(k));
    return list;
}

}  // namespace

Instance build_instance(const Json& config, const std::string& where,
                        bool require_beta) {
    Instance instance;
    Hamiltonian h =
        parse_hamiltonian(require_key(config, where, "hamiltonian"), where + ".hamiltonian");
    instance.es = build_eigensystem(h);
    instance.kick =
        parse_kick(require_key(config, where, "kick"), where + ".kick", instance.es);
    if (require_beta) {
        instance.beta = as_double(require_key(config, where, "beta"), where + ".beta");
    } else {
        instance.beta = get_double_or(config, where, "beta", 0.0);
    }
    if (instance.beta < 0) throw ConfigError(where + ".beta: must be >= 0");
    auto it = config.find("label");
    instance.label = it != config.end()
                         ? as_string(*it, where + ".label")
                         : instance.es.source.label + "+" + instance.kick.label;
    return instance;
}

int cmd_chain(const CliOptions& options) {
    Json config = read_json_file(options.config_path);
    expect_keys(config, "config", {"hamiltonian", "kick", "beta", "label", "lazy"});
    Instance instance = build_instance(config, "config");
    bool lazy = options.lazy_chain || get_bool_or(config, "config", "lazy", false);

    MetropolisChain chain = build_chain(instance.es, instance.kick, instance.beta, lazy);
    double delta = classical_gap(chain);

    CsvBuilder csv({"i", "j", "m_ij"});
    for (Eigen::Index i = 0; i < chain.N; ++i) {
        for (Eigen::Index j = 0; j < chain.N; ++j) {
            csv.cell(static_cast<long long>(i))
                .cell(static_cast<long long>(j))
                .cell(chain.transition(i, j));
            csv.end_row();
        }
    }
    write_file_atomic(options.out_dir / "chain.csv", csv.str());

    Json summary;
    summary["label"] = instance.label;
    summary["beta"] = instance.beta;
    summary["lazy"] = chain.lazy;
    summary["delta"] = delta;
    summary["mixing_time_estimate"] = mixing_time_estimate(chain);
    summary["detailed_balance_residual"] = chain.detailed_balance_residual;
    summary["symmetrization_residual"] = chain.symmetrization_residual;
    summary["eigenvalues"] = eigenvalue_list(chain.eigenvalues);
    summary["has_negative_eigenvalue"] = chain.has_negative_eigenvalue;
    summary["min_eigenvalue"] = chain.min_eigenvalue;
    write_json_atomic(options.out_dir / "chain_summary.json", summary);
    return 0;
}

int cmd_walk(const CliOptions& options) {
    Json config = read_json_file(options.config_path);
    expect_keys(config, "config", {"hamiltonian", "kick", "beta", "label"});
    Instance instance = build_instance(config, "config");
    ensure_walk_size(instance, options.allow_large);

    MetropolisChain chain = build_chain(instance.es, instance.kick, instance.beta);
    double delta = classical_gap(chain);

    WalkSpace space = make_walk_space(instance.es, instance.kick);
    Json summary;
    summary["label"] = instance.label;
    summary["beta"] = instance.beta;
    summary["dim"] = space.dim;
    summary["delta"] = delta;
    if (space.dim <= k_dense_walk_limit) {
        WalkOperator walk = build_walk(instance.es, instance.kick, instance.beta);
        GapCheck check = verify_gap_inequality(walk.spectrum.delta_min, delta);
        summary["delta_min"] = check.delta_min;
        summary["two_sqrt_delta"] = check.two_sqrt_delta;
        summary["ratio"] = check.ratio;
        summary["pass"] = check.pass;
        summary["fixed_point_residual"] = walk.fixed_point_residual;
        summary["symmetry_residual"] = walk.spectrum.symmetry_residual;
        Json phases = Json::array();
        for (double phase : walk.eigenphases) phases.push_back(phase);
        summary["eigenphases"] = phases;
    } else {
        WalkSummary walk = summarize_walk(instance.es, instance.kick, instance.beta);
        GapCheck check = verify_gap_inequality(walk.delta_min, delta);
        summary["delta_min"] = check.delta_min;
        summary["two_sqrt_delta"] = check.two_sqrt_delta;
        summary["ratio"] = check.ratio;
        summary["pass"] = check.pass;
        summary["fixed_point_residual"] = walk.fixed_point_residual;
        summary["symmetry_residual"] = walk.symmetry_residual;
        summary["eigenphases"] = Json::array();  // too large for dense extraction
    }
    write_json_atomic(options.out_dir / "walk_summary.json", summary);
    return 0;
}

namespace {

AnnealMode parse_mode(const std::string& text) {
    if (text == "exact") return AnnealMode::exact;
    if (text == "pea") return AnnealMode::pea_model;
    throw ConfigError("mode: expected 'exact' or 'pea', got '" + text + "'");
}

OutcomePolicy parse_policy(const std::string& text) {
    if (text == "post-select") return OutcomePolicy::post_select;
    if (text == "abort") return OutcomePolicy::abort_run;
    if (text == "retry-step") return OutcomePolicy::retry_step;
    if (text == "accept-continue") return OutcomePolicy::accept_continue;
    throw ConfigError("policy: expected post-select|abort|retry-step|accept-continue, got '" +
                      text + "'");
}

const char* mode_name(AnnealMode mode) {
    return mode == AnnealMode::exact ? "exact" : "pea";
}

const char* policy_name(OutcomePolicy policy) {
    switch (policy) {
        case OutcomePolicy::post_select: return "post-select";
        case OutcomePolicy::abort_run: return "abort";
        case OutcomePolicy::retry_step: return "retry-step";
        case OutcomePolicy::accept_continue: return "accept-continue";
    }
    return "?";
}

}  // namespace

int cmd_anneal(const CliOptions& options) {
    Json config = read_json_file(options.config_path);
    expect_keys(config, "config",
                {"hamiltonian", "kick", "beta", "label", "steps", "epsilon", "mode",
                 "policy", "seed", "pea"});
    Instance instance = build_instance(config, "config");
    ensure_walk_size(instance, options.allow_large);

    bool has_steps = config.contains("steps");
    bool has_epsilon = config.contains("epsilon");
    if (has_steps == has_epsilon) {
        throw ConfigError("config: provide exactly one of 'steps' or 'epsilon'");
    }

    AnnealOptions anneal;
    anneal.mode = parse_mode(options.mode.value_or(
        config.contains("mode") ? as_string(config["mode"], "config.mode") : "exact"));
    anneal.policy = parse_policy(options.policy.value_or(
        config.contains("policy") ? as_string(config["policy"], "config.policy")
                                  : "retry-step"));
    anneal.seed = options.seed.value_or(get_seed_or(config, "config", "seed", 0));
    if (config.contains("pea")) {
        const Json& pea = config["pea"];
        expect_keys(pea, "config.pea", {"a", "repeats", "time"});
        anneal.pea.a = static_cast<int>(
            as_integer(require_key(pea, "config.pea", "a"), "config.pea.a"));
        if (pea.contains("repeats")) {
            anneal.pea.repeats =
                static_cast<int>(as_integer(pea["repeats"], "config.pea.repeats"));
        }
        if (pea.contains("time")) {
            anneal.pea.evolution_time = as_double(pea["time"], "config.pea.time");
        }
        validate(anneal.pea);
    }

    std::vector<Eigen::Index> step_counts;
    double epsilon_target = 0;
    if (has_steps) {
        const Json& steps = config["steps"];
        auto read_one = [&](const Json& value, const std::string& where) {
            long long d = as_integer(value, where);
            if (d < 1) throw ConfigError(where + ": step count must be >= 1");
            step_counts.push_back(static_cast<Eigen::Index>(d));
        };
        if (steps.is_array()) {
            if (steps.empty()) throw ConfigError("config.steps: empty list");
            for (std::size_t k = 0; k < steps.size(); ++k) {
                read_one(steps[k], "config.steps[" + std::to_string(k) + "]");
            }
        } else {
            read_one(steps, "config.steps");
        }
    } else {
        epsilon_target = as_double(config["epsilon"], "config.epsilon");
        if (!(epsilon_target > 0 && epsilon_target < 1)) {
            throw ConfigError("config.epsilon: must lie in (0,1)");
        }
    }

    Json runs = Json::array();
    double h2_bound = 0;
    auto run_one = [&](const AnnealSchedule& schedule) {
        AnnealTrace trace = run_annealing(instance.es, instance.kick, schedule, anneal);
        h2_bound = schedule.h2_bound;
        CsvBuilder csv({"step", "beta_j", "overlap_sq", "outcome", "cum_success",
                        "fidelity_to_exact", "delta_min_j", "cw_budget_j"});
        for (const StepRecord& record : trace.steps) {
            csv.cell(static_cast<long long>(record.step))
                .cell(record.beta_j)
                .cell(record.overlap_sq)
                .cell(static_cast<long long>(record.outcome))
                .cell(record.cum_success)
                .cell(record.fidelity_to_exact)
                .cell(record.delta_min_j)
                .cell(record.cw_budget_j);
            csv.end_row();
        }
        write_file_atomic(options.out_dir /
                              ("trace_d" + std::to_string(schedule.d) + ".csv"),
                          csv.str());
        Json entry;
        entry["d"] = schedule.d;
        entry["epsilon"] = schedule.epsilon;
        entry["final_fidelity"] = trace.final_fidelity;
        entry["cum_success"] = trace.cum_success;
        entry["reduced_trace_distance"] = trace.reduced_trace_distance;
        entry["cw_total"] = trace.cw_total;
        entry["min_delta_classical"] = trace.min_delta_classical;
        entry["budget_quantum"] = trace.budget.quantum;
        entry["budget_classical"] = trace.budget.classical;
        runs.push_back(entry);
    };

    if (has_steps) {
        for (Eigen::Index d : step_counts) {
            run_one(make_schedule(instance.es, instance.beta, d));
        }
    } else {
        run_one(make_schedule_for_epsilon(instance.es, instance.beta, epsilon_target));
    }

    Json summary;
    summary["label"] = instance.label;
    summary["beta"] = instance.beta;
    summary["mode"] = mode_name(anneal.mode);
    summary["policy"] = policy_name(anneal.policy);
    summary["seed"] = anneal.seed;
    summary["h2_bound"] = h2_bound;
    if (anneal.mode == AnnealMode::pea_model) {
        Json pea;
        pea["a"] = anneal.pea.a;
        pea["window"] = anneal.pea.window();
        pea["repeats"] = anneal.pea.repeats;
        pea["time"] = anneal.pea.evolution_time;
        summary["pea"] = pea;
    }
    summary["runs"] = runs;
    write_json_atomic(options.out_dir / "anneal_summary.json", summary);
    return 0;
}

int cmd_sweep(const CliOptions& options) {
    Json config = read_json_file(options.config_path);
    expect_keys(config, "config", {"instances", "jobs", "label"});
    const Json& list = require_key(config, "config", "instances");
    if (!list.is_array()) throw ConfigError("config.instances: expected an array");

    // Validate and build every instance before any computation.
    std::vector<Instance> instances;
    instances.reserve(list.size());
    for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string where = "config.instances[" + std::to_string(k) + "]";
        expect_keys(list[k], where, {"hamiltonian", "kick", "beta", "label"});
        instances.push_back(build_instance(list[k], where));
    }

    struct Row {
        std::string instance;
        double beta = 0;
        bool ok = false;
        double delta = 0, delta_min = 0, ratio = 0;
        bool pass = false;
        std::string error;
        std::size_t order = 0;
    };
    std::vector<Row> rows(instances.size());

    int jobs = options.jobs.value_or(static_cast<int>(
        config.contains("jobs") ? as_integer(config["jobs"], "config.jobs") : 1));
    if (jobs < 1) throw ConfigError("jobs: must be >= 1");
    jobs = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(jobs),
                              std::max<std::size_t>(1, instances.size())));

    std::atomic<std::size_t> next{0};
    bool allow_large = options.allow_large;
    auto worker = [&]() {
        while (true) {
            std::size_t r = next.fetch_add(1);
            if (r >= instances.size()) return;
            const Instance& instance = instances[r];
            Row& row = rows[r];
            row.instance = instance.label;
            row.beta = instance.beta;
            row.order = r;
            try {
                ensure_walk_size(instance, allow_large);
                MetropolisChain chain =
                    build_chain(instance.es, instance.kick, instance.beta);
                double delta = classical_gap(chain);
                WalkSummary walk =
                    summarize_walk(instance.es, instance.kick, instance.beta);
                GapCheck check = verify_gap_inequality(walk.delta_min, delta);
                row.delta = delta;
                row.delta_min = check.delta_min;
                row.ratio = check.ratio;
                row.pass = check.pass;
                row.ok = true;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.instance != b.instance) return a.instance < b.instance;
        if (a.beta != b.beta) return a.beta < b.beta;
        return a.order < b.order;
    });

    CsvBuilder csv({"instance", "beta", "delta", "delta_min", "ratio", "pass", "error"});
    std::size_t ok = 0, failed = 0;
    bool all_pass = true;
    double min_ratio = std::numeric_limits<double>::infinity();
    for (const Row& row : rows) {
        csv.cell(row.instance).cell(row.beta);
        if (row.ok) {
            csv.cell(row.delta)
                .cell(row.delta_min)
                .cell(row.ratio)
                .cell(std::string(row.pass ? "true" : "false"))
                .cell(std::string());
            ++ok;
            all_pass = all_pass && row.pass;
            min_ratio = std::min(min_ratio, row.ratio);
        } else {
            csv.cell(std::string())
                .cell(std::string())
                .cell(std::string())
                .cell(std::string())
                .cell(row.error);
            ++failed;
        }
        csv.end_row();
    }
    write_file_atomic(options.out_dir / "sweep.csv", csv.str());

    Json summary;
    summary["instances"] = rows.size();
    summary["ok"] = ok;
    summary["failed"] = failed;
    summary["all_pass"] = all_pass && failed == 0;
    if (ok > 0) summary["min_ratio"] = min_ratio;
    summary["jobs"] = jobs;
    write_json_atomic(options.out_dir / "sweep_summary.json", summary);
    return 0;
}

int cmd_leakage(const CliOptions& options) {
    Json config = read_json_file(options.config_path);
    expect_keys(config, "config",
                {"hamiltonian", "kick", "label", "windows", "repeats", "threshold"});
    Instance instance = build_instance(config, "config", /*require_beta=*/false);

    const Json& windows = require_key(config, "config", "windows");
    if (!windows.is_array() || windows.empty()) {
        throw ConfigError("config.windows: expected a non-empty array of exponents");
    }
    std::vector<int> exponents;
    for (std::size_t k = 0; k < windows.size(); ++k) {
        long long a =
            as_integer(windows[k], "config.windows[" + std::to_string(k) + "]");
        if (a < 1 || a > 40) {
            throw ConfigError("config.windows: exponent must lie in [1, 40]");
        }
        exponents.push_back(static_cast<int>(a));
    }
    int repeats = static_cast<int>(
        config.contains("repeats") ? as_integer(config["repeats"], "config.repeats") : 1);
    double threshold = get_double_or(config, "config", "threshold", 0.1);

    // Evaluate from the widest window to the narrowest so the monotonicity
    // column comparison reads top-down.
    std::vector<int> ordered = exponents;
    std::sort(ordered.begin(), ordered.end());
    ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

    Json window_summaries = Json::array();
    bool monotone = true;
    RealVector previous;
    for (int a : ordered) {
        PeaConfig pea;
        pea.a = a;
        pea.repeats = repeats;
        LeakageReport report = leakage_analysis(instance.es, instance.kick, pea, threshold);
        CsvBuilder csv({"i", "E_i_normalized", "eta_i", "omega_i"});
        for (Eigen::Index i = 0; i < report.eta.size(); ++i) {
            csv.cell(static_cast<long long>(i))
                .cell(report.energies_normalized(i))
                .cell(report.eta(i))
                .cell(report.omega(i));
            csv.end_row();
        }
        write_file_atomic(options.out_dir / ("leakage_a" + std::to_string(a) + ".csv"),
                          csv.str());
        if (previous.size() == report.eta.size()) {
            // previous has the wider window (smaller a): eta may only shrink.
            if (((previous - report.eta).array() < -tol().pairing).any()) monotone = false;
        }
        previous = report.eta;
        Json entry;
        entry["a"] = a;
        entry["window"] = report.window;
        entry["eta_max"] = report.eta_max;
        entry["eta_mean"] = report.eta_mean;
        entry["flagged"] = report.flagged;
        window_summaries.push_back(entry);
    }

    Json summary;
    summary["label"] = instance.label;
    summary["repeats"] = repeats;
    summary["threshold"] = threshold;
    summary["monotone_nonincreasing"] = monotone;
    summary["windows"] = window_summaries;
    write_json_atomic(options.out_dir / "leakage_summary.json", summary);
    return 0;
}

int run_command(const std::string& name, const CliOptions& options) {
    try {
        std::filesystem::create_directories(options.out_dir);
        if (name == "chain") return cmd_chain(options);
        if (name == "walk") return cmd_walk(options);
        if (name == "anneal") return cmd_anneal(options);
        if (name == "sweep") return cmd_sweep(options);
        if (name == "leakage") return cmd_leakage(options);
        throw ConfigError("unknown command '" + name + "'");
    } catch (const AnnealAborted& e) {
        std::cerr << "aborted: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace q2ma
