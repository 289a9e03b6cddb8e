#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "q2ma/hamiltonian.hpp"
#include "q2ma/io.hpp"
#include "q2ma/qsa.hpp"
#include "q2ma/spectral.hpp"

namespace fs = std::filesystem;
using q2ma::Json;

namespace {

std::string cli() {
    const char* path = std::getenv("Q2MA_CLI");
    REQUIRE(path != nullptr);
    return path;
}

fs::path configs() {
    const char* dir = std::getenv("Q2MA_CONFIGS");
    REQUIRE(dir != nullptr);
    return dir;
}

int run(const std::string& args) {
    std::string command = cli() + " " + args + " >/dev/null 2>&1";
    int status = std::system(command.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() /
                   ("q2ma_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::size_t entry_count(const fs::path& dir) {
    std::size_t count = 0;
    for (auto it = fs::directory_iterator(dir); it != fs::directory_iterator(); ++it) ++count;
    return count;
}

std::vector<std::string> lines_of(const fs::path& file) {
    std::ifstream in(file);
    REQUIRE(in.good());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file);
    out << text;
}

}  // namespace

TEST_CASE("chain command reproduces the two-state reference values") {
    fs::path dir = fresh_dir("chain");
    int code = run("chain --config " + (configs() / "chain_two_state.json").string() +
                   " --out " + dir.string());
    CHECK(code == 0);

    Json summary = q2ma::read_json_file(dir / "chain_summary.json");
    CHECK(summary["label"] == "two-state");
    CHECK(std::abs(summary["delta"].get<double>() - 1.5) < 1e-12);
    CHECK(summary["detailed_balance_residual"].get<double>() < 1e-10);
    CHECK(summary["lazy"] == false);
    CHECK(summary["has_negative_eigenvalue"] == true);
    CHECK(std::abs(summary["mixing_time_estimate"].get<double>() - 2.0 / 3.0) < 1e-12);

    std::vector<std::string> rows = lines_of(dir / "chain.csv");
    REQUIRE(rows.size() == 5);  // header + 2x2 entries
    CHECK(rows[0] == "i,j,m_ij");
    auto third_field = [](const std::string& row) {
        return std::stod(row.substr(row.rfind(',') + 1));
    };
    CHECK(rows[1].rfind("0,0,", 0) == 0);
    CHECK(std::abs(third_field(rows[1]) - 0.5) < 1e-15);
    CHECK(std::abs(third_field(rows[2]) - 0.5) < 1e-15);
    CHECK(third_field(rows[3]) == 1.0);
    CHECK(third_field(rows[4]) == 0.0);
}

TEST_CASE("lazy flag halves the two-state chain") {
    fs::path dir = fresh_dir("chain_lazy");
    int code = run("chain --config " + (configs() / "chain_two_state.json").string() +
                   " --out " + dir.string() + " --lazy-chain");
    CHECK(code == 0);
    Json summary = q2ma::read_json_file(dir / "chain_summary.json");
    CHECK(summary["lazy"] == true);
    CHECK(std::abs(summary["delta"].get<double>() - 0.75) < 1e-12);
    CHECK(summary["has_negative_eigenvalue"] == false);
}

TEST_CASE("identity kick maps to the domain error exit code and writes nothing") {
    fs::path dir = fresh_dir("chain_identity");
    int code = run("chain --config " + (configs() / "chain_identity_kick.json").string() +
                   " --out " + dir.string());
    CHECK(code == 2);
    CHECK(entry_count(dir) == 0);
}

TEST_CASE("malformed and invalid configs exit with the config error code") {
    fs::path dir = fresh_dir("bad_config");
    fs::path broken = dir / "broken.json";
    write_text(broken, "{ this is not json");
    CHECK(run("chain --config " + broken.string() + " --out " + dir.string() + "/out") == 1);

    fs::path unknown = dir / "unknown_key.json";
    write_text(unknown, R"({
      "hamiltonian": { "model": "diag", "energies": [0.0, 1.0] },
      "kick": "single-flip:0",
      "beta": 1.0,
      "surprise": 7
    })");
    CHECK(run("chain --config " + unknown.string() + " --out " + dir.string() + "/out2") == 1);

    fs::path negative = dir / "negative_beta.json";
    write_text(negative, R"({
      "hamiltonian": { "model": "diag", "energies": [0.0, 1.0] },
      "kick": "single-flip:0",
      "beta": -1.0
    })");
    CHECK(run("chain --config " + negative.string() + " --out " + dir.string() + "/out3") == 1);
}

TEST_CASE("usage errors and help") {
    CHECK(run("chain") == 1);            // --config is required
    CHECK(run("") == 1);                 // a subcommand is required
    CHECK(run("frobnicate --config x") == 1);
    CHECK(run("--help") == 0);
    CHECK(run("chain --help") == 0);
}

TEST_CASE("walk command reports the phase gap comparison") {
    fs::path dir = fresh_dir("walk");
    int code = run("walk --config " + (configs() / "walk_two_state.json").string() +
                   " --out " + dir.string());
    CHECK(code == 0);
    Json summary = q2ma::read_json_file(dir / "walk_summary.json");
    CHECK(summary["dim"] == 8);
    CHECK(std::abs(summary["delta"].get<double>() - 1.5) < 1e-12);
    // 2 acos(-1/2) = 4 pi / 3
    CHECK(std::abs(summary["delta_min"].get<double>() - 4.18879020478639) < 1e-10);
    CHECK(summary["pass"] == true);
    CHECK(summary["ratio"].get<double>() > 1.0);
    CHECK(summary["eigenphases"].size() == 8);
    CHECK(summary["fixed_point_residual"].get<double>() < 1e-10);
}

TEST_CASE("anneal command writes one trace per requested ladder length") {
    fs::path dir = fresh_dir("anneal");
    fs::path config = dir / "anneal.json";
    write_text(config, R"({
      "hamiltonian": { "model": "tfim", "n": 2, "coupling": 1.0, "field": 0.5 },
      "kick": "uniform-hadamards",
      "beta": 1.0,
      "steps": [4, 8],
      "mode": "exact",
      "policy": "post-select",
      "seed": 5
    })");
    fs::path out = dir / "out";
    int code = run("anneal --config " + config.string() + " --out " + out.string());
    CHECK(code == 0);

    for (int d : {4, 8}) {
        std::vector<std::string> rows = lines_of(out / ("trace_d" + std::to_string(d) + ".csv"));
        REQUIRE(rows.size() == static_cast<std::size_t>(d) + 1);
        CHECK(rows[0] ==
              "step,beta_j,overlap_sq,outcome,cum_success,fidelity_to_exact,delta_min_j,"
              "cw_budget_j");
    }

    Json summary = q2ma::read_json_file(out / "anneal_summary.json");
    CHECK(summary["mode"] == "exact");
    CHECK(summary["policy"] == "post-select");
    REQUIRE(summary["runs"].size() == 2);
    for (const Json& entry : summary["runs"]) {
        CHECK(entry["final_fidelity"].get<double>() > 0.99);
        CHECK(entry["cum_success"].get<double>() > 0.8);
        CHECK(entry["cum_success"].get<double>() < 1.0);
        CHECK(entry["reduced_trace_distance"].get<double>() < 1e-6);
    }
    // Longer ladders lose less measurement weight.
    double shorter = summary["runs"][0]["cum_success"].get<double>();
    double longer = summary["runs"][1]["cum_success"].get<double>();
    CHECK(longer > shorter);
}

TEST_CASE("abort policy surfaces as its own exit code") {
    // Find a seed whose single violent step draws a nonzero outcome.
    q2ma::EigenSystem es = q2ma::build_eigensystem(q2ma::build_transverse_ising(2, 1.0, 0.5));
    q2ma::KickModel kick = q2ma::build_uniform_hadamard_kick(es);
    q2ma::AnnealSchedule schedule = q2ma::make_schedule(es, 6.0, 1);
    std::uint64_t bad_seed = 0;
    bool found = false;
    for (std::uint64_t s = 0; s < 200 && !found; ++s) {
        q2ma::AnnealOptions probe;
        probe.policy = q2ma::OutcomePolicy::accept_continue;
        probe.seed = s;
        q2ma::AnnealTrace t = q2ma::run_annealing(es, kick, schedule, probe);
        if (t.steps[0].outcome != 0) {
            bad_seed = s;
            found = true;
        }
    }
    REQUIRE(found);

    fs::path dir = fresh_dir("abort");
    fs::path config = dir / "abort.json";
    write_text(config, R"({
      "hamiltonian": { "model": "tfim", "n": 2, "coupling": 1.0, "field": 0.5 },
      "kick": "uniform-hadamards",
      "beta": 6.0,
      "steps": 1,
      "policy": "abort",
      "seed": )" + std::to_string(bad_seed) + "\n}");
    fs::path out = dir / "out";
    CHECK(run("anneal --config " + config.string() + " --out " + out.string()) == 3);
    CHECK(entry_count(out) == 0);

    // The same seed finishes under the retry policy via the CLI override.
    fs::path out2 = dir / "out2";
    CHECK(run("anneal --config " + config.string() + " --out " + out2.string() +
              " --policy retry-step") == 0);
    Json summary = q2ma::read_json_file(out2 / "anneal_summary.json");
    CHECK(summary["policy"] == "retry-step");
    CHECK(summary["runs"][0]["final_fidelity"].get<double>() > 0.999);
}

TEST_CASE("sweep isolates failing instances into error rows") {
    fs::path dir = fresh_dir("sweep");
    int code = run("sweep --config " + (configs() / "sweep_poisoned.json").string() +
                   " --out " + dir.string());
    CHECK(code == 0);

    std::vector<std::string> rows = lines_of(dir / "sweep.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "instance,beta,delta,delta_min,ratio,pass,error");
    std::size_t ok_rows = 0, error_rows = 0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (rows[k].find(",true,") != std::string::npos) ++ok_rows;
        if (rows[k].find("two-state-identity") != std::string::npos) {
            ++error_rows;
            CHECK(rows[k].find("disconnected") != std::string::npos);
        }
    }
    CHECK(ok_rows == 2);
    CHECK(error_rows == 1);

    Json summary = q2ma::read_json_file(dir / "sweep_summary.json");
    CHECK(summary["instances"] == 3);
    CHECK(summary["ok"] == 2);
    CHECK(summary["failed"] == 1);
    CHECK(summary["all_pass"] == false);
}

TEST_CASE("outputs are byte-identical across reruns and worker counts") {
    fs::path a = fresh_dir("det_a");
    fs::path b = fresh_dir("det_b");
    fs::path c = fresh_dir("det_c");
    std::string config = (configs() / "sweep_poisoned.json").string();
    CHECK(run("sweep --config " + config + " --out " + a.string() + " --jobs 1") == 0);
    CHECK(run("sweep --config " + config + " --out " + b.string() + " --jobs 3") == 0);
    CHECK(run("sweep --config " + config + " --out " + c.string() + " --jobs 1") == 0);
    CHECK(q2ma::read_text_file(a / "sweep.csv") == q2ma::read_text_file(b / "sweep.csv"));
    CHECK(q2ma::read_text_file(a / "sweep.csv") == q2ma::read_text_file(c / "sweep.csv"));
    CHECK(q2ma::read_text_file(a / "sweep_summary.json") ==
          q2ma::read_text_file(c / "sweep_summary.json"));

    fs::path ca = fresh_dir("det_chain_a");
    fs::path cb = fresh_dir("det_chain_b");
    std::string chain_config = (configs() / "chain_two_state.json").string();
    CHECK(run("chain --config " + chain_config + " --out " + ca.string()) == 0);
    CHECK(run("chain --config " + chain_config + " --out " + cb.string()) == 0);
    CHECK(q2ma::read_text_file(ca / "chain.csv") == q2ma::read_text_file(cb / "chain.csv"));
    CHECK(q2ma::read_text_file(ca / "chain_summary.json") ==
          q2ma::read_text_file(cb / "chain_summary.json"));
}

TEST_CASE("five-qubit walks hide behind the explicit opt-in") {
    fs::path dir = fresh_dir("large");
    fs::path walk_config = dir / "n5_walk.json";
    write_text(walk_config, R"({
      "hamiltonian": { "model": "random2local", "n": 5, "seed": 505 },
      "kick": "single-flip:0",
      "beta": 0.5
    })");
    fs::path config = dir / "n5.json";
    write_text(config, R"({
      "hamiltonian": { "model": "random2local", "n": 5, "seed": 505 },
      "kick": "single-flip:0",
      "beta": 0.5,
      "steps": 2,
      "policy": "post-select"
    })");
    fs::path out = dir / "out";
    CHECK(run("walk --config " + walk_config.string() + " --out " + out.string()) == 2);
    CHECK(entry_count(out) == 0);
    CHECK(run("anneal --config " + config.string() + " --out " + out.string()) == 2);
    CHECK(entry_count(out) == 0);
    CHECK(run("anneal --config " + config.string() + " --out " + out.string() +
              " --allow-large") == 0);
    CHECK(fs::exists(out / "trace_d2.csv"));

    // The uniform-flip register at n=5 exceeds the hard cap even when allowed.
    fs::path wide = dir / "n5_uniform.json";
    write_text(wide, R"({
      "hamiltonian": { "model": "tfim", "n": 5, "coupling": 1.0, "field": 0.7 },
      "kick": "uniform-flips",
      "beta": 0.5
    })");
    CHECK(run("walk --config " + wide.string() + " --out " + (dir / "out2").string() +
              " --allow-large") == 2);
}

TEST_CASE("leakage command tracks window narrowing") {
    fs::path dir = fresh_dir("leakage");
    int code = run("leakage --config " + (configs() / "leakage_ising3.json").string() +
                   " --out " + dir.string());
    CHECK(code == 0);
    Json summary = q2ma::read_json_file(dir / "leakage_summary.json");
    CHECK(summary["monotone_nonincreasing"] == true);
    REQUIRE(summary["windows"].size() == 6);
    for (const Json& entry : summary["windows"]) {
        CHECK(std::abs(entry["eta_max"].get<double>() - 2.0 / 3.0) < 1e-12);
        CHECK(entry["flagged"] == true);
    }
    for (int a = 3; a <= 8; ++a) {
        std::vector<std::string> rows =
            lines_of(dir / ("leakage_a" + std::to_string(a) + ".csv"));
        REQUIRE(rows.size() == 9);  // header + 8 states
        CHECK(rows[0] == "i,E_i_normalized,eta_i,omega_i");
    }
}
