#include <cstdint>
#include <string>

#include "CLI11.hpp"
#include "q2ma/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Paired-eigenstate Metropolis chain, quantized walk, and annealing toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    std::string mode;
    std::string policy;
    int jobs = 0;
    bool lazy_chain = false;
    bool allow_large = false;

    const char* commands[] = {"chain", "walk", "anneal", "sweep", "leakage"};
    const char* descriptions[] = {
        "Build the Metropolis chain for one instance; emit transition CSV and summary",
        "Build the quantized walk; emit gap comparison and eigenphase summary",
        "Run the annealing ladder; emit per-step trace CSVs and summary",
        "Evaluate the gap inequality across many instances concurrently",
        "Window sweep of kick leakage and energy-change scales",
    };
    for (std::size_t k = 0; k < 5; ++k) {
        CLI::App* sub = app.add_subcommand(commands[k], descriptions[k]);
        sub->add_option("--config", config_path, "JSON experiment description")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (default: current)");
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--mode", mode, "exact | pea")
            ->check(CLI::IsMember({"exact", "pea"}));
        sub->add_flag("--lazy-chain", lazy_chain, "use the lazy (I+M)/2 chain");
        sub->add_flag("--allow-large", allow_large, "permit n=5 walk spaces");
        if (std::string(commands[k]) == "anneal") {
            sub->add_option("--policy", policy,
                            "post-select | abort | retry-step | accept-continue")
                ->check(CLI::IsMember(
                    {"post-select", "abort", "retry-step", "accept-continue"}));
        }
        if (std::string(commands[k]) == "sweep") {
            sub->add_option("--jobs", jobs, "worker thread count")
                ->check(CLI::PositiveNumber);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    CLI::App* chosen = app.get_subcommands().front();
    q2ma::CliOptions options;
    options.config_path = config_path;
    options.out_dir = out_dir;
    options.lazy_chain = lazy_chain;
    options.allow_large = allow_large;
    auto passed = [&](const char* name) {
        const CLI::Option* opt = chosen->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (passed("--seed")) options.seed = seed;
    if (passed("--mode")) options.mode = mode;
    if (passed("--policy")) options.policy = policy;
    if (passed("--jobs")) options.jobs = jobs;
    return q2ma::run_command(chosen->get_name(), options);
}
