#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "q2ma/io.hpp"
#include "q2ma/qsa.hpp"

namespace q2ma {

// Command-line surface shared by every subcommand. Flags override the
// corresponding config fields where both exist.
struct CliOptions {
    std::filesystem::path config_path;
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;    // "exact" | "pea"
    std::optional<std::string> policy;  // anneal outcome policy
    std::optional<int> jobs;            // sweep worker count
    bool lazy_chain = false;
    bool allow_large = false;
};

// A fully built experiment subject: Hamiltonian eigensystem + kick + beta.
struct Instance {
    std::string label;
    EigenSystem es;
    KickModel kick;
    double beta = 0;
};

// Parses the instance fields of a config object ("hamiltonian", "kick",
// "beta", optional "label"); rejects unknown keys in nested objects.
Instance build_instance(const Json& config, const std::string& where,
                        bool require_beta = true);

// Subcommand runners; each reads the config, writes output files into
// options.out_dir, and returns the process exit code (0 on success).
// Failures are reported by exception: ConfigError (exit 1), q2ma::Error and
// derived structural errors (exit 2), AnnealAborted (exit 3).
int cmd_chain(const CliOptions& options);
int cmd_walk(const CliOptions& options);
int cmd_anneal(const CliOptions& options);
int cmd_sweep(const CliOptions& options);
int cmd_leakage(const CliOptions& options);

// Maps an exception to the documented exit code, printing the reason to
// stderr.
int run_command(const std::string& name, const CliOptions& options);

}  // namespace q2ma
