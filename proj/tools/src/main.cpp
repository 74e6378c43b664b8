#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "comets/error.hpp"

namespace {

constexpr int kExitUser = 2;
constexpr int kExitNumerical = 3;

using comets::cli::Invocation;

struct GlobalFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
    bool quiet = false;
    std::vector<std::string> overrides;
    bool figures_data = false;
};

Invocation resolve(const GlobalFlags& flags, bool seed_given) {
    Invocation inv;
    if (!flags.config_path.empty()) inv.config = comets::cli::RunConfig::load(flags.config_path);
    for (const auto& kv : flags.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw comets::SpecificationError("--set expects key=value, got '" + kv + "'");
        inv.config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    // Seed precedence: --seed, then COMETS_SEED, then the config file.
    if (const char* env = std::getenv("COMETS_SEED"); env != nullptr && *env != '\0') inv.config.set("seed", env);
    if (seed_given) inv.config.set("seed", std::to_string(flags.seed));
    if (!flags.out.empty()) inv.config.set("out", flags.out);
    inv.seed = inv.config.get_uint("seed");
    inv.out = inv.config.get_string("out");
    inv.quiet = flags.quiet;
    inv.figures_data = flags.figures_data;
    return inv;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"comets: correlation-aware synthetic market time series"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags flags;
    app.add_option("--config", flags.config_path, "flat key = value config file");
    auto* seed_opt = app.add_option("--seed", flags.seed, "root seed (overrides COMETS_SEED and the config)");
    app.add_option("--out", flags.out, "output directory (overrides the config)");
    app.add_option("--set", flags.overrides, "extra config entry key=value (repeatable)")
        ->allow_extra_args(false)
        ->take_all();
    app.add_flag("--quiet", flags.quiet, "no progress output on stderr");

    using Command = std::function<void(const Invocation&)>;
    std::vector<std::pair<CLI::App*, Command>> commands = {
        {app.add_subcommand("synth-data", "write a synthetic benchmark dataset"), comets::cli::synth_data},
        {app.add_subcommand("ingest", "validate market data and fit preprocessing"), comets::cli::ingest},
        {app.add_subcommand("train-gan", "train the conditional GAN"), comets::cli::train_gan},
        {app.add_subcommand("train-diffusion", "train the diffusion model"), comets::cli::train_diffusion},
        {app.add_subcommand("generate", "rollout, diffusion or guided sampling"), comets::cli::generate},
        {app.add_subcommand("evaluate", "compare a synthetic series with a real one"), comets::cli::evaluate},
        {app.add_subcommand("perturb", "perturbation / reactivity experiment"), comets::cli::perturb},
    };
    commands[5].first->add_flag("--figures-data", flags.figures_data, "also dump per-figure distributions");
    app.add_subcommand("schema", "print the config key reference")->callback([] {
        std::cout << comets::cli::schema_markdown();
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUser;
    }

    try {
        for (const auto& [sub, run] : commands) {
            if (sub->parsed()) run(resolve(flags, seed_opt->count() > 0));
        }
    } catch (const comets::NumericalError& e) {
        std::cerr << "error: numerical abort at " << e.what() << '\n';
        return kExitNumerical;
    } catch (const comets::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed JSON input: " << e.what() << '\n';
        return kExitUser;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
