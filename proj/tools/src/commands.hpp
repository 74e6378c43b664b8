#pragma once

#include <cstdint>
#include <filesystem>

#include "config.hpp"

namespace comets::cli {

struct Invocation {
    RunConfig config;
    std::filesystem::path out;
    std::uint64_t seed = 0;
    bool quiet = false;
    bool figures_data = false;
};

// Each command throws comets::Error subclasses on failure; main() maps them to
// exit codes (NumericalError -> 3, any other library error -> 2).
void synth_data(const Invocation& inv);
void ingest(const Invocation& inv);
void train_gan(const Invocation& inv);
void train_diffusion(const Invocation& inv);
void generate(const Invocation& inv);
void evaluate(const Invocation& inv);
void perturb(const Invocation& inv);

}  // namespace comets::cli
