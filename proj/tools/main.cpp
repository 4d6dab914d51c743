#include <iostream>

#include <CLI11.hpp>

#include "mcelp/cli.hpp"

using namespace mcelp;

int main(int argc, char** argv) {
    CLI::App app{"mcelp: CELP speech codec with an embedded wideband mode"};
    app.require_subcommand(1);

    cli::Options opts;
    std::string mode_str = "nb-low";

    auto* enc = app.add_subcommand("encode", "WAV -> container");
    enc->add_option("input", opts.input, "input PCM16 mono WAV")->required();
    enc->add_option("output", opts.output, "output container")->required();
    enc->add_option("--mode", mode_str,
                    "coding mode: nb-low, nb-high, wb-low, wb-high")
        ->default_str("nb-low");
    enc->add_option("--rate", opts.rate, "expected sample rate (8000 or 16000)");
    enc->add_flag("!--no-notch", opts.notch, "disable the DC notch prefilter");
    enc->add_flag("!--no-highpass", opts.highpass,
                  "disable the high-pass prefilter (300 Hz nb, 50 Hz wb)");

    auto* dec = app.add_subcommand("decode", "container -> WAV");
    dec->add_option("input", opts.input, "input container")->required();
    dec->add_option("output", opts.output, "output WAV")->required();

    auto* sim = app.add_subcommand("simulate-loss",
                                   "drop frames with seeded randomness");
    sim->add_option("input", opts.input, "input container")->required();
    sim->add_option("output", opts.output, "output container")->required();
    sim->add_option("--loss-rate", opts.loss_rate, "per-frame loss probability")
        ->required();
    sim->add_option("--seed", opts.seed, "PRNG seed")->default_val(0);

    auto* info = app.add_subcommand("info", "print container facts");
    info->add_option("input", opts.input, "input container")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::kExitUsage;
    }

    if (*enc) {
        const auto mode = cli::parse_mode(mode_str);
        if (!mode) {
            std::cerr << "error: unknown mode '" << mode_str << "'\n";
            return cli::kExitUsage;
        }
        opts.mode = *mode;
        return cli::run_encode(opts, std::cerr);
    }
    if (*dec) return cli::run_decode(opts, std::cerr);
    if (*sim) return cli::run_simulate_loss(opts, std::cout, std::cerr);
    if (*info) return cli::run_info(opts, std::cout, std::cerr);
    return cli::kExitUsage;
}
