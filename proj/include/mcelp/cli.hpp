#ifndef MCELP_CLI_HPP
#define MCELP_CLI_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "mcelp/codebooks.hpp"

namespace mcelp::cli {

// exit codes shared by all subcommands
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInputFormat = 2;
inline constexpr int kExitIo = 3;

struct Options {
    std::string input;
    std::string output;
    ModeId mode = ModeId::nb_low;
    int rate = 0; // 0 = follow the mode
    double loss_rate = 0.0;
    uint64_t seed = 0;
    bool notch = true;
    bool highpass = true;
};

std::string mode_name(ModeId mode);
std::optional<ModeId> parse_mode(const std::string& name);

int run_encode(const Options& opts, std::ostream& err);
int run_decode(const Options& opts, std::ostream& err);
int run_simulate_loss(const Options& opts, std::ostream& out, std::ostream& err);
int run_info(const Options& opts, std::ostream& out, std::ostream& err);

} // namespace mcelp::cli

#endif
