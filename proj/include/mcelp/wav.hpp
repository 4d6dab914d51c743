#ifndef MCELP_WAV_HPP
#define MCELP_WAV_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcelp/common.hpp"

namespace mcelp::wav {

struct WavData {
    std::vector<int16_t> samples;
    uint32_t sample_rate = 0;
};

// RIFF/WAVE, PCM16 mono only; anything else raises unsupported_input.
WavData read_pcm16_mono(const std::string& path);
void write_pcm16_mono(const std::string& path, std::span<const int16_t> samples,
                      uint32_t sample_rate);

} // namespace mcelp::wav

#endif
