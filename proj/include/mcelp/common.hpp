#ifndef MCELP_COMMON_HPP
#define MCELP_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mcelp {

// Frame geometry. Narrowband (8 kHz) frames are 20 ms = 160 samples split
// into 4 subframes of 40; wideband (16 kHz) frames are 320 samples split
// by the QMF into two 160-sample bands. The encoder looks 80 samples
// (10 ms) past the current frame.
inline constexpr int kFrameSize = 160;
inline constexpr int kSubframeSize = 40;
inline constexpr int kSubframesPerFrame = 4;
inline constexpr int kLookAhead = 80;
inline constexpr int kWindowSize = kFrameSize + kLookAhead;
inline constexpr int kWbFrameSize = 2 * kFrameSize;

inline constexpr int kNbLpcOrder = 10;
inline constexpr int kHbLpcOrder = 8;

inline constexpr int kMinPitch = 17;
inline constexpr int kMaxPitch = 144;
// Past excitation kept for the adaptive codebook: the deepest read is
// e[n - T - 1] with T = kMaxPitch, plus one subframe of slack.
inline constexpr int kExcitationHistory = kMaxPitch + kSubframeSize;

enum class Errc {
    invalid_input,
    malformed_frame,
    truncated_frame,
    not_a_container,
    io_error,
    numeric_overflow,
    unsupported_input,
};

class CodecError : public std::runtime_error {
public:
    CodecError(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

// xorshift64* generator shared by the innovation codebooks and the loss
// simulator. The stream is part of the bitstream contract (codebook
// contents are regenerated from it), so the constants are fixed here.
class Xorshift64Star {
public:
    explicit Xorshift64Star(uint64_t seed) : state_(seed ? seed : 1u) {}

    uint64_t next() {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 2685821657736338717ULL;
    }

    // Top 32 bits of the scrambled output, used as the numerator of a
    // unit-interval variate u = next_u32() / 2^32.
    uint32_t next_u32() { return static_cast<uint32_t>(next() >> 32); }

    double next_unit() { return next_u32() * (1.0 / 4294967296.0); }

private:
    uint64_t state_;
};

inline constexpr uint64_t kCodebookSeed = 0x5EED5EEDULL;

} // namespace mcelp

#endif
