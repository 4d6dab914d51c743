#ifndef MCELP_CODEBOOKS_HPP
#define MCELP_CODEBOOKS_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mcelp/common.hpp"
#include "mcelp/dsp.hpp"

namespace mcelp {

enum class ModeId : uint8_t {
    nb_low = 0,
    nb_high = 1,
    wb_low = 2,
    wb_high = 3,
};

// Bit allocation and codebook geometry for one coding mode. This table is
// the single source of truth for the bitstream layout; FORMAT.md documents
// the numbers it produces.
struct ModeTable {
    ModeId id;
    bool wideband;      // QMF split, high-band section appended
    bool hb_innovation; // high band carries coded innovation (wb-high)
    int subvector_len;  // innovation sub-vector length (20 low / 5 high)
    int codebook_bits;  // bits per innovation sub-vector (5 low / 8 high)

    static constexpr int kLspBits = 40; // 10 coefficients x 4 bits
    static constexpr int kPitchBits = 7;
    static constexpr int kPitchGainBits = 5;
    static constexpr int kCorrBits = 3;
    static constexpr int kGlobalGainBits = 5;
    static constexpr int kHbLspBits = 32; // 8 coefficients x 4 bits

    int subvectors_per_subframe() const { return kSubframeSize / subvector_len; }
    int innovation_entries() const { return 1 << codebook_bits; }
    int innovation_bits_per_subframe() const {
        return subvectors_per_subframe() * codebook_bits;
    }
    int innovation_bps() const { return innovation_bits_per_subframe() * 4 * 50; }

    // Narrowband (low-band) section.
    int bits_per_frame() const {
        return kLspBits + kGlobalGainBits +
               kSubframesPerFrame * (kPitchBits + kPitchGainBits + kCorrBits +
                                     innovation_bits_per_subframe());
    }
    int nb_frame_bytes() const { return (bits_per_frame() + 7) / 8; }

    // High-band section (wideband only), byte-aligned after the nb section.
    int hb_bits_per_frame() const {
        if (!wideband) return 0;
        int bits = kHbLspBits + kGlobalGainBits + kSubframesPerFrame * kCorrBits;
        if (hb_innovation)
            bits += kSubframesPerFrame * (kSubframeSize / 5) * 8;
        return bits;
    }
    int hb_frame_bytes() const { return (hb_bits_per_frame() + 7) / 8; }

    int total_frame_bytes() const { return nb_frame_bytes() + hb_frame_bytes(); }
    int sample_rate() const { return wideband ? 16000 : 8000; }
    int samples_per_frame() const { return wideband ? kWbFrameSize : kFrameSize; }

    static const ModeTable& get(ModeId id);
};

// Ternary stochastic innovation codebook, regenerated deterministically
// from the xorshift64* stream (seed kCodebookSeed). Entry 0 is the zero
// vector; every other entry is non-zero.
class InnovationCodebook {
public:
    InnovationCodebook(int entries, int subvector_len);

    int size() const { return entries_; }
    int length() const { return len_; }
    std::span<const signed char> entry(int idx) const {
        return {values_.data() + static_cast<size_t>(idx) * len_,
                static_cast<size_t>(len_)};
    }
    double energy(int idx) const { return energy_[idx]; }

    // Shared immutable instance for a mode's low-band geometry.
    static const InnovationCodebook& for_mode(const ModeTable& mode);
    // The 5-sample/8-bit codebook also used by the wb-high high band.
    static const InnovationCodebook& high_rate();

private:
    int entries_;
    int len_;
    std::vector<signed char> values_;
    std::vector<double> energy_;
};

// Scalar LSP quantizer: 4 bits per coefficient over per-coefficient ranges
// centred on the uniform grid i*pi/(order+1). The dequantizer re-sorts and
// enforces a 0.008 rad minimum separation.
std::vector<uint8_t> quantize_lsp(const Lsp& lsp);
Lsp dequantize_lsp(std::span<const uint8_t> indices);
// Reconstruction grid for one coefficient (i is 1-based), exposed for the
// exhaustive-scan tests.
void lsp_quantizer_range(int order, int i, double& lo, double& step);

inline constexpr double kLspMinSeparation = 0.008;

// 3-tap pitch gain vector codebook: 32 fixed entries (g0, g1, g2).
const std::array<std::array<double, 3>, 32>& pitch_gain_table();
int quantize_pitch_gains(double g0, double g1, double g2);

// Global excitation gain: log2(1+rms) uniform over [0, 15] in 32 steps.
int quantize_global_gain(double rms);
double global_gain_level(int index);

// Per-subframe gain correction: uniform in dB over [-12, +9.6] in 8 steps.
int quantize_gain_corr(double ratio);
double gain_corr_level(int index);

} // namespace mcelp

#endif
