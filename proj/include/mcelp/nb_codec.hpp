#ifndef MCELP_NB_CODEC_HPP
#define MCELP_NB_CODEC_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mcelp/codebooks.hpp"
#include "mcelp/common.hpp"
#include "mcelp/dsp.hpp"

namespace mcelp {

// Reconstructed excitation samples are clamped here so that a hostile but
// syntactically valid bitstream can never drive the decoder non-finite.
// Real signals stay orders of magnitude below the limit.
inline constexpr double kExcitationClamp = 16777216.0; // 2^24

struct SubframeParams {
    int pitch = kMinPitch; // T in [17, 144]
    uint8_t pitch_gain_index = 0;
    uint8_t corr_index = 0;
    std::vector<uint16_t> innovation; // one index per sub-vector

    bool operator==(const SubframeParams&) const = default;
};

// Fully quantized parameter set of one 20 ms frame.
struct FrameParams {
    std::array<uint8_t, kNbLpcOrder> lsp_indices{};
    uint8_t global_gain_index = 0;
    std::array<SubframeParams, kSubframesPerFrame> sub;

    bool operator==(const FrameParams&) const = default;
};

// Rolling buffer of committed excitation shared by encoder and decoder.
// past(-1) is the most recent committed sample.
class ExcitationHistory {
public:
    ExcitationHistory() { reset(); }
    void reset() { buf_.fill(0.0); }

    double past(int neg) const { return buf_[kExcitationHistory + neg]; }

    void commit(std::span<const double> subframe) {
        for (int i = 0; i < kExcitationHistory - kSubframeSize; i++)
            buf_[i] = buf_[i + kSubframeSize];
        for (int i = 0; i < kSubframeSize; i++)
            buf_[kExcitationHistory - kSubframeSize + i] = subframe[i];
    }

private:
    std::array<double, kExcitationHistory> buf_;
};

// Per-subframe filter bundle for the AbS searches: candidates are passed
// through M(z) = A(z/g1) / (A(z/g2) A(z)), i.e. synthesis followed by the
// perceptual weighting of Eq. W(z) = A(z/g1)/A(z/g2).
struct WeightedSynth {
    Lpc syn; // quantized, interpolated A(z) for this subframe
    Lpc num; // A(z/gamma1)
    Lpc den; // A(z/gamma2)

    static WeightedSynth from_lpc(const Lpc& a, const WeightingConfig& cfg = {});

    // Zero-state response of M(z).
    void zero_state(std::span<const double> in, std::span<double> out) const;
    std::vector<double> impulse(int n) const;
    // Stateful run for the encoder's zero-input-response / commit
    // bookkeeping; each state must be sized to the filter order.
    void run(std::span<const double> in, std::span<double> out,
             FilterState& s_syn, FilterState& s_num, FilterState& s_den) const;
};

// 3-tap adaptive-codebook reconstruction plus scaled innovation:
//   e[n] = g0 E(n-T-1) + g1 E(n-T) + g2 E(n-T+1) + c[n]
// where E reads committed history for negative indices and e itself inside
// the subframe (well-defined for all T >= kMinPitch). Pass an empty span
// for a pure adaptive candidate.
void build_excitation(const ExcitationHistory& hist, int pitch,
                      const std::array<double, 3>& gains,
                      std::span<const double> innovation,
                      std::span<double> out);

// gain * concatenated codebook entries.
void build_innovation(const InnovationCodebook& cb,
                      std::span<const uint16_t> indices, double gain,
                      std::span<double> out);

struct AdaptiveResult {
    int pitch = kMinPitch;
    int gain_index = 0;
    std::array<double, kSubframeSize> excitation{}; // adaptive-only candidate
    std::array<double, kSubframeSize> filtered{};
    double err = 0.0;
};

// Exhaustive joint search over all pitch lags and all 32 gain entries,
// minimizing the weighted-domain error against `target`. Ties resolve to
// the smallest lag, then the smallest gain index.
AdaptiveResult adaptive_search(std::span<const double> target,
                               const ExcitationHistory& hist,
                               const WeightedSynth& ws);

struct FixedResult {
    std::vector<uint16_t> indices;
    std::array<double, kSubframeSize> filtered{}; // total scaled contribution
    double err = 0.0;
};

// Sequential exhaustive search of the innovation codebook, one sub-vector
// position at a time, with the open-loop gain already fixed. Ties resolve
// to the lowest entry index.
FixedResult fixed_search(std::span<const double> target_remaining,
                         const InnovationCodebook& cb, double gain,
                         const WeightedSynth& ws);

// Open-loop gain (step 3): the global gain quantizes the log-rms of the
// whole frame's LPC residual; each subframe's correction quantizes the
// ratio of its post-adaptive residual rms to the global reconstruction.
uint8_t open_loop_global_gain(std::span<const double> frame_residual);
uint8_t open_loop_correction(std::span<const double> subframe_residual,
                             double global_level);

struct SubframeDiag {
    double err_zero = 0.0;     // weighted error of zero excitation
    double err_adaptive = 0.0; // after the adaptive contribution
    double err_fixed = 0.0;    // after the innovation
};

class NbEncoder {
public:
    explicit NbEncoder(const ModeTable& mode);

    // Encodes the 160-sample frame that ends 80 samples into `frame`: the
    // analysis window covers that frame plus the remaining 80 samples of
    // look-ahead, so the coded signal runs 80 samples behind the input.
    // The first call zero-pads the not-yet-provided part of the window.
    FrameParams encode_frame(std::span<const double> frame);

    void reset();
    static constexpr int look_ahead() { return kLookAhead; }

    const ExcitationHistory& history() const { return hist_; }
    const std::array<SubframeDiag, kSubframesPerFrame>& last_diagnostics() const {
        return diag_;
    }

private:
    const ModeTable& mode_;
    const InnovationCodebook& codebook_;
    std::array<double, kWindowSize> buf_{}; // [0,160) frame, [160,240) look-ahead
    Lsp lsp_prev_;
    bool first_ = true;
    ExcitationHistory hist_;
    FilterState w_zero_{kNbLpcOrder}, w_pole_{kNbLpcOrder}; // W(z) on input
    FilterState m_syn_{kNbLpcOrder}, m_num_{kNbLpcOrder},
        m_den_{kNbLpcOrder};                // M(z) on committed excitation
    FilterState res_state_{kNbLpcOrder};    // A(z) residual on input
    std::array<SubframeDiag, kSubframesPerFrame> diag_{};
};

class NbDecoder {
public:
    explicit NbDecoder(const ModeTable& mode);

    // Throws Errc::malformed_frame (leaving the state untouched) if any
    // index is out of range for the mode.
    void decode_frame(const FrameParams& params, std::span<double> out);

    // Pitch-repetition concealment for a lost frame.
    void conceal_frame(std::span<double> out);

    void reset();
    const ExcitationHistory& history() const { return hist_; }
    // Excitation of the most recently decoded or concealed frame; the
    // wideband layer folds it into the high band.
    const std::array<double, kFrameSize>& last_excitation() const {
        return last_exc_;
    }

private:
    const ModeTable& mode_;
    const InnovationCodebook& codebook_;
    Lsp lsp_prev_;
    bool first_ = true;
    ExcitationHistory hist_;
    FilterState syn_state_{kNbLpcOrder};
    std::array<double, kFrameSize> last_exc_{};
    // concealment memory
    bool have_last_ = false;
    int last_pitch_ = kMinPitch;
    double last_pitch_gain_sum_ = 0.0;
    int consecutive_lost_ = 0;
    Lsp last_lsp_;
};

// Linear interpolation in the LSP domain: subframe s uses weight
// (2s+1)/8 on the current frame's angles.
Lsp interpolate_lsp(const Lsp& prev, const Lsp& cur, int subframe);

void validate_frame_params(const FrameParams& params, const ModeTable& mode);

} // namespace mcelp

#endif
