#ifndef MCELP_WIDEBAND_HPP
#define MCELP_WIDEBAND_HPP

#include <array>
#include <span>

#include "mcelp/nb_codec.hpp"

namespace mcelp {

// Two-band critically sampled filterbank. The 64-tap linear-phase
// prototype is power-complementary, so analysis followed by synthesis is
// a pure 63-sample delay up to a small ripple; aliasing cancels exactly.
// The decimated high band comes out spectrally flipped.
class QmfBank {
public:
    static constexpr int kTaps = 64;
    static constexpr int kDelay = kTaps - 1; // input samples, end to end

    QmfBank() { reset(); }
    void reset();

    void analysis(std::span<const double> in, std::span<double> low,
                  std::span<double> high);
    void synthesis(std::span<const double> low, std::span<const double> high,
                   std::span<double> out);

    static const std::array<double, kTaps>& prototype();

private:
    std::array<double, kTaps - 1> in_hist_{};
    std::array<double, kTaps - 1> up_low_hist_{};
    std::array<double, kTaps - 1> up_high_hist_{};
};

struct WbFrameParams {
    FrameParams nb;
    std::array<uint8_t, kHbLpcOrder> hb_lsp_indices{};
    uint8_t hb_global_gain_index = 0;
    std::array<uint8_t, kSubframesPerFrame> hb_corr_indices{};
    // wb-high only: one entry list per subframe (8 x 8-bit indices)
    std::array<std::vector<uint16_t>, kSubframesPerFrame> hb_innovation;

    bool operator==(const WbFrameParams&) const = default;
};

class WbEncoder {
public:
    explicit WbEncoder(const ModeTable& mode);

    WbFrameParams encode_frame(std::span<const double> frame); // 320 samples
    void reset();

private:
    const ModeTable& mode_;
    NbEncoder nb_;
    QmfBank qmf_;
    // high-band analysis mirrors the narrowband timing (80-sample
    // look-ahead inside the decimated band)
    std::array<double, kWindowSize> hb_buf_{};
    Lsp hb_lsp_prev_;
    bool hb_first_ = true;
    FilterState hb_res_state_{kHbLpcOrder};
    FilterState hb_w_zero_{kHbLpcOrder}, hb_w_pole_{kHbLpcOrder};
    FilterState hb_m_syn_{kHbLpcOrder}, hb_m_num_{kHbLpcOrder},
        hb_m_den_{kHbLpcOrder};
};

class WbDecoder {
public:
    explicit WbDecoder(const ModeTable& mode);

    void decode_frame(const WbFrameParams& params, std::span<double> out);
    // Truncated-frame path: only the narrowband section survived. The low
    // band decodes exactly as a pure narrowband decoder would; the high
    // band is concealed as silence.
    void decode_frame_nb_only(const FrameParams& params, std::span<double> out);
    void conceal_frame(std::span<double> out);
    void reset();

    // Low-band signal of the most recent frame, before the QMF merge.
    const std::array<double, kFrameSize>& last_low_band() const {
        return last_low_;
    }

private:
    void merge(std::span<double> out);

    const ModeTable& mode_;
    NbDecoder nb_;
    QmfBank qmf_;
    Lsp hb_lsp_prev_;
    bool hb_first_ = true;
    FilterState hb_syn_state_{kHbLpcOrder};
    std::array<double, kFrameSize> last_low_{}, last_high_{};
};

void validate_wb_params(const WbFrameParams& params, const ModeTable& mode);

} // namespace mcelp

#endif
