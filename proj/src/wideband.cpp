#include "mcelp/wideband.hpp"

#include <algorithm>
#include <cmath>

namespace mcelp {

namespace {

constexpr double kPi = 3.14159265358979323846;

const ModeTable& low_band_mode(const ModeTable& wb_mode) {
    return ModeTable::get(wb_mode.hb_innovation ? ModeId::nb_high
                                                : ModeId::nb_low);
}

double subframe_rms(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc / static_cast<double>(v.size()));
}

} // namespace

const std::array<double, QmfBank::kTaps>& QmfBank::prototype() {
    // Start from a Hamming windowed-sinc halfband and project its amplitude
    // response onto power complementarity, A^2(w) + A^2(pi - w) = 1, so the
    // 2*H0 / -2*H1 synthesis pair reconstructs to a pure 63-sample delay.
    // The plain windowed sinc is amplitude-complementary and would leave a
    // -6 dB dip at the crossover. Fixed iteration count and grid keep the
    // table identical on every conforming platform.
    static const auto table = [] {
        constexpr int grid = 2048;
        constexpr double centre = (kTaps - 1) / 2.0;
        std::array<double, kTaps / 2> half;
        for (int n = 0; n < kTaps / 2; n++) {
            const double t = (n - centre) / 2.0;
            const double window =
                0.54 - 0.46 * std::cos(2.0 * kPi * n / (kTaps - 1));
            half[n] = 0.5 * std::sin(kPi * t) / (kPi * t) * window;
        }
        double dc = 0.0;
        for (double v : half) dc += v;
        for (auto& v : half) v /= 2.0 * dc;

        const auto amp = [&](double w) {
            double a = 0.0;
            for (int n = 0; n < kTaps / 2; n++)
                a += 2.0 * half[n] * std::cos(w * (centre - n));
            return a;
        };
        for (int iter = 0; iter < 60; iter++) {
            std::array<double, grid> target;
            for (int i = 0; i < grid; i++) {
                const double w = kPi * (i + 0.5) / grid;
                const double a = amp(w);
                const double b = amp(kPi - w);
                target[i] = a / std::sqrt(a * a + b * b);
            }
            for (int n = 0; n < kTaps / 2; n++) {
                double acc = 0.0;
                for (int i = 0; i < grid; i++) {
                    const double w = kPi * (i + 0.5) / grid;
                    acc += target[i] * std::cos(w * (centre - n));
                }
                half[n] = acc / grid;
            }
        }
        double dc2 = 0.0;
        for (double v : half) dc2 += v;
        for (auto& v : half) v /= 2.0 * dc2;

        std::array<double, kTaps> h;
        for (int n = 0; n < kTaps / 2; n++) {
            h[n] = half[n];
            h[kTaps - 1 - n] = half[n];
        }
        return h;
    }();
    return table;
}

void QmfBank::reset() {
    in_hist_.fill(0.0);
    up_low_hist_.fill(0.0);
    up_high_hist_.fill(0.0);
}

void QmfBank::analysis(std::span<const double> in, std::span<double> low,
                       std::span<double> high) {
    if (in.size() != kWbFrameSize || low.size() != kFrameSize ||
        high.size() != kFrameSize)
        throw CodecError(Errc::invalid_input, "qmf_analysis: need 320 -> 160+160");
    const auto& h = prototype();
    const auto x = [&](int j) {
        return j >= 0 ? in[j] : in_hist_[kTaps - 1 + j];
    };
    for (int m = 0; m < kFrameSize; m++) {
        double acc0 = 0.0, acc1 = 0.0;
        for (int k = 0; k < kTaps; k++) {
            const double v = x(2 * m - k);
            acc0 += h[k] * v;
            acc1 += (k & 1 ? -h[k] : h[k]) * v;
        }
        low[m] = acc0;
        high[m] = acc1;
    }
    for (int i = 0; i < kTaps - 1; i++)
        in_hist_[i] = in[kWbFrameSize - (kTaps - 1) + i];
}

void QmfBank::synthesis(std::span<const double> low,
                        std::span<const double> high, std::span<double> out) {
    if (low.size() != kFrameSize || high.size() != kFrameSize ||
        out.size() != kWbFrameSize)
        throw CodecError(Errc::invalid_input, "qmf_synthesis: need 160+160 -> 320");
    const auto& h = prototype();
    const auto u0 = [&](int j) -> double {
        if (j < 0) return up_low_hist_[kTaps - 1 + j];
        return j & 1 ? 0.0 : low[j >> 1];
    };
    const auto u1 = [&](int j) -> double {
        if (j < 0) return up_high_hist_[kTaps - 1 + j];
        return j & 1 ? 0.0 : high[j >> 1];
    };
    for (int j = 0; j < kWbFrameSize; j++) {
        double acc = 0.0;
        for (int k = 0; k < kTaps; k++) {
            const double g0 = 2.0 * h[k];
            const double g1 = (k & 1 ? -h[k] : h[k]) * -2.0;
            acc += g0 * u0(j - k) + g1 * u1(j - k);
        }
        out[j] = acc;
    }
    for (int i = 0; i < kTaps - 1; i++) {
        const int j = kWbFrameSize - (kTaps - 1) + i;
        up_low_hist_[i] = j & 1 ? 0.0 : low[j >> 1];
        up_high_hist_[i] = j & 1 ? 0.0 : high[j >> 1];
    }
}

void validate_wb_params(const WbFrameParams& params, const ModeTable& mode) {
    validate_frame_params(params.nb, low_band_mode(mode));
    const auto fail = [](const char* what) {
        throw CodecError(Errc::malformed_frame, what);
    };
    for (uint8_t idx : params.hb_lsp_indices)
        if (idx > 15) fail("hb lsp index out of range");
    if (params.hb_global_gain_index > 31) fail("hb gain index out of range");
    for (uint8_t c : params.hb_corr_indices)
        if (c > 7) fail("hb correction index out of range");
    for (const auto& inn : params.hb_innovation) {
        if (mode.hb_innovation) {
            if (static_cast<int>(inn.size()) != kSubframeSize / 5)
                fail("hb innovation index count mismatch");
            for (uint16_t k : inn)
                if (k >= 256) fail("hb innovation index out of range");
        } else if (!inn.empty()) {
            fail("hb innovation present in envelope-only mode");
        }
    }
}

WbEncoder::WbEncoder(const ModeTable& mode)
    : mode_(mode), nb_(low_band_mode(mode)) {
    if (!mode.wideband)
        throw CodecError(Errc::invalid_input, "WbEncoder: wideband modes only");
}

void WbEncoder::reset() {
    nb_.reset();
    qmf_.reset();
    hb_buf_.fill(0.0);
    hb_first_ = true;
    hb_res_state_.reset();
    hb_w_zero_.reset();
    hb_w_pole_.reset();
    hb_m_syn_.reset();
    hb_m_num_.reset();
    hb_m_den_.reset();
}

WbFrameParams WbEncoder::encode_frame(std::span<const double> frame) {
    if (frame.size() != kWbFrameSize)
        throw CodecError(Errc::invalid_input, "encode_frame: need 320 samples");

    std::array<double, kFrameSize> low, high;
    qmf_.analysis(frame, low, high);

    WbFrameParams params;
    params.nb = nb_.encode_frame(low);

    // High band: frame-basis 8th-order LPC, open-loop gains, and (wb-high
    // only) a fixed-codebook AbS with no adaptive contribution. Timing
    // mirrors the narrowband encoder's 80-sample look-ahead.
    for (int i = 0; i < kLookAhead; i++) hb_buf_[i] = hb_buf_[kFrameSize + i];
    for (int i = 0; i < kFrameSize; i++) hb_buf_[kLookAhead + i] = high[i];

    const auto acf = autocorrelate(hb_buf_, WindowKind::hamming, kHbLpcOrder);
    const auto lev = levinson_durbin(acf, kHbLpcOrder);
    const Lsp lsp_raw = lpc_to_lsp(lev.lpc).value_or(
        hb_first_ ? Lsp::uniform(kHbLpcOrder) : hb_lsp_prev_);
    {
        const auto idx = quantize_lsp(lsp_raw);
        std::copy(idx.begin(), idx.end(), params.hb_lsp_indices.begin());
    }
    const Lsp lsp_q = dequantize_lsp(params.hb_lsp_indices);
    const Lsp prev_q = hb_first_ ? lsp_q : hb_lsp_prev_;

    std::array<WeightedSynth, kSubframesPerFrame> ws;
    for (int s = 0; s < kSubframesPerFrame; s++)
        ws[s] = WeightedSynth::from_lpc(lsp_to_lpc(interpolate_lsp(prev_q, lsp_q, s)));

    std::array<double, kFrameSize> residual;
    for (int s = 0; s < kSubframesPerFrame; s++)
        filter_all_zero(std::span(hb_buf_).subspan(s * kSubframeSize, kSubframeSize),
                        ws[s].syn, hb_res_state_,
                        std::span(residual).subspan(s * kSubframeSize, kSubframeSize));
    params.hb_global_gain_index = open_loop_global_gain(residual);
    const double g_hb = global_gain_level(params.hb_global_gain_index);

    for (int s = 0; s < kSubframesPerFrame; s++)
        params.hb_corr_indices[s] = open_loop_correction(
            std::span(residual).subspan(s * kSubframeSize, kSubframeSize), g_hb);

    if (mode_.hb_innovation) {
        const auto& cb = InnovationCodebook::high_rate();
        std::array<double, kFrameSize> sw;
        std::array<double, kSubframeSize> tmp;
        for (int s = 0; s < kSubframesPerFrame; s++) {
            const auto in = std::span(hb_buf_).subspan(s * kSubframeSize, kSubframeSize);
            filter_all_zero(in, ws[s].num, hb_w_zero_, tmp);
            filter_all_pole(tmp, ws[s].den, hb_w_pole_,
                            std::span(sw).subspan(s * kSubframeSize, kSubframeSize));
        }
        const std::array<double, kSubframeSize> zeros{};
        for (int s = 0; s < kSubframesPerFrame; s++) {
            std::array<double, kSubframeSize> zir, target;
            {
                FilterState c1 = hb_m_syn_, c2 = hb_m_num_, c3 = hb_m_den_;
                ws[s].run(zeros, zir, c1, c2, c3);
            }
            for (int n = 0; n < kSubframeSize; n++)
                target[n] = sw[s * kSubframeSize + n] - zir[n];

            const double gain_s =
                g_hb * gain_corr_level(params.hb_corr_indices[s]);
            const FixedResult fr = fixed_search(target, cb, gain_s, ws[s]);
            params.hb_innovation[s] = fr.indices;

            std::array<double, kSubframeSize> innov, scratch;
            build_innovation(cb, fr.indices, gain_s, innov);
            ws[s].run(innov, scratch, hb_m_syn_, hb_m_num_, hb_m_den_);
        }
    }

    hb_lsp_prev_ = lsp_q;
    hb_first_ = false;
    return params;
}

WbDecoder::WbDecoder(const ModeTable& mode)
    : mode_(mode), nb_(low_band_mode(mode)) {
    if (!mode.wideband)
        throw CodecError(Errc::invalid_input, "WbDecoder: wideband modes only");
}

void WbDecoder::reset() {
    nb_.reset();
    qmf_.reset();
    hb_first_ = true;
    hb_syn_state_.reset();
    last_low_.fill(0.0);
    last_high_.fill(0.0);
}

void WbDecoder::merge(std::span<double> out) {
    qmf_.synthesis(last_low_, last_high_, out);
}

void WbDecoder::decode_frame(const WbFrameParams& params, std::span<double> out) {
    if (out.size() != kWbFrameSize)
        throw CodecError(Errc::invalid_input, "decode_frame: need 320-sample output");
    validate_wb_params(params, mode_);

    nb_.decode_frame(params.nb, last_low_);

    const Lsp lsp_q = dequantize_lsp(params.hb_lsp_indices);
    const Lsp prev_q = hb_first_ ? lsp_q : hb_lsp_prev_;
    const double g_hb = global_gain_level(params.hb_global_gain_index);
    const auto& e_nb = nb_.last_excitation();

    for (int s = 0; s < kSubframesPerFrame; s++) {
        const Lpc a = lsp_to_lpc(interpolate_lsp(prev_q, lsp_q, s));
        const double gain_s = g_hb * gain_corr_level(params.hb_corr_indices[s]);
        std::array<double, kSubframeSize> e_hb;
        if (mode_.hb_innovation) {
            build_innovation(InnovationCodebook::high_rate(),
                             params.hb_innovation[s], gain_s, e_hb);
        } else {
            // fold the decoded narrowband excitation, rescaled to the
            // quantized high-band gain
            const auto sub = std::span(e_nb).subspan(s * kSubframeSize, kSubframeSize);
            const double rms = subframe_rms(sub);
            const double f = rms > 0.0 ? gain_s / rms : 0.0;
            for (int n = 0; n < kSubframeSize; n++) e_hb[n] = f * sub[n];
        }
        filter_all_pole(e_hb, a, hb_syn_state_,
                        std::span(last_high_).subspan(s * kSubframeSize, kSubframeSize));
    }

    hb_lsp_prev_ = lsp_q;
    hb_first_ = false;
    merge(out);
}

void WbDecoder::decode_frame_nb_only(const FrameParams& params,
                                     std::span<double> out) {
    if (out.size() != kWbFrameSize)
        throw CodecError(Errc::invalid_input, "decode_frame_nb_only: need 320-sample output");
    nb_.decode_frame(params, last_low_);

    // high band concealed as silence: ring the synthesis filter down
    const std::array<double, kFrameSize> zeros{};
    const Lpc a = hb_first_ ? Lpc::zeros(kHbLpcOrder) : lsp_to_lpc(hb_lsp_prev_);
    filter_all_pole(zeros, a, hb_syn_state_, last_high_);
    merge(out);
}

void WbDecoder::conceal_frame(std::span<double> out) {
    if (out.size() != kWbFrameSize)
        throw CodecError(Errc::invalid_input, "conceal_frame: need 320-sample output");
    nb_.conceal_frame(last_low_);
    const std::array<double, kFrameSize> zeros{};
    const Lpc a = hb_first_ ? Lpc::zeros(kHbLpcOrder) : lsp_to_lpc(hb_lsp_prev_);
    filter_all_pole(zeros, a, hb_syn_state_, last_high_);
    merge(out);
}

} // namespace mcelp
