#include "mcelp/nb_codec.hpp"

#include <algorithm>
#include <cmath>

namespace mcelp {

namespace {

// Cascade M(z) = [1/A(z)] -> [A(z/g1)] -> [1/A(z/g2)] with caller-owned
// delay lines (m1/m2/m3 hold at least the filter order each).
void cascade(const WeightedSynth& ws, std::span<const double> in,
             std::span<double> out, double* m1, double* m2, double* m3) {
    const int p = ws.syn.order();
    const double* syn = ws.syn.a.data();
    const double* num = ws.num.a.data();
    const double* den = ws.den.a.data();
    for (size_t n = 0; n < in.size(); n++) {
        double v = in[n];
        for (int i = 0; i < p; i++) v -= syn[i] * m1[i];
        for (int i = p - 1; i > 0; i--) m1[i] = m1[i - 1];
        m1[0] = v;

        double w = v;
        for (int i = 0; i < p; i++) w += num[i] * m2[i];
        for (int i = p - 1; i > 0; i--) m2[i] = m2[i - 1];
        m2[0] = v;

        double y = w;
        for (int i = 0; i < p; i++) y -= den[i] * m3[i];
        for (int i = p - 1; i > 0; i--) m3[i] = m3[i - 1];
        m3[0] = y;

        out[n] = y;
    }
}

double sum_sq(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

double subframe_rms(std::span<const double> v) {
    return std::sqrt(sum_sq(v) / static_cast<double>(v.size()));
}

} // namespace

WeightedSynth WeightedSynth::from_lpc(const Lpc& a, const WeightingConfig& cfg) {
    WeightedSynth ws;
    ws.syn = a;
    ws.num = bandwidth_expand(a, cfg.gamma1);
    ws.den = bandwidth_expand(a, cfg.gamma2);
    return ws;
}

void WeightedSynth::zero_state(std::span<const double> in,
                               std::span<double> out) const {
    double m1[kNbLpcOrder] = {0}, m2[kNbLpcOrder] = {0}, m3[kNbLpcOrder] = {0};
    cascade(*this, in, out, m1, m2, m3);
}

void WeightedSynth::run(std::span<const double> in, std::span<double> out,
                        FilterState& s_syn, FilterState& s_num,
                        FilterState& s_den) const {
    cascade(*this, in, out, s_syn.mem.data(), s_num.mem.data(),
            s_den.mem.data());
}

std::vector<double> WeightedSynth::impulse(int n) const {
    std::vector<double> in(n, 0.0), out(n);
    in[0] = 1.0;
    zero_state(in, out);
    return out;
}

void build_excitation(const ExcitationHistory& hist, int pitch,
                      const std::array<double, 3>& gains,
                      std::span<const double> innovation,
                      std::span<double> out) {
    const int n_out = static_cast<int>(out.size());
    for (int n = 0; n < n_out; n++) {
        const auto at = [&](int m) { return m < 0 ? hist.past(m) : out[m]; };
        double v = gains[0] * at(n - pitch - 1) + gains[1] * at(n - pitch) +
                   gains[2] * at(n - pitch + 1);
        if (!innovation.empty()) v += innovation[n];
        out[n] = std::clamp(v, -kExcitationClamp, kExcitationClamp);
    }
}

void build_innovation(const InnovationCodebook& cb,
                      std::span<const uint16_t> indices, double gain,
                      std::span<double> out) {
    const int len = cb.length();
    for (size_t p = 0; p < indices.size(); p++) {
        const auto e = cb.entry(indices[p]);
        for (int i = 0; i < len; i++)
            out[p * len + i] = gain * static_cast<double>(e[i]);
    }
}

AdaptiveResult adaptive_search(std::span<const double> target,
                               const ExcitationHistory& hist,
                               const WeightedSynth& ws) {
    const auto& table = pitch_gain_table();
    AdaptiveResult best;
    bool have_best = false;

    std::array<double, kSubframeSize> v0, v1, v2, f0, f1, f2, cand, filt;

    for (int pitch = kMinPitch; pitch <= kMaxPitch; pitch++) {
        if (pitch > kSubframeSize) {
            // every tap reads committed history: candidates are linear in
            // the gains, so filter the three tap vectors once per lag
            for (int n = 0; n < kSubframeSize; n++) {
                v0[n] = hist.past(n - pitch - 1);
                v1[n] = hist.past(n - pitch);
                v2[n] = hist.past(n - pitch + 1);
            }
            ws.zero_state(v0, f0);
            ws.zero_state(v1, f1);
            ws.zero_state(v2, f2);
            for (int j = 0; j < 32; j++) {
                const auto& g = table[j];
                double err = 0.0;
                for (int n = 0; n < kSubframeSize; n++) {
                    const double y = g[0] * f0[n] + g[1] * f1[n] + g[2] * f2[n];
                    const double d = target[n] - y;
                    err += d * d;
                }
                if (!have_best || err < best.err) {
                    have_best = true;
                    best.err = err;
                    best.pitch = pitch;
                    best.gain_index = j;
                    for (int n = 0; n < kSubframeSize; n++) {
                        best.excitation[n] =
                            g[0] * v0[n] + g[1] * v1[n] + g[2] * v2[n];
                        best.filtered[n] =
                            g[0] * f0[n] + g[1] * f1[n] + g[2] * f2[n];
                    }
                }
            }
        } else {
            // short lags re-read the candidate itself (Eq. 2 recursion)
            for (int j = 0; j < 32; j++) {
                build_excitation(hist, pitch, table[j], {}, cand);
                ws.zero_state(cand, filt);
                double err = 0.0;
                for (int n = 0; n < kSubframeSize; n++) {
                    const double d = target[n] - filt[n];
                    err += d * d;
                }
                if (!have_best || err < best.err) {
                    have_best = true;
                    best.err = err;
                    best.pitch = pitch;
                    best.gain_index = j;
                    best.excitation = cand;
                    best.filtered = filt;
                }
            }
        }
    }
    return best;
}

FixedResult fixed_search(std::span<const double> target_remaining,
                         const InnovationCodebook& cb, double gain,
                         const WeightedSynth& ws) {
    const int len = cb.length();
    const int nsv = kSubframeSize / len;
    const std::vector<double> h = ws.impulse(kSubframeSize);

    FixedResult out;
    out.indices.reserve(nsv);
    std::array<double, kSubframeSize> t_rem{};
    std::copy(target_remaining.begin(), target_remaining.end(), t_rem.begin());

    for (int p = 0; p < nsv; p++) {
        const int off = p * len;
        int best_k = 0;
        double best_err = 0.0;
        bool have_best = false;
        for (int k = 0; k < cb.size(); k++) {
            const auto e = cb.entry(k);
            double err = 0.0;
            for (int n = off; n < kSubframeSize; n++) {
                double y = 0.0;
                const int imax = std::min(len - 1, n - off);
                for (int i = 0; i <= imax; i++)
                    y += static_cast<double>(e[i]) * h[n - off - i];
                const double d = t_rem[n] - gain * y;
                err += d * d;
            }
            if (!have_best || err < best_err) {
                have_best = true;
                best_err = err;
                best_k = k;
            }
        }
        out.indices.push_back(static_cast<uint16_t>(best_k));
        const auto e = cb.entry(best_k);
        for (int n = off; n < kSubframeSize; n++) {
            double y = 0.0;
            const int imax = std::min(len - 1, n - off);
            for (int i = 0; i <= imax; i++)
                y += static_cast<double>(e[i]) * h[n - off - i];
            y *= gain;
            t_rem[n] -= y;
            out.filtered[n] += y;
        }
    }
    out.err = sum_sq(t_rem);
    return out;
}

uint8_t open_loop_global_gain(std::span<const double> frame_residual) {
    const double rms = subframe_rms(frame_residual);
    return static_cast<uint8_t>(quantize_global_gain(rms));
}

uint8_t open_loop_correction(std::span<const double> subframe_residual,
                             double global_level) {
    const double rms = subframe_rms(subframe_residual);
    const double ratio = global_level > 0.0 ? rms / global_level : 0.0;
    return static_cast<uint8_t>(quantize_gain_corr(ratio));
}

Lsp interpolate_lsp(const Lsp& prev, const Lsp& cur, int subframe) {
    const double wc = (2.0 * subframe + 1.0) / 8.0;
    const double wp = 1.0 - wc;
    Lsp out;
    out.w.resize(cur.order());
    for (int i = 0; i < cur.order(); i++)
        out.w[i] = wp * prev.w[i] + wc * cur.w[i];
    return out;
}

void validate_frame_params(const FrameParams& p, const ModeTable& mode) {
    const auto fail = [](const char* what) {
        throw CodecError(Errc::malformed_frame, what);
    };
    for (uint8_t idx : p.lsp_indices)
        if (idx > 15) fail("lsp index out of range");
    if (p.global_gain_index > 31) fail("global gain index out of range");
    for (const auto& sub : p.sub) {
        if (sub.pitch < kMinPitch || sub.pitch > kMaxPitch)
            fail("pitch out of range");
        if (sub.pitch_gain_index > 31) fail("pitch gain index out of range");
        if (sub.corr_index > 7) fail("gain correction index out of range");
        if (static_cast<int>(sub.innovation.size()) !=
            mode.subvectors_per_subframe())
            fail("innovation index count mismatch");
        for (uint16_t k : sub.innovation)
            if (k >= mode.innovation_entries()) fail("innovation index out of range");
    }
}

NbEncoder::NbEncoder(const ModeTable& mode)
    : mode_(mode), codebook_(InnovationCodebook::for_mode(mode)) {
    if (mode.wideband)
        throw CodecError(Errc::invalid_input, "NbEncoder: narrowband modes only");
}

void NbEncoder::reset() {
    buf_.fill(0.0);
    first_ = true;
    hist_.reset();
    w_zero_.reset();
    w_pole_.reset();
    m_syn_.reset();
    m_num_.reset();
    m_den_.reset();
    res_state_.reset();
    diag_ = {};
}

FrameParams NbEncoder::encode_frame(std::span<const double> frame) {
    if (frame.size() != kFrameSize)
        throw CodecError(Errc::invalid_input, "encode_frame: need 160 samples");

    // Slide the analysis buffer: the previous look-ahead opens the frame
    // now being coded, the incoming samples complete it and refill the
    // look-ahead. On the first call the stale half is all zeros.
    for (int i = 0; i < kLookAhead; i++) buf_[i] = buf_[kFrameSize + i];
    for (int i = 0; i < kFrameSize; i++) buf_[kLookAhead + i] = frame[i];

    const auto acf = autocorrelate(buf_, WindowKind::hamming, kNbLpcOrder);
    const auto lev = levinson_durbin(acf, kNbLpcOrder);
    const Lsp lsp_raw = lpc_to_lsp(lev.lpc).value_or(
        first_ ? Lsp::uniform(kNbLpcOrder) : lsp_prev_);

    FrameParams params;
    {
        const auto idx = quantize_lsp(lsp_raw);
        std::copy(idx.begin(), idx.end(), params.lsp_indices.begin());
    }
    const Lsp lsp_q = dequantize_lsp(params.lsp_indices);
    const Lsp prev_q = first_ ? lsp_q : lsp_prev_;

    std::array<WeightedSynth, kSubframesPerFrame> ws;
    for (int s = 0; s < kSubframesPerFrame; s++)
        ws[s] = WeightedSynth::from_lpc(lsp_to_lpc(interpolate_lsp(prev_q, lsp_q, s)));

    // Open-loop global gain from the whole frame's LPC residual; the
    // per-subframe corrections later absorb what the adaptive codebook
    // removes.
    std::array<double, kFrameSize> residual;
    std::array<double, kFrameSize> sw;
    std::array<double, kSubframeSize> tmp;
    for (int s = 0; s < kSubframesPerFrame; s++) {
        const auto in = std::span(buf_).subspan(s * kSubframeSize, kSubframeSize);
        filter_all_zero(in, ws[s].syn, res_state_,
                        std::span(residual).subspan(s * kSubframeSize, kSubframeSize));
        filter_all_zero(in, ws[s].num, w_zero_, tmp);
        filter_all_pole(tmp, ws[s].den, w_pole_,
                        std::span(sw).subspan(s * kSubframeSize, kSubframeSize));
    }
    params.global_gain_index = open_loop_global_gain(residual);
    const double g_global = global_gain_level(params.global_gain_index);

    const auto& gain_table = pitch_gain_table();
    const std::array<double, kSubframeSize> zeros{};

    for (int s = 0; s < kSubframesPerFrame; s++) {
        auto& sp = params.sub[s];

        // target = weighted input minus the zero-input response of M(z)
        std::array<double, kSubframeSize> zir, target;
        {
            FilterState c1 = m_syn_, c2 = m_num_, c3 = m_den_;
            ws[s].run(zeros, zir, c1, c2, c3);
        }
        for (int n = 0; n < kSubframeSize; n++)
            target[n] = sw[s * kSubframeSize + n] - zir[n];

        const AdaptiveResult ar = adaptive_search(target, hist_, ws[s]);
        sp.pitch = ar.pitch;
        sp.pitch_gain_index = static_cast<uint8_t>(ar.gain_index);
        diag_[s].err_zero = sum_sq(target);
        diag_[s].err_adaptive = ar.err;

        // open-loop innovation gain from the post-adaptive residual
        std::array<double, kSubframeSize> post_adaptive;
        for (int n = 0; n < kSubframeSize; n++)
            post_adaptive[n] = residual[s * kSubframeSize + n] - ar.excitation[n];
        sp.corr_index = open_loop_correction(post_adaptive, g_global);
        const double gain_s = g_global * gain_corr_level(sp.corr_index);

        std::array<double, kSubframeSize> t2;
        for (int n = 0; n < kSubframeSize; n++)
            t2[n] = target[n] - ar.filtered[n];
        const FixedResult fr = fixed_search(t2, codebook_, gain_s, ws[s]);
        sp.innovation = fr.indices;
        diag_[s].err_fixed = fr.err;

        // commit exactly what the decoder will reconstruct
        std::array<double, kSubframeSize> innov, exc, scratch;
        build_innovation(codebook_, sp.innovation, gain_s, innov);
        build_excitation(hist_, sp.pitch, gain_table[sp.pitch_gain_index], innov, exc);
        hist_.commit(exc);
        ws[s].run(exc, scratch, m_syn_, m_num_, m_den_);
    }

    lsp_prev_ = lsp_q;
    first_ = false;
    return params;
}

NbDecoder::NbDecoder(const ModeTable& mode)
    : mode_(mode), codebook_(InnovationCodebook::for_mode(mode)) {
    if (mode.wideband)
        throw CodecError(Errc::invalid_input, "NbDecoder: narrowband modes only");
}

void NbDecoder::reset() {
    first_ = true;
    hist_.reset();
    syn_state_.reset();
    last_exc_.fill(0.0);
    have_last_ = false;
    last_pitch_ = kMinPitch;
    last_pitch_gain_sum_ = 0.0;
    consecutive_lost_ = 0;
}

void NbDecoder::decode_frame(const FrameParams& params, std::span<double> out) {
    if (out.size() != kFrameSize)
        throw CodecError(Errc::invalid_input, "decode_frame: need 160-sample output");
    validate_frame_params(params, mode_);

    const Lsp lsp_q = dequantize_lsp(params.lsp_indices);
    const Lsp prev_q = first_ ? lsp_q : lsp_prev_;
    const double g_global = global_gain_level(params.global_gain_index);
    const auto& gain_table = pitch_gain_table();

    for (int s = 0; s < kSubframesPerFrame; s++) {
        const auto& sp = params.sub[s];
        const Lpc aq = lsp_to_lpc(interpolate_lsp(prev_q, lsp_q, s));
        const double gain_s = g_global * gain_corr_level(sp.corr_index);

        std::array<double, kSubframeSize> innov, exc;
        build_innovation(codebook_, sp.innovation, gain_s, innov);
        build_excitation(hist_, sp.pitch, gain_table[sp.pitch_gain_index], innov, exc);
        hist_.commit(exc);
        std::copy(exc.begin(), exc.end(),
                  last_exc_.begin() + s * kSubframeSize);
        filter_all_pole(exc, aq, syn_state_,
                        out.subspan(s * kSubframeSize, kSubframeSize));
    }

    lsp_prev_ = lsp_q;
    first_ = false;
    have_last_ = true;
    consecutive_lost_ = 0;
    last_pitch_ = params.sub[kSubframesPerFrame - 1].pitch;
    const auto& g = gain_table[params.sub[kSubframesPerFrame - 1].pitch_gain_index];
    last_pitch_gain_sum_ = g[0] + g[1] + g[2];
    last_lsp_ = lsp_q;
}

void NbDecoder::conceal_frame(std::span<double> out) {
    if (out.size() != kFrameSize)
        throw CodecError(Errc::invalid_input, "conceal_frame: need 160-sample output");
    consecutive_lost_++;

    if (!have_last_) {
        // nothing to extrapolate from yet
        std::array<double, kSubframeSize> silence{};
        for (int s = 0; s < kSubframesPerFrame; s++) hist_.commit(silence);
        last_exc_.fill(0.0);
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }

    const double atten = std::pow(0.85, consecutive_lost_);
    const double g = atten * std::min(0.9, last_pitch_gain_sum_);
    const Lpc a_last = lsp_to_lpc(last_lsp_);

    for (int s = 0; s < kSubframesPerFrame; s++) {
        std::array<double, kSubframeSize> exc;
        build_excitation(hist_, last_pitch_, {0.0, g, 0.0}, {}, exc);
        hist_.commit(exc);
        std::copy(exc.begin(), exc.end(),
                  last_exc_.begin() + s * kSubframeSize);
        filter_all_pole(exc, a_last, syn_state_,
                        out.subspan(s * kSubframeSize, kSubframeSize));
    }
    for (auto& v : out) v = std::clamp(v, -32767.0, 32767.0);
}

} // namespace mcelp
