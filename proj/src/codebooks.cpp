#include "mcelp/codebooks.hpp"

#include <algorithm>
#include <cmath>

namespace mcelp {

namespace {

constexpr double kPi = 3.14159265358979323846;

const ModeTable kModes[4] = {
    // id, wideband, hb_innovation, subvector_len, codebook_bits
    {ModeId::nb_low, false, false, 20, 5},
    {ModeId::nb_high, false, false, 5, 8},
    {ModeId::wb_low, true, false, 20, 5},
    {ModeId::wb_high, true, true, 5, 8},
};

} // namespace

const ModeTable& ModeTable::get(ModeId id) {
    return kModes[static_cast<int>(id)];
}

InnovationCodebook::InnovationCodebook(int entries, int subvector_len)
    : entries_(entries), len_(subvector_len) {
    values_.assign(static_cast<size_t>(entries) * len_, 0);
    energy_.assign(entries, 0.0);

    Xorshift64Star rng(kCodebookSeed);
    // Entry 0 stays all-zero and consumes nothing from the stream. Every
    // later entry is redrawn until non-zero so the zero vector is unique.
    for (int j = 1; j < entries; j++) {
        signed char* v = values_.data() + static_cast<size_t>(j) * len_;
        bool nonzero = false;
        while (!nonzero) {
            for (int i = 0; i < len_; i++) {
                const uint64_t t = rng.next_u32();
                signed char val = 0;
                if (6 * t < (1ULL << 32))
                    val = -1;
                else if (6 * t > 5 * (1ULL << 32))
                    val = 1;
                v[i] = val;
                nonzero = nonzero || val != 0;
            }
        }
        double e = 0.0;
        for (int i = 0; i < len_; i++) e += static_cast<double>(v[i]) * v[i];
        energy_[j] = e;
    }
}

const InnovationCodebook& InnovationCodebook::for_mode(const ModeTable& mode) {
    static const InnovationCodebook low(32, 20);
    static const InnovationCodebook high(256, 5);
    return mode.codebook_bits == 5 ? low : high;
}

const InnovationCodebook& InnovationCodebook::high_rate() {
    return for_mode(ModeTable::get(ModeId::nb_high));
}

void lsp_quantizer_range(int order, int i, double& lo, double& step) {
    const double anchor = kPi / (order + 1);
    lo = std::max(0.02, (i - 1) * anchor - 0.25);
    const double hi = std::min(kPi - 0.02, i * anchor + 0.25);
    step = (hi - lo) / 15.0;
}

std::vector<uint8_t> quantize_lsp(const Lsp& lsp) {
    const int order = lsp.order();
    std::vector<uint8_t> idx(order);
    for (int i = 1; i <= order; i++) {
        double lo, step;
        lsp_quantizer_range(order, i, lo, step);
        const double q = std::round((lsp.w[i - 1] - lo) / step);
        idx[i - 1] = static_cast<uint8_t>(std::clamp(q, 0.0, 15.0));
    }
    return idx;
}

Lsp dequantize_lsp(std::span<const uint8_t> indices) {
    const int order = static_cast<int>(indices.size());
    Lsp lsp;
    lsp.w.resize(order);
    for (int i = 1; i <= order; i++) {
        double lo, step;
        lsp_quantizer_range(order, i, lo, step);
        lsp.w[i - 1] = lo + indices[i - 1] * step;
    }
    std::sort(lsp.w.begin(), lsp.w.end());
    for (int i = 1; i < order; i++)
        lsp.w[i] = std::max(lsp.w[i], lsp.w[i - 1] + kLspMinSeparation);
    return lsp;
}

const std::array<std::array<double, 3>, 32>& pitch_gain_table() {
    static const auto table = [] {
        const double g1[8] = {0.0, 0.25, 0.5, 0.75, 0.9, 1.05, 1.2, 1.35};
        const double pairs[4][2] = {{0.0, 0.0}, {0.1, 0.1}, {0.25, 0.0}, {0.0, 0.25}};
        std::array<std::array<double, 3>, 32> t{};
        for (int j = 0; j < 32; j++)
            t[j] = {pairs[j & 3][0], g1[j >> 2], pairs[j & 3][1]};
        return t;
    }();
    return table;
}

int quantize_pitch_gains(double g0, double g1, double g2) {
    const auto& table = pitch_gain_table();
    int best = 0;
    double best_d = 0.0;
    for (int j = 0; j < 32; j++) {
        const double d0 = g0 - table[j][0];
        const double d1 = g1 - table[j][1];
        const double d2 = g2 - table[j][2];
        const double d = d0 * d0 + d1 * d1 + d2 * d2;
        if (j == 0 || d < best_d) {
            best = j;
            best_d = d;
        }
    }
    return best;
}

namespace {
constexpr double kGainLogMax = 15.0;
constexpr double kGainStep = kGainLogMax / 31.0;
constexpr double kCorrDbLo = -12.0;
constexpr double kCorrDbHi = 9.6;
constexpr double kCorrDbStep = (kCorrDbHi - kCorrDbLo) / 7.0;
} // namespace

int quantize_global_gain(double rms) {
    if (!(rms > 0.0)) return 0;
    const double v = std::log2(1.0 + rms);
    const double q = std::round(v / kGainStep);
    return static_cast<int>(std::clamp(q, 0.0, 31.0));
}

double global_gain_level(int index) {
    return std::exp2(index * kGainStep) - 1.0;
}

int quantize_gain_corr(double ratio) {
    if (!(ratio > 0.0)) return 0;
    const double db = 20.0 * std::log10(ratio);
    const double q = std::round((db - kCorrDbLo) / kCorrDbStep);
    return static_cast<int>(std::clamp(q, 0.0, 7.0));
}

double gain_corr_level(int index) {
    return std::pow(10.0, (kCorrDbLo + index * kCorrDbStep) / 20.0);
}

} // namespace mcelp
