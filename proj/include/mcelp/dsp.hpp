#ifndef MCELP_DSP_HPP
#define MCELP_DSP_HPP

#include <optional>
#include <span>
#include <vector>

#include "mcelp/common.hpp"

namespace mcelp {

// Short-term predictor A(z) = 1 + sum_i a[i-1] z^-i. The prediction
// residual of a signal x is x[n] + sum_i a[i-1] x[n-i], so a stable
// synthesis filter is 1/A(z).
struct Lpc {
    std::vector<double> a;

    int order() const { return static_cast<int>(a.size()); }
    static Lpc zeros(int order) { return Lpc{std::vector<double>(order, 0.0)}; }
};

// Line spectral representation of A(z): strictly ascending angles in (0, pi).
struct Lsp {
    std::vector<double> w;

    int order() const { return static_cast<int>(w.size()); }
    // LSPs of A(z) = 1: a uniform grid at i*pi/(order+1).
    static Lsp uniform(int order);
};

struct WeightingConfig {
    double gamma1 = 0.9;
    double gamma2 = 0.6;
};

struct NotchConfig {
    double alpha = 0.98;
};

enum class WindowKind { rectangular, hamming };

// Delay line for the all-pole / all-zero filters, sized by filter order.
struct FilterState {
    std::vector<double> mem;

    explicit FilterState(int order = 0) : mem(order, 0.0) {}
    void reset() { mem.assign(mem.size(), 0.0); }
};

struct WeightingState {
    FilterState zero;
    FilterState pole;

    explicit WeightingState(int order = 0) : zero(order), pole(order) {}
    void reset() { zero.reset(); pole.reset(); }
};

struct NotchState {
    double mem = 0.0;
    void reset() { mem = 0.0; }
};

struct BiquadCoeffs {
    double b0, b1, b2, a1, a2;
};

struct BiquadState {
    double z1 = 0.0, z2 = 0.0;
    void reset() { z1 = z2 = 0.0; }
};

std::vector<double> hamming_window(int length);

// Windowed autocorrelation with the conditioning used before Levinson-
// Durbin: acf[0] is scaled by 1.0001 and lags get a 60 Hz Gaussian lag
// window (computed at the 8 kHz band rate both codec bands run at).
std::vector<double> autocorrelate(std::span<const double> frame,
                                  WindowKind window, int max_lag);

struct LevinsonResult {
    Lpc lpc;
    std::vector<double> reflections; // PARCOR convention: k1 = acf[1]/acf[0]
    double prediction_error = 0.0;
    bool degenerate = false; // some |k| >= 1 was clamped
};

LevinsonResult levinson_durbin(std::span<const double> acf, int order);

// Returns nullopt when the root search does not find `order` sign changes;
// the caller substitutes the previous frame's LSPs.
std::optional<Lsp> lpc_to_lsp(const Lpc& lpc);
Lpc lsp_to_lpc(const Lsp& lsp);

// A(z/gamma): a[i] scaled by gamma^(i+1).
Lpc bandwidth_expand(const Lpc& lpc, double gamma);

// y = x filtered by 1/A(z). Streaming: chunked calls with the same state
// are bit-identical to one-shot filtering.
void filter_all_pole(std::span<const double> in, const Lpc& lpc,
                     FilterState& state, std::span<double> out);

// y = x filtered by A(z).
void filter_all_zero(std::span<const double> in, const Lpc& lpc,
                     FilterState& state, std::span<double> out);

// W(z) = A(z/gamma1) / A(z/gamma2).
void perceptual_weight(std::span<const double> in, const Lpc& lpc,
                       const WeightingConfig& cfg, WeightingState& state,
                       std::span<double> out);

// y[n] = x[n] - m[n], m[n] = alpha*m[n-1] + (1-alpha)*x[n]. Zero gain at DC.
void dc_notch(std::span<const double> in, const NotchConfig& cfg,
              NotchState& state, std::span<double> out);

// Butterworth-style (Q = 1/sqrt(2)) second-order high-pass via bilinear
// transform at the given cutoff.
BiquadCoeffs make_highpass(double cutoff_hz, double rate);
void biquad(std::span<const double> in, const BiquadCoeffs& c,
            BiquadState& state, std::span<double> out);

inline void highpass(std::span<const double> in, double cutoff_hz, double rate,
                     BiquadState& state, std::span<double> out) {
    biquad(in, make_highpass(cutoff_hz, rate), state, out);
}

} // namespace mcelp

#endif
