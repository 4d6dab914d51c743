#include "mcelp/dsp.hpp"

#include <algorithm>
#include <cmath>

namespace mcelp {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Conditioning constants for the Levinson recursion: a small white-noise
// floor on acf[0] and a 60 Hz Gaussian lag window at the 8 kHz band rate.
constexpr double kWhiteNoiseFix = 1.0001;
constexpr double kLagWindowHz = 60.0;
constexpr double kBandRate = 8000.0;

constexpr double kReflectionClamp = 0.999999;

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

} // namespace

std::vector<double> hamming_window(int length) {
    std::vector<double> w(length);
    for (int n = 0; n < length; n++)
        w[n] = 0.54 - 0.46 * std::cos(2.0 * kPi * n / (length - 1));
    return w;
}

Lsp Lsp::uniform(int order) {
    Lsp out;
    out.w.resize(order);
    for (int i = 1; i <= order; i++)
        out.w[i - 1] = i * kPi / (order + 1);
    return out;
}

std::vector<double> autocorrelate(std::span<const double> frame,
                                  WindowKind window, int max_lag) {
    const int n = static_cast<int>(frame.size());
    if (n == 0)
        throw CodecError(Errc::invalid_input, "autocorrelate: empty frame");
    if (n < max_lag + 1)
        throw CodecError(Errc::invalid_input, "autocorrelate: frame shorter than max_lag+1");

    std::vector<double> x(frame.begin(), frame.end());
    if (window == WindowKind::hamming) {
        const std::vector<double> w = hamming_window(n);
        for (int i = 0; i < n; i++) x[i] *= w[i];
    }

    std::vector<double> acf(max_lag + 1, 0.0);
    for (int k = 0; k <= max_lag; k++) {
        double acc = 0.0;
        for (int i = k; i < n; i++) acc += x[i] * x[i - k];
        acf[k] = acc;
    }

    acf[0] *= kWhiteNoiseFix;
    for (int k = 1; k <= max_lag; k++) {
        const double f = 2.0 * kPi * kLagWindowHz * k / kBandRate;
        acf[k] *= std::exp(-0.5 * f * f);
    }
    return acf;
}

LevinsonResult levinson_durbin(std::span<const double> acf, int order) {
    if (static_cast<int>(acf.size()) < order + 1)
        throw CodecError(Errc::invalid_input, "levinson_durbin: acf too short");

    LevinsonResult r;
    r.lpc = Lpc::zeros(order);
    r.reflections.assign(order, 0.0);

    // Flat-silence convention: zero autocorrelation yields the zero
    // predictor with zero error.
    if (!(acf[0] > 0.0)) {
        r.prediction_error = 0.0;
        return r;
    }

    std::vector<double> a(order + 1, 0.0); // 1-based
    double err = acf[0];
    for (int m = 1; m <= order; m++) {
        double acc = acf[m];
        for (int i = 1; i < m; i++) acc += a[i] * acf[m - i];
        double k = err > 0.0 ? acc / err : 0.0;
        if (std::abs(k) >= 1.0) {
            k = k > 0.0 ? kReflectionClamp : -kReflectionClamp;
            r.degenerate = true;
        }
        r.reflections[m - 1] = k;
        a[m] = -k;
        const int half = (m - 1) / 2;
        for (int i = 1; i <= half; i++) {
            const double tmp = a[i] - k * a[m - i];
            a[m - i] -= k * a[i];
            a[i] = tmp;
        }
        if ((m - 1) % 2 == 1) {
            a[m / 2] -= k * a[m / 2];
        }
        err *= 1.0 - k * k;
    }
    for (int i = 1; i <= order; i++) r.lpc.a[i - 1] = a[i];
    r.prediction_error = err;
    return r;
}

namespace {

// Chebyshev-series coefficients of the symmetric/antisymmetric halves of
// P(z) = A(z) + z^-(p+1) A(1/z) and Q(z) = A(z) - z^-(p+1) A(1/z) after
// removing the trivial roots at z = -1 and z = +1.
void lsp_chebyshev_coeffs(const Lpc& lpc, std::vector<double>& f1,
                          std::vector<double>& f2) {
    const int p = lpc.order();
    const int m = p / 2;
    f1.assign(m + 1, 0.0);
    f2.assign(m + 1, 0.0);
    f1[0] = 1.0;
    f2[0] = 1.0;
    for (int i = 1; i <= m; i++) {
        f1[i] = (lpc.a[i - 1] + lpc.a[p - i]) - f1[i - 1];
        f2[i] = (lpc.a[i - 1] - lpc.a[p - i]) + f2[i - 1];
    }
}

double chebyshev_eval(const std::vector<double>& f, double x) {
    const int m = static_cast<int>(f.size()) - 1;
    // sum_{i=0}^{m-1} f[i] T_{m-i}(x) + f[m]/2
    double t_prev = 1.0; // T_0
    double t_cur = x;    // T_1
    double sum = f[m] / 2.0 + f[m - 1] * t_cur;
    for (int k = 2; k <= m; k++) {
        const double t_next = 2.0 * x * t_cur - t_prev;
        t_prev = t_cur;
        t_cur = t_next;
        sum += f[m - k] * t_cur;
    }
    return sum;
}

double bisect_root(const std::vector<double>& f, double lo, double hi,
                   double flo) {
    // sign change is guaranteed in [lo, hi]
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = chebyshev_eval(f, std::cos(mid));
        if ((flo <= 0.0) == (fmid <= 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

std::optional<Lsp> lpc_to_lsp(const Lpc& lpc) {
    const int p = lpc.order();
    const int m = p / 2;
    std::vector<double> f1, f2;
    lsp_chebyshev_coeffs(lpc, f1, f2);

    // 512-point uniform scan of (0, pi) with the interval ends added, then
    // bisection of every sign change.
    constexpr int kGrid = 512;
    std::vector<double> roots1, roots2;
    roots1.reserve(m);
    roots2.reserve(m);

    double w_prev = 0.0;
    double v1_prev = chebyshev_eval(f1, 1.0);
    double v2_prev = chebyshev_eval(f2, 1.0);
    for (int j = 0; j <= kGrid; j++) {
        const double w = j < kGrid ? (j + 0.5) * kPi / kGrid : kPi;
        const double x = std::cos(w);
        const double v1 = chebyshev_eval(f1, x);
        const double v2 = chebyshev_eval(f2, x);
        if ((v1_prev <= 0.0) != (v1 <= 0.0))
            roots1.push_back(bisect_root(f1, w_prev, w, v1_prev));
        if ((v2_prev <= 0.0) != (v2 <= 0.0))
            roots2.push_back(bisect_root(f2, w_prev, w, v2_prev));
        w_prev = w;
        v1_prev = v1;
        v2_prev = v2;
    }

    if (static_cast<int>(roots1.size()) != m ||
        static_cast<int>(roots2.size()) != m)
        return std::nullopt;

    Lsp lsp;
    lsp.w.resize(p);
    for (int i = 0; i < m; i++) {
        lsp.w[2 * i] = roots1[i];
        lsp.w[2 * i + 1] = roots2[i];
    }
    for (int i = 1; i < p; i++) {
        if (!(lsp.w[i] > lsp.w[i - 1])) return std::nullopt;
    }
    return lsp;
}

Lpc lsp_to_lpc(const Lsp& lsp) {
    const int p = lsp.order();
    const int m = p / 2;

    // Rebuild the symmetric halves from their unit-circle root pairs:
    // each root contributes a factor (1 - 2 cos(w) z^-1 + z^-2).
    std::vector<double> pp(p + 2, 0.0), qq(p + 2, 0.0);
    pp[0] = 1.0;
    qq[0] = 1.0;
    int pdeg = 0, qdeg = 0;
    for (int i = 0; i < m; i++) {
        const double cp = -2.0 * std::cos(lsp.w[2 * i]);
        const double cq = -2.0 * std::cos(lsp.w[2 * i + 1]);
        for (int j = pdeg; j >= 0; j--) {
            pp[j + 2] += pp[j];
            pp[j + 1] += cp * pp[j];
        }
        for (int j = qdeg; j >= 0; j--) {
            qq[j + 2] += qq[j];
            qq[j + 1] += cq * qq[j];
        }
        pdeg += 2;
        qdeg += 2;
    }
    // P(z) = (1 + z^-1) P'(z), Q(z) = (1 - z^-1) Q'(z), A = (P + Q) / 2.
    Lpc lpc = Lpc::zeros(p);
    for (int i = 1; i <= p; i++) {
        const double pi_ = pp[i] + pp[i - 1];
        const double qi_ = qq[i] - qq[i - 1];
        lpc.a[i - 1] = 0.5 * (pi_ + qi_);
    }
    return lpc;
}

Lpc bandwidth_expand(const Lpc& lpc, double gamma) {
    Lpc out = lpc;
    double g = gamma;
    for (int i = 0; i < out.order(); i++) {
        out.a[i] *= g;
        g *= gamma;
    }
    return out;
}

void filter_all_pole(std::span<const double> in, const Lpc& lpc,
                     FilterState& state, std::span<double> out) {
    const int p = lpc.order();
    if (static_cast<int>(state.mem.size()) != p)
        throw CodecError(Errc::invalid_input, "filter_all_pole: state order mismatch");
    double* mem = state.mem.data();
    for (size_t n = 0; n < in.size(); n++) {
        double acc = in[n];
        for (int i = 0; i < p; i++) acc -= lpc.a[i] * mem[i];
        for (int i = p - 1; i > 0; i--) mem[i] = mem[i - 1];
        if (p > 0) mem[0] = acc;
        out[n] = acc;
    }
    if (!all_finite(out))
        throw CodecError(Errc::numeric_overflow, "filter_all_pole: non-finite output");
}

void filter_all_zero(std::span<const double> in, const Lpc& lpc,
                     FilterState& state, std::span<double> out) {
    const int p = lpc.order();
    if (static_cast<int>(state.mem.size()) != p)
        throw CodecError(Errc::invalid_input, "filter_all_zero: state order mismatch");
    double* mem = state.mem.data();
    for (size_t n = 0; n < in.size(); n++) {
        const double x = in[n];
        double acc = x;
        for (int i = 0; i < p; i++) acc += lpc.a[i] * mem[i];
        for (int i = p - 1; i > 0; i--) mem[i] = mem[i - 1];
        if (p > 0) mem[0] = x;
        out[n] = acc;
    }
    if (!all_finite(out))
        throw CodecError(Errc::numeric_overflow, "filter_all_zero: non-finite output");
}

void perceptual_weight(std::span<const double> in, const Lpc& lpc,
                       const WeightingConfig& cfg, WeightingState& state,
                       std::span<double> out) {
    if (!(cfg.gamma2 > 0.0 && cfg.gamma2 <= cfg.gamma1 && cfg.gamma1 <= 1.0))
        throw CodecError(Errc::invalid_input, "perceptual_weight: bad gammas");
    const Lpc num = bandwidth_expand(lpc, cfg.gamma1);
    const Lpc den = bandwidth_expand(lpc, cfg.gamma2);
    filter_all_zero(in, num, state.zero, out);
    filter_all_pole(out, den, state.pole, out);
}

void dc_notch(std::span<const double> in, const NotchConfig& cfg,
              NotchState& state, std::span<double> out) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw CodecError(Errc::invalid_input, "dc_notch: alpha out of range");
    double mem = state.mem;
    for (size_t n = 0; n < in.size(); n++) {
        mem = cfg.alpha * mem + (1.0 - cfg.alpha) * in[n];
        out[n] = in[n] - mem;
    }
    state.mem = mem;
}

BiquadCoeffs make_highpass(double cutoff_hz, double rate) {
    if (!(cutoff_hz > 0.0 && cutoff_hz < rate / 2.0))
        throw CodecError(Errc::invalid_input, "make_highpass: bad cutoff");
    const double w0 = 2.0 * kPi * cutoff_hz / rate;
    const double cw = std::cos(w0);
    const double sw = std::sin(w0);
    const double q = 0.70710678118654752; // Butterworth
    const double alpha = sw / (2.0 * q);
    const double a0 = 1.0 + alpha;
    BiquadCoeffs c;
    c.b0 = (1.0 + cw) / 2.0 / a0;
    c.b1 = -(1.0 + cw) / a0;
    c.b2 = (1.0 + cw) / 2.0 / a0;
    c.a1 = -2.0 * cw / a0;
    c.a2 = (1.0 - alpha) / a0;
    return c;
}

void biquad(std::span<const double> in, const BiquadCoeffs& c,
            BiquadState& state, std::span<double> out) {
    double z1 = state.z1, z2 = state.z2;
    for (size_t n = 0; n < in.size(); n++) {
        const double x = in[n];
        const double y = c.b0 * x + z1;
        z1 = c.b1 * x - c.a1 * y + z2;
        z2 = c.b2 * x - c.a2 * y;
        out[n] = y;
    }
    state.z1 = z1;
    state.z2 = z2;
}

} // namespace mcelp
