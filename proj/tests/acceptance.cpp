// Acceptance suite: one line per criterion, nonzero exit when any fails.
// `acceptance --regen` rewrites the golden reference files instead of
// checking them.
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "mcelp/bitstream.hpp"
#include "mcelp/cli.hpp"
#include "mcelp/wav.hpp"
#include "mcelp/wideband.hpp"
#include "oracles.hpp"

using namespace mcelp;

namespace {

#ifndef MCELP_TEST_DATA_DIR
#define MCELP_TEST_DATA_DIR "tests/data"
#endif

const std::string kDataDir = MCELP_TEST_DATA_DIR;

struct TestRng {
    uint64_t s;
    explicit TestRng(uint64_t seed) : s(seed) {}
    double uniform() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return (s >> 11) * (1.0 / 9007199254740992.0);
    }
    double centered(double amp) { return amp * (2.0 * uniform() - 1.0); }
    int below(int n) { return static_cast<int>(uniform() * n) % n; }
};

int g_failures = 0;

void criterion(int number, const std::string& name,
               const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << number << " [" << name
              << "] (" << ms << " ms)";
    if (!detail.empty()) std::cout << " -- " << detail;
    std::cout << "\n";
    if (!ok) g_failures++;
}

// The criterion-5 signal: an impulse train through a fixed AR(10) shape,
// scaled to peak 12000.
std::vector<double> voiced_reference(int n, int period) {
    const Lpc ar{{-1.3435, 0.9025, -0.2958, 0.1773, 0.0725, -0.1066, 0.0202,
                  0.0457, -0.0375, 0.0155}};
    std::vector<double> x(n, 0.0), y(n);
    for (int i = 0; i < n; i += period) x[i] = 1.0;
    FilterState st(kNbLpcOrder);
    filter_all_pole(x, ar, st, y);
    double peak = 0.0;
    for (double v : y) peak = std::max(peak, std::abs(v));
    for (auto& v : y) v *= 12000.0 / peak;
    return y;
}

double seg_snr_db(std::span<const double> ref, std::span<const double> got,
                  int delay) {
    double sum = 0.0;
    int count = 0;
    for (size_t s = 0; s + 80 <= ref.size() && s + 80 + delay <= got.size();
         s += 80) {
        double se = 0.0, ne = 0.0;
        for (int i = 0; i < 80; i++) {
            const double r = ref[s + i];
            const double d = got[s + i + delay] - r;
            se += r * r;
            ne += d * d;
        }
        if (se / 80.0 < 1.0) continue; // silence excluded
        sum += 10.0 * std::log10(se / (ne + 1e-300));
        count++;
    }
    return count > 0 ? sum / count : -999.0;
}

std::vector<uint8_t> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CodecError(Errc::io_error, "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---- criteria ------------------------------------------------------------

bool c1_innovation_rates(std::string& detail) {
    const auto& lo = ModeTable::get(ModeId::nb_low);
    const auto& hi = ModeTable::get(ModeId::nb_high);
    const bool ok = lo.innovation_bits_per_subframe() == 10 &&
                    lo.innovation_bps() == 2000 &&
                    hi.innovation_bits_per_subframe() == 64 &&
                    hi.innovation_bps() == 12800;
    detail = "nb-low " + std::to_string(lo.innovation_bps()) + " bps, nb-high " +
             std::to_string(hi.innovation_bps()) + " bps";
    return ok;
}

bool c2_frame_geometry(std::string& detail) {
    bool ok = kFrameSize == 160 && kSubframeSize == 40 &&
              kSubframesPerFrame == 4 && kWbFrameSize == 320 &&
              NbEncoder::look_ahead() == 80;
    ok = ok && ModeTable::get(ModeId::nb_low).samples_per_frame() == 160 &&
         ModeTable::get(ModeId::wb_low).samples_per_frame() == 320;

    // the look-ahead is real: altering only the last 80 samples of frame k
    // changes frame k's parameters, while earlier frames are untouched
    auto sig = voiced_reference(4 * kFrameSize, 55);
    auto mod = sig;
    for (int i = 0; i < kLookAhead; i++)
        mod[2 * kFrameSize + kLookAhead + i] = (i % 2 ? 8000.0 : -8000.0);
    NbEncoder ea(ModeTable::get(ModeId::nb_high));
    NbEncoder eb(ModeTable::get(ModeId::nb_high));
    std::vector<FrameParams> pa, pb;
    for (int f = 0; f < 4; f++) {
        pa.push_back(ea.encode_frame(std::span(sig).subspan(f * kFrameSize, kFrameSize)));
        pb.push_back(eb.encode_frame(std::span(mod).subspan(f * kFrameSize, kFrameSize)));
    }
    ok = ok && pa[0] == pb[0] && pa[1] == pb[1] && !(pa[2] == pb[2]);
    detail = "frame 160/4x40, wb 320, look-ahead 80";
    return ok;
}

bool c3_overhead(std::string& detail) {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "mcelp_acceptance";
    fs::create_directories(dir);
    const std::string wav_path = (dir / "c3.wav").string();
    const std::string mclp_path = (dir / "c3.mclp").string();
    wav::write_pcm16_mono(wav_path, std::vector<int16_t>(8000, 0), 8000);
    cli::Options eo;
    eo.input = wav_path;
    eo.output = mclp_path;
    eo.mode = ModeId::nb_low;
    std::ostringstream err;
    if (cli::run_encode(eo, err) != cli::kExitOk) {
        detail = "encode failed";
        return false;
    }
    cli::Options io;
    io.input = mclp_path;
    std::ostringstream out;
    if (cli::run_info(io, out, err) != cli::kExitOk) {
        detail = "info failed";
        return false;
    }
    const std::string report = out.str();
    const bool ok = report.find("overhead_bps: 16000") != std::string::npos &&
                    report.find("payload_bps: 7600") != std::string::npos &&
                    report.find("voip_projection_bps: 23600") != std::string::npos;
    detail = "overhead 16000 bps at one 20 ms frame per packet";
    return ok;
}

bool c4_embedding(std::string& detail) {
    int checked = 0;
    for (ModeId mid : {ModeId::wb_low, ModeId::wb_high}) {
        const auto& mode = ModeTable::get(mid);
        const auto& nb_mode = ModeTable::get(
            mode.hb_innovation ? ModeId::nb_high : ModeId::nb_low);
        TestRng rng(0xE4B + static_cast<int>(mid));
        WbEncoder enc(mode);
        WbDecoder wb_dec(mode);
        NbDecoder nb_dec(nb_mode);
        std::vector<double> in(kWbFrameSize), wide(kWbFrameSize), narrow(kFrameSize);
        for (int f = 0; f < 50; f++) {
            for (auto& v : in) v = rng.centered(9000.0);
            const auto bytes = pack_wb_frame(enc.encode_frame(in), mode);
            // full wideband decode
            wb_dec.decode_frame(unpack_wb_frame(bytes, mode), wide);
            // truncated to the narrowband section, decoded standalone
            const auto cut = std::span(bytes).first(mode.nb_frame_bytes());
            nb_dec.decode_frame(unpack_frame(cut, nb_mode), narrow);
            for (int i = 0; i < kFrameSize; i++) {
                if (narrow[i] != wb_dec.last_low_band()[i]) {
                    detail = "mismatch in " + cli::mode_name(mid) + " frame " +
                             std::to_string(f) + " sample " + std::to_string(i);
                    return false;
                }
            }
            checked++;
        }
    }
    detail = std::to_string(checked) + " frames bit-identical after truncation";
    return checked == 100;
}

bool c5_round_trip_quality(std::string& detail) {
    const int n = 100 * kFrameSize; // 2 s
    const auto sig = voiced_reference(n, 57);
    double snr_high = 0.0, snr_low = 0.0;
    for (ModeId mid : {ModeId::nb_high, ModeId::nb_low}) {
        NbEncoder enc(ModeTable::get(mid));
        NbDecoder dec(ModeTable::get(mid));
        std::vector<double> out(n);
        for (int f = 0; f < 100; f++)
            dec.decode_frame(
                enc.encode_frame(std::span(sig).subspan(f * kFrameSize, kFrameSize)),
                std::span(out).subspan(f * kFrameSize, kFrameSize));
        const double snr = seg_snr_db(sig, out, NbEncoder::look_ahead());
        (mid == ModeId::nb_high ? snr_high : snr_low) = snr;
    }
    std::ostringstream d;
    d.precision(1);
    d << std::fixed << "segSNR nb-high " << snr_high << " dB (floor 6), nb-low "
      << snr_low << " dB (floor 0)";
    detail = d.str();
    return snr_high >= 6.0 && snr_low >= 0.0;
}

bool c6_search_optimality(std::string& detail) {
    TestRng rng(0xC6C6);
    const auto random_lpc = [&](double kmax) {
        std::vector<double> k(kNbLpcOrder);
        for (auto& v : k) v = rng.centered(kmax);
        std::vector<double> a(kNbLpcOrder + 1, 0.0), prev(kNbLpcOrder + 1, 0.0);
        for (int m = 1; m <= kNbLpcOrder; m++) {
            prev = a;
            a[m] = -k[m - 1];
            for (int i = 1; i < m; i++) a[i] = prev[i] - k[m - 1] * prev[m - i];
        }
        Lpc lpc = Lpc::zeros(kNbLpcOrder);
        for (int i = 1; i <= kNbLpcOrder; i++) lpc.a[i - 1] = a[i];
        return lpc;
    };
    const auto random_history = [&](double amp) {
        ExcitationHistory hist;
        std::array<double, kSubframeSize> block;
        for (int b = 0; b < kExcitationHistory / kSubframeSize + 1; b++) {
            for (auto& v : block) v = rng.centered(amp);
            hist.commit(block);
        }
        return hist;
    };

    for (int trial = 0; trial < 200; trial++) {
        const auto hist = random_history(50.0 + 200.0 * rng.uniform());
        const Lpc aq = random_lpc(0.7);
        const WeightedSynth ws = WeightedSynth::from_lpc(aq);
        std::array<double, kSubframeSize> target;
        for (auto& v : target) v = rng.centered(200.0);

        const AdaptiveResult got = adaptive_search(target, hist, ws);
        const auto [op, og] = oracles::adaptive(target, hist, aq);
        if (got.pitch != op || got.gain_index != og) {
            detail = "adaptive mismatch at trial " + std::to_string(trial);
            return false;
        }
    }
    for (int trial = 0; trial < 200; trial++) {
        const auto& cb = trial % 2 == 0
                             ? InnovationCodebook::for_mode(ModeTable::get(ModeId::nb_low))
                             : InnovationCodebook::high_rate();
        const Lpc aq = random_lpc(0.7);
        const WeightedSynth ws = WeightedSynth::from_lpc(aq);
        const double gain = 0.5 + 30.0 * rng.uniform();
        std::array<double, kSubframeSize> target;
        for (auto& v : target) v = rng.centered(60.0);

        const FixedResult got = fixed_search(target, cb, gain, ws);
        const auto want = oracles::fixed(target, cb, gain, aq);
        for (size_t i = 0; i < want.size(); i++) {
            if (got.indices[i] != want[i]) {
                detail = "fixed mismatch at trial " + std::to_string(trial);
                return false;
            }
        }
    }
    detail = "200 adaptive + 200 fixed instances match the oracles";
    return true;
}

bool c7_stability(std::string& detail) {
    TestRng rng(0xC7C7);
    const int kAnalysisRuns = 100000;
    for (int t = 0; t < kAnalysisRuns; t++) {
        std::vector<double> frame(kWindowSize);
        switch (t % 8) {
        case 0: // white noise, sweeping amplitude
            for (auto& v : frame) v = rng.centered(1.0 + (t % 1000) * 32.0);
            break;
        case 1: // DC, full scale
            std::fill(frame.begin(), frame.end(), t % 2 ? 32767.0 : -32768.0);
            break;
        case 2: // Nyquist square
            for (int i = 0; i < kWindowSize; i++)
                frame[i] = (i % 2 ? 32767.0 : -32768.0);
            break;
        case 3: // sparse impulses
            std::fill(frame.begin(), frame.end(), 0.0);
            for (int i = 0; i < 4; i++) frame[rng.below(kWindowSize)] = 32767.0;
            break;
        case 4: // full-scale square wave
            for (int i = 0; i < kWindowSize; i++)
                frame[i] = ((i / (1 + t % 40)) % 2 ? 32767.0 : -32768.0);
            break;
        case 5: // pure tone
            for (int i = 0; i < kWindowSize; i++)
                frame[i] = 32000.0 * std::sin(0.001 * (1 + t % 3000) * i);
            break;
        case 6: // silence with one tiny sample
            std::fill(frame.begin(), frame.end(), 0.0);
            frame[t % kWindowSize] = 1e-6;
            break;
        default: // smoothed noise
            frame[0] = rng.centered(20000.0);
            for (int i = 1; i < kWindowSize; i++)
                frame[i] = 0.95 * frame[i - 1] + rng.centered(2000.0);
            break;
        }
        const auto acf = autocorrelate(frame, WindowKind::hamming, kNbLpcOrder);
        const auto lev = levinson_durbin(acf, kNbLpcOrder);
        if (lev.degenerate) {
            detail = "levinson clamped at t=" + std::to_string(t);
            return false;
        }
        for (double k : lev.reflections)
            if (!(std::abs(k) < 1.0)) {
                detail = "|k| >= 1 at t=" + std::to_string(t);
                return false;
            }
        if (!lpc_to_lsp(lev.lpc)) {
            detail = "lsp conversion failed at t=" + std::to_string(t);
            return false;
        }
    }

    const int kDecodeRuns = 100000;
    for (ModeId mid : {ModeId::nb_low, ModeId::nb_high}) {
        const auto& mode = ModeTable::get(mid);
        NbDecoder dec(mode);
        std::vector<double> out(kFrameSize);
        for (int t = 0; t < kDecodeRuns / 2; t++) {
            FrameParams p;
            for (auto& v : p.lsp_indices) v = static_cast<uint8_t>(rng.below(16));
            p.global_gain_index = static_cast<uint8_t>(rng.below(32));
            for (auto& sub : p.sub) {
                sub.pitch = kMinPitch + rng.below(128);
                sub.pitch_gain_index = static_cast<uint8_t>(rng.below(32));
                sub.corr_index = static_cast<uint8_t>(rng.below(8));
                sub.innovation.resize(mode.subvectors_per_subframe());
                for (auto& k : sub.innovation)
                    k = static_cast<uint16_t>(rng.below(mode.innovation_entries()));
            }
            dec.decode_frame(p, out);
            for (double v : out)
                if (!std::isfinite(v)) {
                    detail = "non-finite decode at t=" + std::to_string(t);
                    return false;
                }
        }
    }
    detail = "100000 analysis frames + 100000 fuzzed decodes clean";
    return true;
}

bool c8_dc_notch(std::string& detail) {
    // transfer function alpha*(1 - z^-1)/(1 - alpha z^-1): numerator at
    // z = 1 vanishes identically
    const double alpha = 0.98;
    const double dc_gain = alpha * (1.0 - 1.0) / (1.0 - alpha);
    std::vector<double> in(2000, 1000.0), out(2000);
    NotchState st;
    dc_notch(in, {alpha}, st, out);
    std::ostringstream d;
    d.precision(3);
    d << std::fixed << "dc gain " << dc_gain << ", settled output |"
      << out.back() << "| < 10";
    detail = d.str();
    return dc_gain == 0.0 && std::abs(out.back()) < 10.0;
}

bool c9_qmf(std::string& detail) {
    TestRng rng(0xC9C9);
    const int n = 16000;
    std::vector<double> noise(n);
    for (auto& v : noise) v = rng.centered(8000.0);
    // band-limit to 0.45 of the rate with a long windowed-sinc FIR
    const int taps = 257, half = 128;
    std::vector<double> h(taps);
    double hsum = 0.0;
    for (int i = 0; i < taps; i++) {
        const double t = i - half;
        const double sinc =
            t == 0.0 ? 2.0 * 0.45
                     : std::sin(2.0 * 3.14159265358979323846 * 0.45 * t) /
                           (3.14159265358979323846 * t);
        h[i] = sinc * (0.54 - 0.46 * std::cos(2.0 * 3.14159265358979323846 * i /
                                              (taps - 1)));
        hsum += h[i];
    }
    for (auto& v : h) v /= hsum;
    std::vector<double> x(n, 0.0);
    for (int i = 0; i < n; i++)
        for (int k = 0; k < taps && k <= i; k++) x[i] += h[k] * noise[i - k];

    QmfBank bank;
    std::vector<double> y(n, 0.0), low(kFrameSize), high(kFrameSize);
    for (int f = 0; f + kWbFrameSize <= n; f += kWbFrameSize) {
        bank.analysis(std::span(x).subspan(f, kWbFrameSize), low, high);
        bank.synthesis(low, high, std::span(y).subspan(f, kWbFrameSize));
    }
    double sig = 0.0, err = 0.0;
    for (int i = 500; i + QmfBank::kDelay < n - 500; i++) {
        const double d = y[i + QmfBank::kDelay] - x[i];
        sig += x[i] * x[i];
        err += d * d;
    }
    const double snr = 10.0 * std::log10(sig / err);
    std::ostringstream d;
    d.precision(1);
    d << std::fixed << "reconstruction SNR " << snr << " dB (floor 40)";
    detail = d.str();
    return snr >= 40.0;
}

bool c10_loss_robustness(std::string& detail) {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "mcelp_acceptance";
    fs::create_directories(dir);

    const int frames = 100;
    const auto sig = voiced_reference(frames * kFrameSize, 57);
    std::vector<int16_t> pcm_in(sig.size());
    for (size_t i = 0; i < sig.size(); i++)
        pcm_in[i] = static_cast<int16_t>(
            std::clamp(std::round(sig[i]), -32768.0, 32767.0));
    wav::write_pcm16_mono((dir / "c10.wav").string(), pcm_in, 8000);

    cli::Options eo;
    eo.input = (dir / "c10.wav").string();
    eo.output = (dir / "c10.mclp").string();
    eo.mode = ModeId::nb_high;
    std::ostringstream err;
    if (cli::run_encode(eo, err) != cli::kExitOk) {
        detail = "encode failed";
        return false;
    }

    // 10% seeded loss, plus a forced 5-frame burst so the burst clause is
    // actually exercised
    Container c = read_container_file(eo.output);
    Xorshift64Star rng(20250808);
    std::vector<bool> lost(frames, false);
    for (int f = 0; f < frames; f++) {
        lost[f] = rng.next_unit() < 0.10;
        if (f >= 40 && f < 45) lost[f] = true;
        if (lost[f]) c.frames[f].clear();
    }
    write_container_file((dir / "c10_lossy.mclp").string(), c.header, c.frames);

    cli::Options doo;
    doo.input = (dir / "c10_lossy.mclp").string();
    doo.output = (dir / "c10_out.wav").string();
    if (cli::run_decode(doo, err) != cli::kExitOk) {
        detail = "decode reported an error";
        return false;
    }
    const auto out = wav::read_pcm16_mono(doo.output);
    if (out.samples.size() != static_cast<size_t>(frames) * kFrameSize) {
        detail = "decoded length mismatch";
        return false;
    }
    std::vector<double> frame_rms(frames, 0.0);
    for (int f = 0; f < frames; f++) {
        double acc = 0.0;
        for (int i = 0; i < kFrameSize; i++) {
            const int v = out.samples[f * kFrameSize + i];
            if (v < -32768 || v > 32767) {
                detail = "sample out of range in frame " + std::to_string(f);
                return false;
            }
            acc += static_cast<double>(v) * v;
        }
        frame_rms[f] = std::sqrt(acc / kFrameSize);
    }
    // within every lost burst the concealment energy may not grow
    int bursts = 0;
    for (int f = 1; f < frames; f++) {
        if (lost[f] && lost[f - 1]) {
            bursts++;
            if (frame_rms[f] > frame_rms[f - 1] + 1e-9) {
                detail = "rms grew inside the burst at frame " + std::to_string(f);
                return false;
            }
        }
    }
    detail = "decode clean, in range; " + std::to_string(bursts) +
             " burst transitions all non-increasing";
    return true;
}

void regen_golden() {
    namespace fs = std::filesystem;
    fs::create_directories(kDataDir);
    const auto sig = voiced_reference(8000, 61);
    std::vector<int16_t> pcm(sig.size());
    for (size_t i = 0; i < sig.size(); i++)
        pcm[i] = static_cast<int16_t>(
            std::clamp(std::round(sig[i]), -32768.0, 32767.0));
    wav::write_pcm16_mono(kDataDir + "/reference.wav", pcm, 8000);

    cli::Options eo;
    eo.input = kDataDir + "/reference.wav";
    eo.output = kDataDir + "/golden.mclp";
    eo.mode = ModeId::nb_high;
    std::ostringstream err;
    if (cli::run_encode(eo, err) != cli::kExitOk)
        throw std::runtime_error("golden encode failed");
    cli::Options doo;
    doo.input = kDataDir + "/golden.mclp";
    doo.output = kDataDir + "/golden_decoded.wav";
    if (cli::run_decode(doo, err) != cli::kExitOk)
        throw std::runtime_error("golden decode failed");
    std::cout << "regenerated golden files under " << kDataDir << "\n";
}

bool c11_golden(std::string& detail) {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "mcelp_acceptance";
    fs::create_directories(dir);

    cli::Options eo;
    eo.input = kDataDir + "/reference.wav";
    eo.output = (dir / "c11.mclp").string();
    eo.mode = ModeId::nb_high;
    std::ostringstream err;
    if (cli::run_encode(eo, err) != cli::kExitOk) {
        detail = "encode failed";
        return false;
    }
    if (slurp(eo.output) != slurp(kDataDir + "/golden.mclp")) {
        detail = "container bytes differ from golden.mclp";
        return false;
    }
    cli::Options doo;
    doo.input = kDataDir + "/golden.mclp";
    doo.output = (dir / "c11.wav").string();
    if (cli::run_decode(doo, err) != cli::kExitOk) {
        detail = "decode failed";
        return false;
    }
    if (slurp(doo.output) != slurp(kDataDir + "/golden_decoded.wav")) {
        detail = "decoded PCM differs from golden_decoded.wav";
        return false;
    }
    detail = "byte-exact container and PCM reproduction";
    return true;
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1 && std::strcmp(argv[1], "--regen") == 0) {
        regen_golden();
        return 0;
    }
    criterion(1, "innovation rates 2000/12800 bps", c1_innovation_rates);
    criterion(2, "frame geometry and 80-sample look-ahead", c2_frame_geometry);
    criterion(3, "RTP overhead arithmetic", c3_overhead);
    criterion(4, "embedded wideband truncation", c4_embedding);
    criterion(5, "round-trip segmental SNR", c5_round_trip_quality);
    criterion(6, "search optimality vs brute force", c6_search_optimality);
    criterion(7, "stability suite", c7_stability);
    criterion(8, "DC notch", c8_dc_notch);
    criterion(9, "QMF reconstruction", c9_qmf);
    criterion(10, "loss robustness", c10_loss_robustness);
    criterion(11, "determinism and golden vectors", c11_golden);

    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED"
                                  : std::to_string(g_failures) + " CRITERIA FAILED")
              << "\n";
    return g_failures;
}
