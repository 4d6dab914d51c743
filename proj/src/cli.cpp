#include "mcelp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mcelp/bitstream.hpp"
#include "mcelp/dsp.hpp"
#include "mcelp/nb_codec.hpp"
#include "mcelp/wav.hpp"
#include "mcelp/wideband.hpp"

namespace mcelp::cli {

namespace {

int exit_code_for(const CodecError& e) {
    switch (e.code()) {
    case Errc::unsupported_input:
        return kExitInputFormat;
    case Errc::invalid_input:
        return kExitUsage;
    default:
        return kExitIo;
    }
}

int16_t to_pcm16(double v) {
    const double r = std::round(v);
    return static_cast<int16_t>(std::clamp(r, -32768.0, 32767.0));
}

} // namespace

std::string mode_name(ModeId mode) {
    switch (mode) {
    case ModeId::nb_low:
        return "nb-low";
    case ModeId::nb_high:
        return "nb-high";
    case ModeId::wb_low:
        return "wb-low";
    case ModeId::wb_high:
        return "wb-high";
    }
    return "?";
}

std::optional<ModeId> parse_mode(const std::string& name) {
    for (ModeId m : {ModeId::nb_low, ModeId::nb_high, ModeId::wb_low, ModeId::wb_high})
        if (mode_name(m) == name) return m;
    return std::nullopt;
}

int run_encode(const Options& opts, std::ostream& err) {
    try {
        const ModeTable& mode = ModeTable::get(opts.mode);
        if (opts.rate != 0 && opts.rate != mode.sample_rate()) {
            err << "error: --rate " << opts.rate << " does not match mode "
                << mode_name(opts.mode) << " (" << mode.sample_rate() << " Hz)\n";
            return kExitUsage;
        }
        const wav::WavData in = wav::read_pcm16_mono(opts.input);
        if (static_cast<int>(in.sample_rate) != mode.sample_rate()) {
            err << "error: " << opts.input << " is " << in.sample_rate
                << " Hz but mode " << mode_name(opts.mode) << " needs "
                << mode.sample_rate() << " Hz\n";
            return kExitInputFormat;
        }

        int peak = 0;
        for (int16_t s : in.samples)
            peak = std::max(peak, std::abs(static_cast<int>(s)));
        if (peak != 0 && (peak < 5000 || peak > 20000))
            err << "warning: input peak " << peak
                << " outside the recommended 5000..20000 range\n";

        std::vector<double> x(in.samples.begin(), in.samples.end());
        if (opts.notch) {
            NotchState st;
            dc_notch(x, NotchConfig{}, st, x);
        }
        if (opts.highpass) {
            BiquadState st;
            highpass(x, mode.wideband ? 50.0 : 300.0, mode.sample_rate(), st, x);
        }
        const int fsize = mode.samples_per_frame();
        const int frames =
            static_cast<int>((x.size() + fsize - 1) / fsize);
        x.resize(static_cast<size_t>(std::max(frames, 0)) * fsize, 0.0);

        std::vector<std::vector<uint8_t>> payload;
        payload.reserve(frames);
        if (mode.wideband) {
            WbEncoder enc(mode);
            for (int f = 0; f < frames; f++)
                payload.push_back(pack_wb_frame(
                    enc.encode_frame(std::span(x).subspan(f * fsize, fsize)), mode));
        } else {
            NbEncoder enc(mode);
            for (int f = 0; f < frames; f++)
                payload.push_back(pack_frame(
                    enc.encode_frame(std::span(x).subspan(f * fsize, fsize)), mode));
        }

        ContainerHeader header;
        header.sample_rate = static_cast<uint32_t>(mode.sample_rate());
        header.mode = opts.mode;
        header.frame_count = static_cast<uint32_t>(frames);
        write_container_file(opts.output, header, payload);

        size_t bytes = 0;
        for (const auto& f : payload) bytes += f.size();
        const long bps = frames > 0
                             ? std::lround(static_cast<double>(bytes) * 8.0 /
                                           (frames * 0.02))
                             : 0;
        err << "encoded " << frames << " frames, " << bytes << " payload bytes, "
            << bps << " bps (" << mode_name(opts.mode) << ")\n";
        return kExitOk;
    } catch (const CodecError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

int run_decode(const Options& opts, std::ostream& err) {
    try {
        const Container c = read_container_file(opts.input);
        const ModeTable& mode = ModeTable::get(c.header.mode);
        if (static_cast<int>(c.header.sample_rate) != mode.sample_rate())
            throw CodecError(Errc::io_error, "container rate does not match mode");

        std::vector<int16_t> pcm;
        if (!mode.wideband) {
            NbDecoder dec(mode);
            std::vector<double> out(kFrameSize);
            for (size_t f = 0; f < c.frames.size(); f++) {
                const auto& frame = c.frames[f];
                if (frame.empty()) {
                    dec.conceal_frame(out);
                } else if (static_cast<int>(frame.size()) == mode.nb_frame_bytes()) {
                    dec.decode_frame(unpack_frame(frame, mode), out);
                } else {
                    throw CodecError(Errc::io_error,
                                     "bad frame length at frame " + std::to_string(f));
                }
                for (double v : out) pcm.push_back(to_pcm16(v));
            }
            wav::write_pcm16_mono(opts.output, pcm, c.header.sample_rate);
            return kExitOk;
        }

        // Wideband. A container whose frames were all cut back to their
        // narrowband section decodes as a narrowband stream at 8 kHz.
        bool any_full = false, any_nb = false;
        for (size_t f = 0; f < c.frames.size(); f++) {
            const int len = static_cast<int>(c.frames[f].size());
            if (len == 0) continue;
            if (len == mode.total_frame_bytes())
                any_full = true;
            else if (len == mode.nb_frame_bytes())
                any_nb = true;
            else
                throw CodecError(Errc::io_error,
                                 "bad frame length at frame " + std::to_string(f));
        }
        if (any_nb && !any_full) {
            const ModeTable& nb_mode = ModeTable::get(
                mode.hb_innovation ? ModeId::nb_high : ModeId::nb_low);
            NbDecoder dec(nb_mode);
            std::vector<double> out(kFrameSize);
            for (const auto& frame : c.frames) {
                if (frame.empty())
                    dec.conceal_frame(out);
                else
                    dec.decode_frame(unpack_frame(frame, nb_mode), out);
                for (double v : out) pcm.push_back(to_pcm16(v));
            }
            wav::write_pcm16_mono(opts.output, pcm, 8000);
            return kExitOk;
        }

        WbDecoder dec(mode);
        std::vector<double> out(kWbFrameSize);
        for (const auto& frame : c.frames) {
            if (frame.empty())
                dec.conceal_frame(out);
            else if (static_cast<int>(frame.size()) == mode.nb_frame_bytes())
                dec.decode_frame_nb_only(unpack_frame(frame, mode), out);
            else
                dec.decode_frame(unpack_wb_frame(frame, mode), out);
            for (double v : out) pcm.push_back(to_pcm16(v));
        }
        wav::write_pcm16_mono(opts.output, pcm, c.header.sample_rate);
        return kExitOk;
    } catch (const CodecError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

int run_simulate_loss(const Options& opts, std::ostream& out, std::ostream& err) {
    try {
        if (!(opts.loss_rate >= 0.0 && opts.loss_rate <= 1.0)) {
            err << "error: --loss-rate must be in [0, 1]\n";
            return kExitUsage;
        }
        Container c = read_container_file(opts.input);
        Xorshift64Star rng(opts.seed);
        std::vector<size_t> lost;
        for (size_t f = 0; f < c.frames.size(); f++) {
            // one variate per frame, lost or not, so runs compose
            const bool drop = rng.next_unit() < opts.loss_rate;
            if (drop && !c.frames[f].empty()) {
                c.frames[f].clear();
                lost.push_back(f);
            }
        }
        write_container_file(opts.output, c.header, c.frames);

        out << "frames: " << c.frames.size() << "\n";
        out << "lost: " << lost.size() << "\n";
        out << "realized_loss_rate: "
            << (c.frames.empty() ? 0.0
                                 : static_cast<double>(lost.size()) / c.frames.size())
            << "\n";
        out << "lost_indices:";
        for (size_t i : lost) out << " " << i;
        out << "\n";
        return kExitOk;
    } catch (const CodecError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

int run_info(const Options& opts, std::ostream& out, std::ostream& err) {
    try {
        const Container c = read_container_file(opts.input);
        size_t bytes = 0;
        for (const auto& f : c.frames) bytes += f.size();
        const long payload_bps =
            c.frames.empty()
                ? 0
                : std::lround(static_cast<double>(bytes) * 8.0 /
                              (c.frames.size() * 0.02));
        // one 20 ms frame per packet over IP/UDP/RTP: 40 bytes of headers
        const long overhead_bps = std::lround(40.0 * 8.0 / 0.02);

        out << "sample_rate: " << c.header.sample_rate << "\n";
        out << "mode: " << mode_name(c.header.mode) << "\n";
        out << "frames: " << c.frames.size() << "\n";
        out << "duration_s: " << c.frames.size() * 0.02 << "\n";
        out << "payload_bytes: " << bytes << "\n";
        out << "payload_bps: " << payload_bps << "\n";
        out << "overhead_bps: " << overhead_bps << "\n";
        out << "voip_projection_bps: " << payload_bps + overhead_bps << "\n";
        return kExitOk;
    } catch (const CodecError& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

} // namespace mcelp::cli
