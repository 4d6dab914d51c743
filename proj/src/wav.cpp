#include "mcelp/wav.hpp"

#include <cstring>
#include <fstream>

namespace mcelp::wav {

namespace {

uint32_t rd_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t rd_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::ofstream& out, uint32_t v) {
    const uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                          static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void wr_u16(std::ofstream& out, uint16_t v) {
    const uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

} // namespace

WavData read_pcm16_mono(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CodecError(Errc::io_error, "cannot open: " + path);
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
        std::memcmp(data.data() + 8, "WAVE", 4) != 0)
        throw CodecError(Errc::unsupported_input, path + ": not a RIFF/WAVE file");

    WavData out;
    bool have_fmt = false;
    size_t pos = 12;
    while (pos + 8 <= data.size()) {
        const char* id = reinterpret_cast<const char*>(data.data() + pos);
        const uint32_t len = rd_u32(data.data() + pos + 4);
        const size_t body = pos + 8;
        if (body + len > data.size())
            throw CodecError(Errc::unsupported_input, path + ": truncated chunk");
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (len < 16)
                throw CodecError(Errc::unsupported_input, path + ": short fmt chunk");
            const uint16_t format = rd_u16(data.data() + body);
            const uint16_t channels = rd_u16(data.data() + body + 2);
            const uint32_t rate = rd_u32(data.data() + body + 4);
            const uint16_t bits = rd_u16(data.data() + body + 14);
            if (format != 1)
                throw CodecError(Errc::unsupported_input,
                                 path + ": only PCM wav is supported");
            if (channels != 1)
                throw CodecError(Errc::unsupported_input,
                                 path + ": only mono wav is supported");
            if (bits != 16)
                throw CodecError(Errc::unsupported_input,
                                 path + ": only 16-bit wav is supported");
            out.sample_rate = rate;
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            if (!have_fmt)
                throw CodecError(Errc::unsupported_input,
                                 path + ": data chunk before fmt");
            out.samples.resize(len / 2);
            for (size_t i = 0; i < out.samples.size(); i++)
                out.samples[i] = static_cast<int16_t>(rd_u16(data.data() + body + 2 * i));
            return out;
        }
        pos = body + len + (len & 1); // chunks are word-aligned
    }
    throw CodecError(Errc::unsupported_input, path + ": no data chunk found");
}

void write_pcm16_mono(const std::string& path, std::span<const int16_t> samples,
                      uint32_t sample_rate) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CodecError(Errc::io_error, "cannot open for writing: " + path);
    const uint32_t data_len = static_cast<uint32_t>(samples.size() * 2);
    out.write("RIFF", 4);
    wr_u32(out, 36 + data_len);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    wr_u32(out, 16);
    wr_u16(out, 1); // PCM
    wr_u16(out, 1); // mono
    wr_u32(out, sample_rate);
    wr_u32(out, sample_rate * 2); // byte rate
    wr_u16(out, 2);               // block align
    wr_u16(out, 16);              // bits per sample
    out.write("data", 4);
    wr_u32(out, data_len);
    for (int16_t s : samples) {
        const uint8_t b[2] = {static_cast<uint8_t>(s & 0xFF),
                              static_cast<uint8_t>((s >> 8) & 0xFF)};
        out.write(reinterpret_cast<const char*>(b), 2);
    }
    if (!out) throw CodecError(Errc::io_error, "write failed: " + path);
}

} // namespace mcelp::wav
