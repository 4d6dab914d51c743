#include "mcelp/bitstream.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace mcelp {

void BitWriter::write(uint32_t value, int bits) {
    for (int b = bits - 1; b >= 0; b--) {
        if (bit_count_ % 8 == 0) buf_.push_back(0);
        const uint8_t bit = (value >> b) & 1u;
        buf_.back() |= bit << (7 - bit_count_ % 8);
        bit_count_++;
    }
}

void BitWriter::align() {
    while (bit_count_ % 8 != 0) write(0, 1);
}

std::vector<uint8_t> BitWriter::take() {
    bit_count_ = 0;
    std::vector<uint8_t> out;
    out.swap(buf_);
    return out;
}

uint32_t BitReader::read(int bits) {
    if (pos_ + bits > static_cast<int>(bytes_.size()) * 8)
        throw CodecError(Errc::truncated_frame, "bitstream: read past end");
    uint32_t v = 0;
    for (int b = 0; b < bits; b++) {
        const uint8_t byte = bytes_[pos_ / 8];
        v = (v << 1) | ((byte >> (7 - pos_ % 8)) & 1u);
        pos_++;
    }
    return v;
}

std::vector<uint8_t> pack_frame(const FrameParams& params, const ModeTable& mode) {
    validate_frame_params(params, mode);
    BitWriter w;
    for (uint8_t idx : params.lsp_indices) w.write(idx, 4);
    w.write(params.global_gain_index, 5);
    for (const auto& sub : params.sub) {
        w.write(static_cast<uint32_t>(sub.pitch - kMinPitch), ModeTable::kPitchBits);
        w.write(sub.pitch_gain_index, ModeTable::kPitchGainBits);
        w.write(sub.corr_index, ModeTable::kCorrBits);
        for (uint16_t k : sub.innovation) w.write(k, mode.codebook_bits);
    }
    w.align();
    return w.take();
}

FrameParams unpack_frame(std::span<const uint8_t> bytes, const ModeTable& mode) {
    if (static_cast<int>(bytes.size()) < mode.nb_frame_bytes())
        throw CodecError(Errc::truncated_frame, "unpack_frame: short buffer");
    BitReader r(bytes);
    FrameParams params;
    for (auto& idx : params.lsp_indices)
        idx = static_cast<uint8_t>(r.read(4));
    params.global_gain_index = static_cast<uint8_t>(r.read(5));
    for (auto& sub : params.sub) {
        sub.pitch = kMinPitch + static_cast<int>(r.read(ModeTable::kPitchBits));
        sub.pitch_gain_index = static_cast<uint8_t>(r.read(ModeTable::kPitchGainBits));
        sub.corr_index = static_cast<uint8_t>(r.read(ModeTable::kCorrBits));
        sub.innovation.resize(mode.subvectors_per_subframe());
        for (auto& k : sub.innovation)
            k = static_cast<uint16_t>(r.read(mode.codebook_bits));
    }
    return params;
}

std::vector<uint8_t> pack_wb_frame(const WbFrameParams& params,
                                   const ModeTable& mode) {
    if (!mode.wideband)
        throw CodecError(Errc::invalid_input, "pack_wb_frame: wideband modes only");
    validate_wb_params(params, mode);
    std::vector<uint8_t> out = pack_frame(params.nb, mode);

    BitWriter w;
    for (uint8_t idx : params.hb_lsp_indices) w.write(idx, 4);
    w.write(params.hb_global_gain_index, 5);
    for (uint8_t c : params.hb_corr_indices) w.write(c, ModeTable::kCorrBits);
    if (mode.hb_innovation)
        for (const auto& sub : params.hb_innovation)
            for (uint16_t k : sub) w.write(k, 8);
    w.align();
    const auto hb = w.take();
    out.insert(out.end(), hb.begin(), hb.end());
    return out;
}

WbFrameParams unpack_wb_frame(std::span<const uint8_t> bytes,
                              const ModeTable& mode) {
    if (!mode.wideband)
        throw CodecError(Errc::invalid_input, "unpack_wb_frame: wideband modes only");
    if (static_cast<int>(bytes.size()) < mode.total_frame_bytes())
        throw CodecError(Errc::truncated_frame, "unpack_wb_frame: short buffer");
    WbFrameParams params;
    params.nb = unpack_frame(bytes.first(mode.nb_frame_bytes()), mode);

    BitReader r(bytes.subspan(mode.nb_frame_bytes()));
    for (auto& idx : params.hb_lsp_indices)
        idx = static_cast<uint8_t>(r.read(4));
    params.hb_global_gain_index = static_cast<uint8_t>(r.read(5));
    for (auto& c : params.hb_corr_indices)
        c = static_cast<uint8_t>(r.read(ModeTable::kCorrBits));
    if (mode.hb_innovation)
        for (auto& sub : params.hb_innovation) {
            sub.resize(kSubframeSize / 5);
            for (auto& k : sub) k = static_cast<uint16_t>(r.read(8));
        }
    return params;
}

namespace {

constexpr char kMagic[4] = {'M', 'C', 'L', 'P'};
constexpr uint8_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
    const uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                          static_cast<uint8_t>(v >> 16),
                          static_cast<uint8_t>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u16(std::ostream& out, uint16_t v) {
    const uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

uint32_t get_u32(std::istream& in) {
    uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) |
           (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t get_u16(std::istream& in) {
    uint8_t b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

} // namespace

void write_container(std::ostream& out, const ContainerHeader& header,
                     const std::vector<std::vector<uint8_t>>& frames) {
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));
    put_u32(out, header.sample_rate);
    out.put(static_cast<char>(header.mode));
    put_u32(out, static_cast<uint32_t>(frames.size()));
    for (const auto& f : frames) {
        put_u16(out, static_cast<uint16_t>(f.size()));
        out.write(reinterpret_cast<const char*>(f.data()),
                  static_cast<std::streamsize>(f.size()));
    }
    if (!out)
        throw CodecError(Errc::io_error, "write_container: stream failure");
}

Container read_container(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != std::string_view(kMagic, 4))
        throw CodecError(Errc::not_a_container, "read_container: bad magic");
    const int version = in.get();
    if (version != kVersion)
        throw CodecError(Errc::not_a_container, "read_container: unknown version");

    Container c;
    c.header.sample_rate = get_u32(in);
    const int mode_byte = in.get();
    if (!in || mode_byte < 0 || mode_byte > 3)
        throw CodecError(Errc::not_a_container, "read_container: bad mode id");
    c.header.mode = static_cast<ModeId>(mode_byte);
    c.header.frame_count = get_u32(in);
    if (!in)
        throw CodecError(Errc::not_a_container, "read_container: short header");

    c.frames.reserve(c.header.frame_count);
    for (uint32_t i = 0; i < c.header.frame_count; i++) {
        const uint16_t len = get_u16(in);
        std::vector<uint8_t> frame(len);
        in.read(reinterpret_cast<char*>(frame.data()), len);
        if (!in)
            throw CodecError(Errc::io_error,
                             "read_container: truncated at frame " + std::to_string(i));
        c.frames.push_back(std::move(frame));
    }
    return c;
}

void write_container_file(const std::string& path, const ContainerHeader& header,
                          const std::vector<std::vector<uint8_t>>& frames) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw CodecError(Errc::io_error, "cannot open for writing: " + path);
    write_container(out, header, frames);
}

Container read_container_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw CodecError(Errc::io_error, "cannot open: " + path);
    return read_container(in);
}

} // namespace mcelp
