#ifndef MCELP_BITSTREAM_HPP
#define MCELP_BITSTREAM_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mcelp/wideband.hpp"

namespace mcelp {

// MSB-first bit packing; the final partial byte is padded with zero bits.
class BitWriter {
public:
    void write(uint32_t value, int bits);
    // byte-aligns the cursor by zero-padding
    void align();
    std::vector<uint8_t> take();
    int bit_count() const { return bit_count_; }

private:
    std::vector<uint8_t> buf_;
    int bit_count_ = 0;
};

class BitReader {
public:
    explicit BitReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}
    // throws Errc::truncated_frame when reading past the end
    uint32_t read(int bits);
    int bits_consumed() const { return pos_; }

private:
    std::span<const uint8_t> bytes_;
    int pos_ = 0;
};

// Fixed-size frame serialization per ModeTable. Field order: LSP indices
// (low to high coefficient), global gain, then per subframe: pitch - 17,
// pitch gain, gain correction, innovation indices in sub-vector order.
// Wideband frames append a byte-aligned high-band section, so cutting the
// frame after nb_frame_bytes() leaves a valid narrowband frame.
std::vector<uint8_t> pack_frame(const FrameParams& params, const ModeTable& mode);
FrameParams unpack_frame(std::span<const uint8_t> bytes, const ModeTable& mode);

std::vector<uint8_t> pack_wb_frame(const WbFrameParams& params,
                                   const ModeTable& mode);
WbFrameParams unpack_wb_frame(std::span<const uint8_t> bytes,
                              const ModeTable& mode);

struct ContainerHeader {
    uint32_t sample_rate = 8000;
    ModeId mode = ModeId::nb_low;
    uint32_t frame_count = 0;

    bool operator==(const ContainerHeader&) const = default;
};

struct Container {
    ContainerHeader header;
    // one length-prefixed entry per frame; an empty entry marks a frame
    // lost in transport
    std::vector<std::vector<uint8_t>> frames;
};

void write_container(std::ostream& out, const ContainerHeader& header,
                     const std::vector<std::vector<uint8_t>>& frames);
Container read_container(std::istream& in);

void write_container_file(const std::string& path, const ContainerHeader& header,
                          const std::vector<std::vector<uint8_t>>& frames);
Container read_container_file(const std::string& path);

} // namespace mcelp

#endif
