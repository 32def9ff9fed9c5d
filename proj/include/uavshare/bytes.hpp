#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uavshare {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

Bytes to_bytes(std::string_view s);
std::string to_string(ByteView b);
std::string to_hex(ByteView b);
Bytes from_hex(std::string_view hex);

void append(Bytes& out, ByteView tail);

// Frames a message as: tag byte, then each field as a LEB128 varint length
// followed by the field bytes.
class FrameWriter {
public:
    explicit FrameWriter(std::uint8_t tag);

    FrameWriter& field(ByteView value);
    FrameWriter& field(std::string_view value);
    FrameWriter& u64(std::uint64_t value);  // 8 bytes big-endian

    const Bytes& bytes() const& { return out_; }
    Bytes bytes() && { return std::move(out_); }

private:
    Bytes out_;
};

// Throws ProtocolError(Malformed) on truncation or trailing garbage.
class FrameReader {
public:
    explicit FrameReader(ByteView frame);

    std::uint8_t tag() const { return tag_; }
    ByteView field();
    std::string text();
    std::uint64_t u64();
    template <std::size_t N>
    std::array<std::uint8_t, N> fixed() {
        auto v = field();
        check_size(v, N);
        std::array<std::uint8_t, N> a{};
        std::copy(v.begin(), v.end(), a.begin());
        return a;
    }
    // Bytes consumed so far, including the tag.
    std::size_t offset() const { return pos_; }
    void finish() const;

private:
    static void check_size(ByteView v, std::size_t n);

    ByteView in_;
    std::size_t pos_ = 0;
    std::uint8_t tag_ = 0;
};

void put_u16(Bytes& out, std::uint16_t v);
void put_u64(Bytes& out, std::uint64_t v);
std::uint16_t get_u16(ByteView in, std::size_t at);
std::uint64_t get_u64(ByteView in, std::size_t at);

}  // namespace uavshare
