#include "uavshare/bytes.hpp"

#include "uavshare/errors.hpp"

namespace uavshare {

namespace {

void put_varint(Bytes& out, std::uint64_t v) {
    while (v >= 0x80) {
        out.push_back(static_cast<std::uint8_t>(v | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(v));
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

std::string to_string(ByteView b) { return std::string(b.begin(), b.end()); }

std::string to_hex(ByteView b) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(b.size() * 2);
    for (auto c : b) {
        s.push_back(digits[c >> 4]);
        s.push_back(digits[c & 0xf]);
    }
    return s;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw ProtocolError(Error::ParseError, "odd-length hex");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_value(hex[i]);
        int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) throw ProtocolError(Error::ParseError, "bad hex digit");
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

void append(Bytes& out, ByteView tail) { out.insert(out.end(), tail.begin(), tail.end()); }

void put_u16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64(Bytes& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint16_t get_u16(ByteView in, std::size_t at) {
    if (at + 2 > in.size()) throw ProtocolError(Error::Malformed, "truncated u16");
    return static_cast<std::uint16_t>(in[at] << 8 | in[at + 1]);
}

std::uint64_t get_u64(ByteView in, std::size_t at) {
    if (at + 8 > in.size()) throw ProtocolError(Error::Malformed, "truncated u64");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) v = v << 8 | in[at + i];
    return v;
}

FrameWriter::FrameWriter(std::uint8_t tag) { out_.push_back(tag); }

FrameWriter& FrameWriter::field(ByteView value) {
    put_varint(out_, value.size());
    append(out_, value);
    return *this;
}

FrameWriter& FrameWriter::field(std::string_view value) {
    return field(ByteView(reinterpret_cast<const std::uint8_t*>(value.data()), value.size()));
}

FrameWriter& FrameWriter::u64(std::uint64_t value) {
    Bytes b;
    put_u64(b, value);
    return field(b);
}

FrameReader::FrameReader(ByteView frame) : in_(frame) {
    if (in_.empty()) throw ProtocolError(Error::Malformed, "empty frame");
    tag_ = in_[0];
    pos_ = 1;
}

ByteView FrameReader::field() {
    std::uint64_t len = 0;
    int shift = 0;
    while (true) {
        if (pos_ >= in_.size() || shift > 56) throw ProtocolError(Error::Malformed, "bad length prefix");
        auto byte = in_[pos_++];
        len |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
        if (!(byte & 0x80)) break;
        shift += 7;
    }
    if (len > in_.size() - pos_) throw ProtocolError(Error::Malformed, "field overruns frame");
    auto v = in_.subspan(pos_, len);
    pos_ += len;
    return v;
}

std::string FrameReader::text() { return to_string(field()); }

std::uint64_t FrameReader::u64() {
    auto v = field();
    check_size(v, 8);
    return get_u64(v, 0);
}

void FrameReader::finish() const {
    if (pos_ != in_.size()) throw ProtocolError(Error::Malformed, "trailing bytes");
}

void FrameReader::check_size(ByteView v, std::size_t n) {
    if (v.size() != n) throw ProtocolError(Error::Malformed, "fixed-size field has wrong length");
}

}  // namespace uavshare
