#include "uavshare/rng.hpp"

#include <openssl/rand.h>

#include <stdexcept>

#include "uavshare/crypto.hpp"

namespace uavshare {

Drbg::Drbg(std::uint64_t seed, std::string_view domain) {
    Bytes material;
    put_u64(material, seed);
    append(material, to_bytes(domain));
    key_ = sha256(material);
}

Drbg Drbg::from_os() {
    std::uint64_t seed = 0;
    if (RAND_bytes(reinterpret_cast<unsigned char*>(&seed), sizeof seed) != 1)
        throw std::runtime_error("RAND_bytes failed");
    return Drbg(seed);
}

void Drbg::refill() {
    Bytes material(key_.begin(), key_.end());
    put_u64(material, counter_++);
    block_ = sha256(material);
    used_ = 0;
}

void Drbg::fill(std::span<std::uint8_t> out) {
    for (auto& b : out) {
        if (used_ == block_.size()) refill();
        b = block_[used_++];
    }
}

Bytes Drbg::bytes(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
}

std::uint64_t Drbg::next_u64() {
    std::array<std::uint8_t, 8> b{};
    fill(b);
    return get_u64(b, 0);
}

std::uint64_t Drbg::uniform(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform bound must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % bound;
}

Drbg Drbg::fork(std::string_view label) {
    Drbg child(next_u64(), label);
    return child;
}

}  // namespace uavshare
