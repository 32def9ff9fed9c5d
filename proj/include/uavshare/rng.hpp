#pragma once

#include <cstdint>
#include <span>

#include "uavshare/bytes.hpp"

namespace uavshare {

// Deterministic byte stream: SHA-256(seed || domain || counter) blocks.
// Every random draw in a simulated run comes from one of these so that a run
// is a pure function of its seed.
class Drbg {
public:
    explicit Drbg(std::uint64_t seed, std::string_view domain = "uavshare");

    // Seeded from the operating system.
    static Drbg from_os();

    void fill(std::span<std::uint8_t> out);
    Bytes bytes(std::size_t n);
    std::uint64_t next_u64();
    // Uniform in [0, bound).
    std::uint64_t uniform(std::uint64_t bound);
    // Independent child stream.
    Drbg fork(std::string_view label);

private:
    void refill();

    Digest key_{};
    std::uint64_t counter_ = 0;
    Digest block_{};
    std::size_t used_ = sizeof(Digest);
};

}  // namespace uavshare
