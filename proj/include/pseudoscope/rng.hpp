#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace pseudoscope {

namespace detail {
// One Philox4x32-10 block: 128-bit counter and 64-bit key to 128 random bits.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);
}  // namespace detail

// Counter-based generator (Philox4x32-10). The key is the seed and the upper
// half of the counter is the stream id, so the output sequence depends only
// on (seed, stream) and forking a stream is free.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    // Fresh generator on the same seed and another stream.
    SeededRng fork(std::uint64_t stream) const { return SeededRng(seed_, stream); }

    std::uint64_t next_u64();
    // Uniform on the open interval (0, 1).
    double next_uniform();
    // Standard complex normal: real and imaginary parts independent N(0, 1/2).
    std::complex<double> next_complex_normal();

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    unsigned used_ = 4;
};

}  // namespace pseudoscope
