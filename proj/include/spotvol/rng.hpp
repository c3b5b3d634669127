#pragma once

#include <array>
#include <cstdint>

namespace spotvol {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Output is a pure function of (key, counter), so every stream can be
/// positioned independently of how work is split across threads.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key);
};

/// Identifies the purpose of a random stream; combined with an index (asset,
/// factor, ...) it selects an independent substream of the seed.
enum class StreamKind : std::uint32_t {
    structure = 1,
    diffusion = 2,
    vol_of_vol = 3,
    correlation = 4,
    noise = 5,
    factor_diffusion = 6,
    factor_vol = 7,
    factor_noise = 8,
    beta = 9,
    asynchrony = 10,
    test = 99,
};

/// Sequential view over one Philox substream. Draws are deterministic in
/// (seed, kind, index) and the number of prior draws on the same stream.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, StreamKind kind, std::uint32_t index);

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller; draws come in cached pairs.
    double normal();
    /// Uniform integer in [lo, hi].
    std::int64_t integer(std::int64_t lo, std::int64_t hi);

private:
    std::uint32_t next_word();

    Philox4x32::Key key_;
    std::uint32_t stream_hi_;
    std::uint32_t stream_lo_;
    std::uint64_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int buffered_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// Derives a replication seed from a base seed and replication index (SplitMix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace spotvol
