#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace aipw {

// Stream purposes. Each (seed, purpose, index...) tuple keys an independent stream.
enum class Purpose : std::uint64_t {
    Covariates = 1,
    OutcomeNoise = 2,
    Response = 3,
    Split = 4,
    Oracle = 5,
    Replicate = 6,
    Mask = 7,
    Standin = 8,
};

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Fold a list of words into one 64-bit key.
[[nodiscard]] constexpr std::uint64_t derive_key(std::initializer_list<std::uint64_t> words) noexcept {
    std::uint64_t key = 0x6A09E667F3BCC908ULL;
    for (auto w : words) {
        key = splitmix64(key ^ splitmix64(w));
    }
    return key;
}

/// Counter-based generator: the k-th output is a bijective mix of key + k*gamma,
/// so any stream position is a pure function of (key, k). Satisfies
/// UniformRandomBitGenerator for use with <random> distributions.
class Stream {
public:
    using result_type = std::uint64_t;

    explicit Stream(std::uint64_t key) noexcept : key_(key) {}
    Stream(std::uint64_t seed, Purpose purpose, std::uint64_t index = 0) noexcept
        : key_(derive_key({seed, static_cast<std::uint64_t>(purpose), index})) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        return splitmix64(key_ + (counter_++) * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] std::uint64_t position() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace aipw
