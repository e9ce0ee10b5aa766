#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace esb {

/// Seedable 64-bit generator used by every randomized component.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Distributions are implemented here rather than taken from
/// <random> because the standard distributions are implementation-defined
/// and would make instances differ between standard libraries.
///
/// Stream splitting: `Rng(seed, stream)` seeds the engine with
/// splitmix64(seed ^ splitmix64(stream + 1)). Components draw from
/// distinct stream ids so that adding draws in one place never shifts the
/// sequence seen by another.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, bound). `bound` must be positive.
    std::uint64_t below(std::uint64_t bound);

    bool coin() { return (engine_() >> 63) != 0; }

    /// Standard normal via Box-Muller.
    double normal();

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Stream ids reserved by the library.
namespace streams {
inline constexpr std::uint64_t kGenerator = 1;
inline constexpr std::uint64_t kProbes = 2;
inline constexpr std::uint64_t kLocalSearch = 3;
inline constexpr std::uint64_t kHeuristic = 4;
}  // namespace streams

}  // namespace esb
