#pragma once

#include <cstdint>
#include <vector>

namespace cbl {

// splitmix64 finalizer. Used both as the core generator and as the seed
// mixer so that every random stream is reproducible across platforms and
// standard libraries (std::uniform_int_distribution is not portable).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives the seed of an independent child stream (per stage, per row,
// per iteration). salt values are small ordinals documented at call sites.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    return mix64(base ^ (salt * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // uniform in [0, n), unbiased via rejection
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t reject = (0 - n) % n;  // 2^64 mod n
        std::uint64_t x = next();
        while (x < reject) x = next();
        return x % n;
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

    // uniform in [0, 1)
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace cbl
