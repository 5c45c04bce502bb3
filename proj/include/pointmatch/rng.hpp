#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace pointmatch {

// All randomness in a run flows from one root seed, split into named streams.
// Stream seeds are derived statelessly (hash of root + stream + keys), so a
// consumer never depends on how many draws another consumer made.
enum class Stream : std::uint64_t {
    SceneGen = 0x5ce9e001,
    WeakLabels = 0x3ea7ab02,
    AugmentA = 0xa6a1d703,
    AugmentB = 0xa6a1d704,
    Init = 0x1b171a05,
    Shuffle = 0x5f0ff106,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, Stream stream,
                                 std::uint64_t key_a = 0, std::uint64_t key_b = 0) {
    std::uint64_t h = splitmix64(root);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    h = splitmix64(h ^ key_a);
    h = splitmix64(h ^ key_b);
    return h;
}

// Deterministic RNG wrapper. Distributions are hand-rolled so results do not
// depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0, n)
    std::size_t below(std::size_t n) {
        if (n <= 1) return 0;
        const std::uint64_t m = static_cast<std::uint64_t>(n);
        const std::uint64_t bound = ~0ULL - (~0ULL % m + 1) % m;
        std::uint64_t x = gen_();
        while (x > bound) x = gen_();
        return static_cast<std::size_t>(x % m);
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        std::iota(p.begin(), p.end(), std::size_t{0});
        shuffle(p);
        return p;
    }

    // k distinct indices from [0, n), returned sorted ascending
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        k = std::min(k, n);
        std::vector<std::size_t> pool(n);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(pool[i], pool[i + below(n - i)]);
        }
        pool.resize(k);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline Rng stream_rng(std::uint64_t root, Stream stream,
                      std::uint64_t key_a = 0, std::uint64_t key_b = 0) {
    return Rng(derive_seed(root, stream, key_a, key_b));
}

}  // namespace pointmatch
