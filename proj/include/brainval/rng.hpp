#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace brainval {

/// Purpose tags for child RNG streams. Each tag yields an independent stream
/// from the same root seed, so e.g. brain and task draws never share state.
enum class Stream : std::uint64_t {
    model_frame = 1,
    model_offspace = 2,
    brain = 3,
    task = 4,
    test = 5,
    bootstrap = 6,
    candidates = 7,
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Derives the seed of child stream (tag, index) from a root seed.
///
/// The mapping is a fixed composition of splitmix64 rounds, so the child seed
/// only depends on (root, tag, index) and never on scheduling order.
constexpr std::uint64_t derive_seed(std::uint64_t root, Stream tag, std::uint64_t index = 0) noexcept {
    std::uint64_t h = detail::splitmix64(root);
    h = detail::splitmix64(h ^ static_cast<std::uint64_t>(tag));
    h = detail::splitmix64(h ^ (index * 0xd1b54a32d192ed03ULL));
    return h;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t root, Stream tag, std::uint64_t index = 0) {
    return Engine{derive_seed(root, tag, index)};
}

inline Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, Engine& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd out(rows, cols);
    // Fill row-major so a prefix of rows is a stable function of the seed.
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            out(i, j) = normal(rng);
        }
    }
    return out;
}

inline Eigen::VectorXd standard_normal(Eigen::Index n, Engine& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = normal(rng);
    return out;
}

}  // namespace brainval
