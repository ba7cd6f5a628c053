#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace brainval {

/// 64-bit FNV-1a digest used to tag outputs with the inputs that produced them.
class ConfigHasher {
public:
    ConfigHasher& bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }

    ConfigHasher& add(std::string_view s) {
        add(static_cast<std::uint64_t>(s.size()));
        return bytes(s.data(), s.size());
    }

    ConfigHasher& add(double v) { return bytes(&v, sizeof v); }

    ConfigHasher& add(std::uint64_t v) { return bytes(&v, sizeof v); }

    ConfigHasher& add(std::int64_t v) { return bytes(&v, sizeof v); }

    template <typename Derived>
    ConfigHasher& add(const Eigen::DenseBase<Derived>& m) {
        add(static_cast<std::int64_t>(m.rows()));
        add(static_cast<std::int64_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) add(static_cast<double>(m(i, j)));
        }
        return *this;
    }

    std::uint64_t value() const { return state_; }

    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
        return buf;
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

/// Shortest round-trip decimal form of a double, locale independent.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace brainval
