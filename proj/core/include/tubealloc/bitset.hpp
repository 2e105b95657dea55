#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tubealloc/errors.hpp"

namespace tubealloc {

// Fixed-width bit vector over primer ids. Bit i set <=> primer i collides with
// the owning chunk or cluster. The popcount is cached and kept coherent by
// every mutator.
class CollisionSet {
public:
    CollisionSet() = default;
    explicit CollisionSet(std::size_t width)
        : width_(width), words_((width + 63) / 64, 0), popcount_(0) {}

    std::size_t width() const noexcept { return width_; }
    std::size_t popcount() const noexcept { return popcount_; }
    bool empty() const noexcept { return popcount_ == 0; }

    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }

    void set(std::size_t i) {
        std::uint64_t& w = words_[i >> 6];
        const std::uint64_t m = 1ULL << (i & 63);
        if (!(w & m)) {
            w |= m;
            ++popcount_;
        }
    }

    void clear() {
        std::fill(words_.begin(), words_.end(), 0);
        popcount_ = 0;
    }

    void union_with(const CollisionSet& other) {
        require_same_width(other);
        std::size_t pc = 0;
        for (std::size_t k = 0; k < words_.size(); ++k) {
            words_[k] |= other.words_[k];
            pc += static_cast<std::size_t>(std::popcount(words_[k]));
        }
        popcount_ = pc;
    }

    std::size_t intersection_count(const CollisionSet& other) const {
        require_same_width(other);
        std::size_t pc = 0;
        for (std::size_t k = 0; k < words_.size(); ++k)
            pc += static_cast<std::size_t>(std::popcount(words_[k] & other.words_[k]));
        return pc;
    }

    std::size_t union_count(const CollisionSet& other) const {
        require_same_width(other);
        std::size_t pc = 0;
        for (std::size_t k = 0; k < words_.size(); ++k)
            pc += static_cast<std::size_t>(std::popcount(words_[k] | other.words_[k]));
        return pc;
    }

    // {union popcount, intersection popcount} in one pass.
    std::pair<std::size_t, std::size_t> union_intersection_counts(const CollisionSet& other) const {
        require_same_width(other);
        std::size_t u = 0, i = 0;
        for (std::size_t k = 0; k < words_.size(); ++k) {
            u += static_cast<std::size_t>(std::popcount(words_[k] | other.words_[k]));
            i += static_cast<std::size_t>(std::popcount(words_[k] & other.words_[k]));
        }
        return {u, i};
    }

    bool operator==(const CollisionSet& other) const {
        return width_ == other.width_ && words_ == other.words_;
    }

    std::span<const std::uint64_t> words() const noexcept { return words_; }

    // Raw little-endian-bit-order bytes for the CSET dump format.
    std::vector<std::uint8_t> to_bytes() const;
    static CollisionSet from_bytes(std::size_t width, std::span<const std::uint8_t> bytes);

private:
    void require_same_width(const CollisionSet& other) const {
        if (width_ != other.width_) throw WidthMismatch(width_, other.width_);
    }

    std::size_t width_ = 0;
    std::vector<std::uint64_t> words_;
    std::size_t popcount_ = 0;
};

inline CollisionSet set_union(const CollisionSet& a, const CollisionSet& b) {
    CollisionSet out = a;
    out.union_with(b);
    return out;
}

inline std::size_t set_intersection_count(const CollisionSet& a, const CollisionSet& b) {
    return a.intersection_count(b);
}

inline std::size_t set_union_count(const CollisionSet& a, const CollisionSet& b) {
    return a.union_count(b);
}

inline std::vector<std::uint8_t> CollisionSet::to_bytes() const {
    std::vector<std::uint8_t> out((width_ + 7) / 8, 0);
    for (std::size_t k = 0; k < words_.size(); ++k) {
        std::uint64_t w = words_[k];
        for (int b = 0; b < 8 && k * 8 + b < out.size(); ++b) {
            out[k * 8 + b] = static_cast<std::uint8_t>(w & 0xff);
            w >>= 8;
        }
    }
    return out;
}

inline CollisionSet CollisionSet::from_bytes(std::size_t width,
                                             std::span<const std::uint8_t> bytes) {
    if (bytes.size() != (width + 7) / 8)
        throw FormatError("collision set byte length does not match width");
    CollisionSet out(width);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        out.words_[i >> 3] |= static_cast<std::uint64_t>(bytes[i]) << (8 * (i & 7));
    // Reject stray bits beyond the declared width.
    const std::size_t tail = width & 63;
    if (tail && (out.words_.back() >> tail) != 0)
        throw FormatError("collision set has bits beyond its width");
    std::size_t pc = 0;
    for (std::uint64_t w : out.words_) pc += static_cast<std::size_t>(std::popcount(w));
    out.popcount_ = pc;
    return out;
}

}  // namespace tubealloc
