#include "tubealloc/codec.hpp"

#include <algorithm>
#include <array>

#include "tubealloc/codec_tables.hpp"
#include "tubealloc/errors.hpp"

namespace tubealloc::codec {

namespace {

// Reads MSB-first bit blocks from a byte stream extended with the
// self-terminating pad: one 1 bit, then zeros up to a block boundary.
class TerminatedBitReader {
public:
    TerminatedBitReader(std::span<const std::uint8_t> data, unsigned block_bits)
        : data_(data), block_bits_(block_bits) {
        const std::uint64_t payload = static_cast<std::uint64_t>(data.size()) * 8 + 1;
        total_bits_ = (payload + block_bits - 1) / block_bits * block_bits;
    }

    std::uint64_t block_count() const { return total_bits_ / block_bits_; }

    std::uint32_t next_block() {
        std::uint32_t v = 0;
        for (unsigned k = 0; k < block_bits_; ++k, ++pos_) v = (v << 1) | bit_at(pos_);
        return v;
    }

private:
    std::uint32_t bit_at(std::uint64_t p) const {
        const std::uint64_t data_bits = static_cast<std::uint64_t>(data_.size()) * 8;
        if (p < data_bits) return (data_[p >> 3] >> (7 - (p & 7))) & 1u;
        return p == data_bits ? 1u : 0u;
    }

    std::span<const std::uint8_t> data_;
    unsigned block_bits_;
    std::uint64_t total_bits_;
    std::uint64_t pos_ = 0;
};

// Collects MSB-first bits and strips the self-terminating pad at the end.
class TerminatedBitWriter {
public:
    void push_block(std::uint32_t v, unsigned bits) {
        for (unsigned k = bits; k-- > 0;) {
            if ((count_ & 7) == 0) bytes_.push_back(0);
            if ((v >> k) & 1u) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (count_ & 7));
            ++count_;
        }
    }

    std::vector<std::uint8_t> strip_terminator() && {
        std::uint64_t j = count_;
        while (j > 0) {
            --j;
            if ((bytes_[j >> 3] >> (7 - (j & 7))) & 1u) break;
            if (j == 0) throw MalformedSequence("missing pad terminator bit");
        }
        if (count_ == 0 || !((bytes_[j >> 3] >> (7 - (j & 7))) & 1u))
            throw MalformedSequence("missing pad terminator bit");
        if (j % 8 != 0) throw MalformedSequence("payload bit count is not byte aligned");
        bytes_.resize(j / 8);
        return std::move(bytes_);
    }

private:
    std::vector<std::uint8_t> bytes_;
    std::uint64_t count_ = 0;
};

// The three bases different from `prev`, in A<C<G<T order.
constexpr std::array<std::array<Base, 3>, 4> kRotationRow = {{
    {Base::C, Base::G, Base::T},  // prev A
    {Base::A, Base::G, Base::T},  // prev C
    {Base::A, Base::C, Base::T},  // prev G
    {Base::A, Base::C, Base::G},  // prev T
}};

constexpr std::uint32_t kRotationBlockLimit = 1u << 19;  // 3^12 = 531441 >= 2^19

}  // namespace

std::string_view scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Rotation: return "rotation";
        case Scheme::Blawat: return "blawat";
        case Scheme::Grass: return "grass";
        case Scheme::CacLite: return "cac";
    }
    return "?";
}

Scheme scheme_from_name(std::string_view name) {
    if (name == "rotation") return Scheme::Rotation;
    if (name == "blawat") return Scheme::Blawat;
    if (name == "grass") return Scheme::Grass;
    if (name == "cac") return Scheme::CacLite;
    throw FormatError("unknown encoding scheme '" + std::string(name) + "'");
}

BaseSeq encode_rotation(std::span<const std::uint8_t> data) {
    if (data.empty()) return {};
    TerminatedBitReader in(data, 19);
    BaseSeq out;
    out.reserve(in.block_count() * 12);
    Base prev = Base::A;
    for (std::uint64_t b = 0, nb = in.block_count(); b < nb; ++b) {
        std::uint32_t v = in.next_block();
        // 12 trits, most significant first.
        std::array<std::uint8_t, 12> trits;
        for (int i = 11; i >= 0; --i) {
            trits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v % 3);
            v /= 3;
        }
        for (std::uint8_t t : trits) {
            prev = kRotationRow[static_cast<std::size_t>(prev)][t];
            out.push_back(prev);
        }
    }
    return out;
}

std::vector<std::uint8_t> decode_rotation(std::span<const Base> seq) {
    if (seq.empty()) return {};
    if (seq.size() % 12 != 0)
        throw MalformedSequence("rotation sequence length is not a multiple of 12");
    TerminatedBitWriter out;
    Base prev = Base::A;
    for (std::size_t off = 0; off < seq.size(); off += 12) {
        std::uint32_t v = 0;
        for (std::size_t i = 0; i < 12; ++i) {
            const Base b = seq[off + i];
            if (b == prev) throw MalformedSequence("rotation sequence repeats a base");
            const auto& row = kRotationRow[static_cast<std::size_t>(prev)];
            const auto it = std::find(row.begin(), row.end(), b);
            v = v * 3 + static_cast<std::uint32_t>(it - row.begin());
            prev = b;
        }
        if (v >= kRotationBlockLimit)
            throw MalformedSequence("rotation block exceeds the 19-bit range");
        out.push_block(v, 19);
    }
    return std::move(out).strip_terminator();
}

namespace {

// Base-3 candidate list for a Blawat block: if bases 1 and 2 agree, base 3 may
// not equal them; otherwise all four bases qualify. Order is A<C<G<T.
inline std::array<Base, 4> blawat_base3_candidates(Base p1, Base p2, std::size_t* count) {
    std::array<Base, 4> out{};
    std::size_t n = 0;
    for (std::uint8_t v = 0; v < 4; ++v) {
        const Base b = static_cast<Base>(v);
        if (p1 == p2 && b == p1) continue;
        out[n++] = b;
    }
    *count = n;
    return out;
}

}  // namespace

BaseSeq encode_blawat(std::span<const std::uint8_t> data) {
    BaseSeq out;
    out.reserve(data.size() * 5);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::uint8_t b = data[i];
        const Base p1 = static_cast<Base>((b >> 6) & 3);
        const Base p2 = static_cast<Base>((b >> 4) & 3);
        const Base p4 = static_cast<Base>((b >> 2) & 3);
        const std::uint8_t p5_raw = b & 3;

        // Rotate base 5 away from the next block's first base; base 3 records
        // the rotation so the block stays decodable in isolation.
        std::uint8_t offset = 0;
        if (i + 1 < data.size()) {
            const std::uint8_t next_p1 = (data[i + 1] >> 6) & 3;
            if (p5_raw == next_p1) offset = 1;
        }
        std::size_t n = 0;
        const auto cands = blawat_base3_candidates(p1, p2, &n);
        out.push_back(p1);
        out.push_back(p2);
        out.push_back(cands[offset]);
        out.push_back(p4);
        out.push_back(static_cast<Base>((p5_raw + offset) & 3));
    }
    return out;
}

std::vector<std::uint8_t> decode_blawat(std::span<const Base> seq) {
    if (seq.size() % 5 != 0)
        throw MalformedSequence("blawat sequence length is not a multiple of 5");
    std::vector<std::uint8_t> out;
    out.reserve(seq.size() / 5);
    for (std::size_t off = 0; off < seq.size(); off += 5) {
        const Base p1 = seq[off], p2 = seq[off + 1], p3 = seq[off + 2];
        const Base p4 = seq[off + 3], p5 = seq[off + 4];
        std::size_t n = 0;
        const auto cands = blawat_base3_candidates(p1, p2, &n);
        std::size_t offset = n;
        for (std::size_t k = 0; k < 2; ++k)
            if (cands[k] == p3) {
                offset = k;
                break;
            }
        if (offset > 1) throw MalformedSequence("blawat block outside the table image");
        const std::uint8_t p5_raw =
            static_cast<std::uint8_t>((static_cast<std::uint8_t>(p5) + 4 - offset) & 3);
        out.push_back(static_cast<std::uint8_t>((static_cast<std::uint8_t>(p1) << 6) |
                                                (static_cast<std::uint8_t>(p2) << 4) |
                                                (static_cast<std::uint8_t>(p4) << 2) | p5_raw));
    }
    return out;
}

BaseSeq encode_grass(std::span<const std::uint8_t> data) {
    const auto& table = grass_triplets();
    BaseSeq out;
    out.reserve((data.size() / 2) * 9 + 6);
    std::size_t i = 0;
    for (; i + 1 < data.size(); i += 2) {
        const std::uint32_t v = (static_cast<std::uint32_t>(data[i]) << 8) | data[i + 1];
        const std::uint32_t d2 = v / (47u * 47u);
        const std::uint32_t d1 = (v / 47u) % 47u;
        const std::uint32_t d0 = v % 47u;
        for (std::uint32_t d : {d2, d1, d0})
            for (Base b : table[d]) out.push_back(b);
    }
    if (i < data.size()) {
        // Short block: one byte as two GF(47) digits (256 <= 47^2).
        const std::uint32_t v = data[i];
        for (std::uint32_t d : {v / 47u, v % 47u})
            for (Base b : table[d]) out.push_back(b);
    }
    return out;
}

std::vector<std::uint8_t> decode_grass(std::span<const Base> seq) {
    const std::size_t rem = seq.size() % 9;
    if (rem != 0 && rem != 6)
        throw MalformedSequence("grass sequence length is not 9k or 9k+6");
    const auto digit_of = [](std::span<const Base> t) -> std::uint32_t {
        const int d = grass_digit(t[0], t[1], t[2]);
        if (d < 0) throw MalformedSequence("invalid grass triplet");
        return static_cast<std::uint32_t>(d);
    };
    std::vector<std::uint8_t> out;
    out.reserve(seq.size() / 9 * 2 + 1);
    std::size_t off = 0;
    for (; off + 9 <= seq.size(); off += 9) {
        const std::uint32_t d2 = digit_of(seq.subspan(off, 3));
        const std::uint32_t d1 = digit_of(seq.subspan(off + 3, 3));
        const std::uint32_t d0 = digit_of(seq.subspan(off + 6, 3));
        const std::uint32_t v = d2 * 47u * 47u + d1 * 47u + d0;
        if (v >= 0x10000u) throw MalformedSequence("grass block exceeds the 16-bit range");
        out.push_back(static_cast<std::uint8_t>(v >> 8));
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
    if (off < seq.size()) {
        const std::uint32_t d1 = digit_of(seq.subspan(off, 3));
        const std::uint32_t d0 = digit_of(seq.subspan(off + 3, 3));
        const std::uint32_t v = d1 * 47u + d0;
        if (v >= 0x100u) throw MalformedSequence("grass short block exceeds the 8-bit range");
        out.push_back(static_cast<std::uint8_t>(v));
    }
    return out;
}

namespace {

struct CacCandidate {
    std::array<Base, 3> bases;
};

// Candidate triplets for a 3-bit value v are the base-4 indices v, v+8, v+16,
// v+24; the decoder recovers v as index mod 8 whichever candidate was picked.
std::array<CacCandidate, 4> cac_candidates(std::uint32_t v) {
    std::array<CacCandidate, 4> out{};
    for (std::uint32_t k = 0; k < 4; ++k) {
        const std::uint32_t idx = v + 8 * k;
        out[k].bases = {static_cast<Base>((idx >> 4) & 3), static_cast<Base>((idx >> 2) & 3),
                        static_cast<Base>(idx & 3)};
    }
    return out;
}

// Longest suffix of `s` that also occurs starting at an earlier position.
std::size_t longest_repeated_suffix(std::span<const Base> s) {
    const std::size_t n = s.size();
    std::size_t best = 0;
    for (std::size_t shift = 1; shift < n; ++shift) {
        std::size_t k = 0;
        while (k < n - shift && s[n - 1 - k] == s[n - 1 - shift - k]) ++k;
        best = std::max(best, k);
    }
    return best;
}

}  // namespace

BaseSeq encode_cac_lite(std::span<const std::uint8_t> data, int context_window) {
    if (context_window < 0) throw Error("context_window must be non-negative");
    if (data.empty()) return {};
    TerminatedBitReader in(data, 3);
    BaseSeq out;
    out.reserve(in.block_count() * 3);
    const std::size_t win = static_cast<std::size_t>(context_window);

    std::vector<Base> scratch;
    scratch.reserve(win + 3);
    for (std::uint64_t b = 0, nb = in.block_count(); b < nb; ++b) {
        const std::uint32_t v = in.next_block();
        const auto cands = cac_candidates(v);
        const std::size_t ctx = std::min(win, out.size());

        std::size_t best_k = 0;
        std::uint64_t best_penalty = ~0ULL;
        for (std::size_t k = 0; k < 4; ++k) {
            scratch.assign(out.end() - static_cast<std::ptrdiff_t>(ctx), out.end());
            scratch.insert(scratch.end(), cands[k].bases.begin(), cands[k].bases.end());
            const std::size_t len = scratch.size();
            const bool homopolymer = max_homopolymer_run(scratch) > 3;
            const std::size_t gc = gc_count(scratch);
            const std::uint64_t gc_dev =
                (2 * gc > len) ? (2 * gc - len) : (len - 2 * gc);
            const std::size_t rep = longest_repeated_suffix(scratch);
            // Exact integer form of 1000*homopolymer + 1000*|gc/len - 1/2| + rep,
            // scaled by 2*len (equal across candidates) so ties are exact.
            const std::uint64_t penalty =
                (1000ULL * homopolymer + rep) * (2 * len) + 1000ULL * gc_dev;
            if (penalty < best_penalty) {
                best_penalty = penalty;
                best_k = k;
            }
        }
        for (Base base : cands[best_k].bases) out.push_back(base);
    }
    return out;
}

std::vector<std::uint8_t> decode_cac_lite(std::span<const Base> seq) {
    if (seq.empty()) return {};
    if (seq.size() % 3 != 0)
        throw MalformedSequence("cac sequence length is not a multiple of 3");
    TerminatedBitWriter out;
    for (std::size_t off = 0; off < seq.size(); off += 3) {
        const std::uint32_t idx = (static_cast<std::uint32_t>(seq[off]) << 4) |
                                  (static_cast<std::uint32_t>(seq[off + 1]) << 2) |
                                  static_cast<std::uint32_t>(seq[off + 2]);
        out.push_block(idx % 8, 3);
    }
    return std::move(out).strip_terminator();
}

BaseSeq encode(Scheme s, std::span<const std::uint8_t> data) {
    switch (s) {
        case Scheme::Rotation: return encode_rotation(data);
        case Scheme::Blawat: return encode_blawat(data);
        case Scheme::Grass: return encode_grass(data);
        case Scheme::CacLite: return encode_cac_lite(data);
    }
    return {};
}

std::vector<std::uint8_t> decode(Scheme s, std::span<const Base> seq) {
    switch (s) {
        case Scheme::Rotation: return decode_rotation(seq);
        case Scheme::Blawat: return decode_blawat(seq);
        case Scheme::Grass: return decode_grass(seq);
        case Scheme::CacLite: return decode_cac_lite(seq);
    }
    return {};
}

std::vector<PayloadFrame> frame_payloads(const BaseSeq& seq, std::uint32_t chunk_id,
                                         std::size_t payload_len) {
    if (payload_len < 12) throw Error("payload_len must be at least 12");
    std::vector<PayloadFrame> frames;
    if (seq.empty()) return frames;
    const std::size_t count = (seq.size() + payload_len - 1) / payload_len;
    frames.reserve(count);
    static constexpr Base kPad[4] = {Base::A, Base::C, Base::G, Base::T};
    for (std::size_t f = 0; f < count; ++f) {
        PayloadFrame frame;
        frame.chunk_id = chunk_id;
        frame.strand_index = static_cast<std::uint32_t>(f);
        const std::size_t begin = f * payload_len;
        const std::size_t take = std::min(payload_len, seq.size() - begin);
        frame.payload.assign(seq.begin() + static_cast<std::ptrdiff_t>(begin),
                             seq.begin() + static_cast<std::ptrdiff_t>(begin + take));
        for (std::size_t i = take; i < payload_len; ++i) frame.payload.push_back(kPad[(i - take) % 4]);
        frames.push_back(std::move(frame));
    }
    return frames;
}

}  // namespace tubealloc::codec
