#include "tubealloc/collision.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>

namespace tubealloc::collision {

namespace {

inline std::uint64_t mix_key(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

// Removes the 2-bit lane at base position p from a packed code.
inline std::uint64_t delete_lane(std::uint64_t code, std::size_t p) {
    const std::uint64_t low = code & ((std::uint64_t(1) << (2 * p)) - 1);
    const std::uint64_t high = (code >> (2 * (p + 1))) << (2 * p);
    return low | high;
}

}  // namespace

namespace detail {

// Myers bit-parallel approximate search (free text start): true when the
// pattern matches some substring of `text` within `k` edits. Pattern length
// must be <= 64. Used only as the production verifier; the plain DP below is
// the normative reference and tests pin the two together.
bool myers_matches(std::span<const Base> pattern, std::span<const Base> text, std::size_t k) {
    const std::size_t m = pattern.size();
    if (m == 0) return true;
    std::array<std::uint64_t, 4> peq{};
    for (std::size_t i = 0; i < m; ++i)
        peq[static_cast<std::size_t>(pattern[i])] |= std::uint64_t(1) << i;

    const std::uint64_t high = std::uint64_t(1) << (m - 1);
    std::uint64_t vp = ~std::uint64_t(0) >> (64 - m);
    std::uint64_t vn = 0;
    std::size_t score = m;
    for (Base c : text) {
        const std::uint64_t eq = peq[static_cast<std::size_t>(c)];
        const std::uint64_t d0 = (((eq & vp) + vp) ^ vp) | eq | vn;
        const std::uint64_t hp = vn | ~(d0 | vp);
        const std::uint64_t hn = vp & d0;
        if (hp & high)
            ++score;
        else if (hn & high)
            --score;
        const std::uint64_t x = (hp << 1) | 1;  // column 0 stays 0: free start
        vp = (hn << 1) | ~(d0 | x);
        vn = x & d0;
        if (score <= k) return true;
    }
    return false;
}

}  // namespace detail

std::size_t min_substring_edits(std::span<const Base> pattern, std::span<const Base> text,
                                std::size_t limit) {
    const std::size_t m = pattern.size();
    const std::size_t cap = limit + 1;
    std::array<std::uint32_t, 64> col;
    for (std::size_t i = 0; i <= m; ++i) col[i] = static_cast<std::uint32_t>(std::min(i, cap));
    std::size_t best = col[m];
    if (best <= limit) return best;
    for (Base t : text) {
        std::uint32_t diag = col[0];
        col[0] = 0;
        for (std::size_t i = 1; i <= m; ++i) {
            const std::uint32_t up = col[i];
            std::uint32_t v = diag + (pattern[i - 1] != t);
            v = std::min(v, std::min(up, col[i - 1]) + 1);
            if (v > cap) v = static_cast<std::uint32_t>(cap);
            diag = up;
            col[i] = v;
        }
        if (col[m] < best) {
            best = col[m];
            if (best <= limit) return best;
        }
    }
    return best;
}

bool collides_oracle(std::span<const Base> primer, std::span<const Base> payload,
                     const CollisionParams& params) {
    params.validate();
    const std::size_t w = params.window_len;
    if (w > primer.size()) throw WindowTooLong(w, primer.size());
    if (payload.size() + params.max_edits < w) return false;
    for (std::size_t start = 0; start + w <= primer.size(); ++start) {
        if (min_substring_edits(primer.subspan(start, w), payload, params.max_edits) <=
            params.max_edits)
            return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Index construction
// ---------------------------------------------------------------------------

std::span<const CollisionIndex::Posting> CollisionIndex::VariantTable::find(
    std::uint64_t code) const {
    std::uint64_t slot = mix_key(code) & slot_mask;
    while (true) {
        const std::uint64_t key = keys[slot];
        if (key == code) {
            const std::uint32_t r = range[slot];
            return {postings.data() + starts[r], starts[r + 1] - starts[r]};
        }
        if (key == kEmptyKey) return {};
        slot = (slot + 1) & slot_mask;
    }
}

void CollisionIndex::VariantTable::build(std::vector<std::pair<std::uint64_t, Posting>>& items,
                                         std::size_t len) {
    s_len = len;
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        if (a.second.primer != b.second.primer) return a.second.primer < b.second.primer;
        return a.second.wstart < b.second.wstart;
    });
    items.erase(std::unique(items.begin(), items.end(),
                            [](const auto& a, const auto& b) {
                                return a.first == b.first && a.second.primer == b.second.primer &&
                                       a.second.wstart == b.second.wstart;
                            }),
                items.end());

    std::size_t nkeys = 0;
    for (std::size_t i = 0; i < items.size(); ++i)
        if (i == 0 || items[i].first != items[i - 1].first) ++nkeys;

    std::size_t slots = 16;
    while (slots < nkeys * 2) slots <<= 1;
    slot_mask = slots - 1;
    keys.assign(slots, kEmptyKey);
    range.assign(slots, 0);
    starts.assign(nkeys + 1, 0);
    postings.resize(items.size());

    bitmap.assign(((std::uint64_t(1) << (2 * s_len)) + 63) / 64, 0);

    std::uint32_t r = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const std::uint64_t code = items[i].first;
        if (i == 0 || code != items[i - 1].first) {
            starts[r] = static_cast<std::uint32_t>(i);
            std::uint64_t slot = mix_key(code) & slot_mask;
            while (keys[slot] != kEmptyKey) slot = (slot + 1) & slot_mask;
            keys[slot] = code;
            range[slot] = r;
            bitmap[code >> 6] |= std::uint64_t(1) << (code & 63);
            ++r;
        }
        postings[i] = items[i].second;
    }
    starts[r] = static_cast<std::uint32_t>(items.size());
}

CollisionIndex build_collision_index(const primer::PrimerLibrary& lib,
                                     const CollisionParams& params) {
    params.validate();
    const std::size_t w = params.window_len;
    const std::size_t e = params.max_edits;
    if (lib.primer_len < w) throw WindowTooLong(w, lib.primer_len);

    CollisionIndex index;
    index.params_ = params;
    index.kmer_len_ = w / (e + 1);
    index.library_size_ = lib.size();
    index.primer_len_ = lib.primer_len;

    index.primer_bases_.resize(lib.size() * lib.primer_len);
    for (const auto& p : lib.primers)
        std::copy(p.bases.begin(), p.bases.end(),
                  index.primer_bases_.begin() +
                      static_cast<std::ptrdiff_t>(p.id * lib.primer_len));

    // k-mer seed table (counting sort into a CSR layout).
    const std::size_t k = index.kmer_len_;
    const std::size_t buckets = std::size_t(1) << (2 * k);
    std::vector<std::uint32_t> counts(buckets + 1, 0);
    const auto kmer_at = [&](std::uint32_t primer, std::size_t pos) {
        std::span<const Base> bases(index.primer_bases_.data() + primer * lib.primer_len + pos, k);
        return pack_code(bases);
    };
    for (std::uint32_t p = 0; p < lib.size(); ++p)
        for (std::size_t pos = 0; pos + k <= lib.primer_len; ++pos) ++counts[kmer_at(p, pos) + 1];
    for (std::size_t b = 0; b < buckets; ++b) counts[b + 1] += counts[b];
    index.seed_starts_ = counts;
    index.seed_entries_.resize(counts[buckets]);
    std::vector<std::uint32_t> cursor(counts.begin(), counts.end() - 1);
    for (std::uint32_t p = 0; p < lib.size(); ++p)
        for (std::size_t pos = 0; pos + k <= lib.primer_len; ++pos) {
            const std::uint64_t code = kmer_at(p, pos);
            index.seed_entries_[cursor[code]++] = {p, static_cast<std::uint16_t>(pos)};
        }

    // Deletion-variant tables: every window minus up to e bases, one table per
    // resulting length in [w-e, w].
    std::vector<std::vector<std::pair<std::uint64_t, CollisionIndex::Posting>>> items(e + 1);
    for (std::uint32_t p = 0; p < lib.size(); ++p) {
        for (std::size_t wstart = 0; wstart + w <= lib.primer_len; ++wstart) {
            const std::uint64_t wcode = pack_code(index.primer_window(p, wstart));
            const CollisionIndex::Posting post{p, static_cast<std::uint16_t>(wstart), 0};
            items[0].push_back({wcode, post});
            if (e >= 1)
                for (std::size_t d1 = 0; d1 < w; ++d1) {
                    const std::uint64_t c1 = delete_lane(wcode, d1);
                    items[1].push_back({c1, post});
                    if (e >= 2)
                        for (std::size_t d2 = 0; d2 < d1; ++d2)
                            items[2].push_back({delete_lane(c1, d2), post});
                }
        }
    }
    index.variant_tables_.resize(e + 1);
    for (std::size_t d = 0; d <= e; ++d)
        index.variant_tables_[d].build(items[d], w - d);
    return index;
}

// ---------------------------------------------------------------------------
// Production detector with per-context memoization
// ---------------------------------------------------------------------------

ContextCache::ContextCache(const CollisionIndex& index)
    : index_(&index),
      context_len_(index.params().window_len + index.params().max_edits),
      keys_(std::size_t(1) << 16, kUnset),
      vals_(std::size_t(1) << 16, 0),
      seen_(1024, kUnset),
      seen_epoch_(1024, 0),
      member_epoch_(index.library_size(), 0) {
    arena_.push_back(0);  // offset 0 is the reserved "empty set" value
}

void ContextCache::grow() {
    std::vector<std::uint64_t> old_keys = std::move(keys_);
    std::vector<std::uint32_t> old_vals = std::move(vals_);
    keys_.assign(old_keys.size() * 2, kUnset);
    vals_.assign(old_keys.size() * 2, 0);
    const std::uint64_t mask = keys_.size() - 1;
    for (std::size_t i = 0; i < old_keys.size(); ++i) {
        if (old_keys[i] == kUnset) continue;
        std::uint64_t slot = mix_key(old_keys[i]) & mask;
        while (keys_[slot] != kUnset) slot = (slot + 1) & mask;
        keys_[slot] = old_keys[i];
        vals_[slot] = old_vals[i];
    }
}

std::span<const std::uint32_t> ContextCache::context_set(std::span<const Base> context) {
    const std::uint64_t key =
        pack_code(context) | (static_cast<std::uint64_t>(context.size()) << 58);
    const std::uint64_t mask = keys_.size() - 1;
    std::uint64_t slot = mix_key(key) & mask;
    while (true) {
        if (keys_[slot] == key) {
            const std::uint32_t v = vals_[slot];
            if (v == 0) return {};
            return {arena_.data() + v + 1, arena_[v]};
        }
        if (keys_[slot] == kUnset) break;
        slot = (slot + 1) & mask;
    }

    auto ids = compute_context_set(context);

    if (used_ * 10 >= keys_.size() * 7 && keys_.size() < kMaxSlots) {
        grow();
        slot = mix_key(key) & (keys_.size() - 1);
        while (keys_[slot] != kUnset) slot = (slot + 1) & (keys_.size() - 1);
    }
    if (used_ < kMaxSlots) {
        keys_[slot] = key;
        if (ids.empty()) {
            vals_[slot] = 0;
        } else {
            vals_[slot] = static_cast<std::uint32_t>(arena_.size());
            arena_.push_back(static_cast<std::uint32_t>(ids.size()));
            arena_.insert(arena_.end(), ids.begin(), ids.end());
        }
        ++used_;
    }
    return ids;
}

std::span<const std::uint32_t> ContextCache::compute_context_set(std::span<const Base> context) {
    const auto& params = index_->params();
    const std::size_t w = params.window_len;
    const std::size_t e = params.max_edits;
    const std::size_t m = context.size();
    ids_tmp_.clear();
    if (++epoch_ == 0) {  // epoch wrap: flush the stamped tables
        std::fill(seen_epoch_.begin(), seen_epoch_.end(), 0);
        std::fill(member_epoch_.begin(), member_epoch_.end(), 0);
        epoch_ = 1;
    }

    std::size_t seen_fill = 0;
    const std::uint64_t code = pack_code(context);
    const auto probe = [&](const CollisionIndex::VariantTable& table, std::uint64_t scode) {
        if (!table.maybe_contains(scode)) return;
        for (const auto& post : table.find(scode)) {
            if (member_epoch_[post.primer] == epoch_) continue;
            if (2 * seen_fill >= seen_.size()) {
                // Keep the open-addressing memo sparse; dropping it only costs
                // duplicate verification work, never correctness.
                std::fill(seen_epoch_.begin(), seen_epoch_.end(), 0);
                seen_.assign(seen_.size() * 2, kUnset);
                seen_epoch_.assign(seen_.size(), 0);
                seen_fill = 0;
            }
            // One verification attempt per (primer, window) per context.
            const std::uint64_t seen_key =
                (static_cast<std::uint64_t>(post.primer) << 16) | post.wstart;
            const std::uint64_t smask = seen_.size() - 1;
            std::uint64_t s = mix_key(seen_key) & smask;
            bool skip = false;
            while (seen_epoch_[s] == epoch_) {
                if (seen_[s] == seen_key) {
                    skip = true;
                    break;
                }
                s = (s + 1) & smask;
            }
            if (skip) continue;
            seen_[s] = seen_key;
            seen_epoch_[s] = epoch_;
            ++seen_fill;
            if (detail::myers_matches(index_->primer_window(post.primer, post.wstart), context,
                                      e)) {
                ids_tmp_.push_back(post.primer);
                member_epoch_[post.primer] = epoch_;
            }
        }
    };

    for (std::size_t len = w - e; len <= m; ++len) {
        const std::uint64_t span_code =
            (2 * len == 64) ? code : (code & ((std::uint64_t(1) << (2 * len)) - 1));
        const std::size_t dmin = len > w ? len - w : 0;
        const std::size_t dmax = std::min(e, len - (w - e));
        for (std::size_t d = dmin; d <= dmax; ++d) {
            const auto& table = index_->variant_tables_[d];
            if (d == 0) {
                probe(table, span_code);
            } else if (d == 1) {
                for (std::size_t p = 0; p < len; ++p) probe(table, delete_lane(span_code, p));
            } else {
                for (std::size_t p2 = 1; p2 < len; ++p2) {
                    const std::uint64_t c1 = delete_lane(span_code, p2);
                    for (std::size_t p1 = 0; p1 < p2; ++p1) probe(table, delete_lane(c1, p1));
                }
            }
        }
    }
    std::sort(ids_tmp_.begin(), ids_tmp_.end());
    return ids_tmp_;
}

void ContextCache::accumulate_payload(std::span<const Base> payload, CollisionSet& out) {
    const auto& params = index_->params();
    const std::size_t min_t = params.window_len - params.max_edits;
    if (payload.size() < min_t) return;
    const std::size_t last = payload.size() - min_t;
    for (std::size_t j = 0; j <= last; ++j) {
        const std::size_t len = std::min(context_len_, payload.size() - j);
        for (std::uint32_t id : context_set(payload.subspan(j, len))) out.set(id);
    }
}

CollisionSet chunk_collision_set(std::span<const codec::PayloadFrame> frames,
                                 const CollisionIndex& index, ContextCache& cache) {
    for (const auto& f : frames)
        if (f.chunk_id != frames.front().chunk_id)
            throw Error("frames of one chunk must share a chunk_id");
    CollisionSet out(index.library_size());
    for (const auto& f : frames) cache.accumulate_payload(f.payload, out);
    return out;
}

CollisionSet chunk_collision_set(std::span<const codec::PayloadFrame> frames,
                                 const CollisionIndex& index) {
    ContextCache cache(index);
    return chunk_collision_set(frames, index, cache);
}

CollisionSet chunk_collision_set_direct(std::span<const codec::PayloadFrame> frames,
                                        const CollisionIndex& index) {
    for (const auto& f : frames)
        if (f.chunk_id != frames.front().chunk_id)
            throw Error("frames of one chunk must share a chunk_id");
    const auto& params = index.params();
    const std::size_t w = params.window_len;
    const std::size_t e = params.max_edits;
    const std::size_t k = index.kmer_len();
    const std::size_t windows = index.primer_len() - w;  // last window start

    CollisionSet out(index.library_size());
    for (const auto& frame : frames) {
        const auto& payload = frame.payload;
        if (payload.size() < k) continue;
        std::uint64_t code = 0;
        for (std::size_t i = 0; i + 1 < k; ++i)
            code = (code >> 2) | (static_cast<std::uint64_t>(payload[i]) << (2 * (k - 1)));
        for (std::size_t j = 0; j + k <= payload.size(); ++j) {
            code = (code >> 2) | (static_cast<std::uint64_t>(payload[j + k - 1]) << (2 * (k - 1)));
            for (const SeedEntry& entry : index.seed_bucket(code)) {
                if (out.test(entry.primer)) continue;
                for (std::size_t t = 0; t <= e; ++t) {
                    if (entry.pos < t * k) break;
                    const std::size_t ws = entry.pos - t * k;
                    if (ws > windows) continue;
                    const std::ptrdiff_t anchor =
                        static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(entry.pos - ws);
                    const std::ptrdiff_t lo =
                        std::max<std::ptrdiff_t>(0, anchor - static_cast<std::ptrdiff_t>(e));
                    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
                        static_cast<std::ptrdiff_t>(payload.size()),
                        anchor + static_cast<std::ptrdiff_t>(w + e));
                    if (lo >= hi) continue;
                    const std::span<const Base> region(payload.data() + lo,
                                                       static_cast<std::size_t>(hi - lo));
                    if (min_substring_edits(index.primer_window(entry.primer, ws), region, e) <=
                        e) {
                        out.set(entry.primer);
                        break;
                    }
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSET v1 dump
// ---------------------------------------------------------------------------

namespace {

constexpr char kCsetMagic[8] = {'C', 'S', 'E', 'T', ' ', 'v', '1', '\0'};

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError("truncated collision dump");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_collision_dump(const std::filesystem::path& path, std::size_t library_size,
                          std::span<const alloc::Chunk> chunks) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open '" + path.string() + "' for writing");
    out.write(kCsetMagic, sizeof kCsetMagic);
    put_u32(out, static_cast<std::uint32_t>(library_size));
    put_u32(out, static_cast<std::uint32_t>(chunks.size()));
    for (const auto& c : chunks) {
        if (c.collisions.width() != library_size)
            throw WidthMismatch(c.collisions.width(), library_size);
        put_u32(out, c.chunk_id);
        put_u32(out, c.file_id);
        put_u32(out, c.byte_len);
        const auto bytes = c.collisions.to_bytes();
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    }
    out.flush();
    if (!out) throw IoFailure("failed writing '" + path.string() + "'");
}

std::pair<std::size_t, std::vector<alloc::Chunk>> read_collision_dump(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open '" + path.string() + "' for reading");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCsetMagic, 8) != 0)
        throw FormatError("bad collision dump magic");
    const std::size_t library_size = get_u32(in);
    const std::size_t count = get_u32(in);
    std::vector<alloc::Chunk> chunks;
    chunks.reserve(count);
    std::vector<std::uint8_t> bytes((library_size + 7) / 8);
    for (std::size_t i = 0; i < count; ++i) {
        alloc::Chunk c;
        c.chunk_id = get_u32(in);
        c.file_id = get_u32(in);
        c.byte_len = get_u32(in);
        in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!in) throw FormatError("truncated collision dump");
        c.collisions = CollisionSet::from_bytes(library_size, bytes);
        chunks.push_back(std::move(c));
    }
    return {library_size, std::move(chunks)};
}

}  // namespace tubealloc::collision
