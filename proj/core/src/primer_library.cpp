#include "tubealloc/primer_library.hpp"

#include <charconv>
#include <fstream>
#include <unordered_set>

#include "tubealloc/errors.hpp"
#include "tubealloc/rng.hpp"

namespace tubealloc::primer {

namespace {

constexpr std::size_t kMaxHomopolymer = 3;
constexpr std::uint64_t kMaxDraws = 1'000'000'000ULL;

bool gc_in_range(std::size_t gc, std::size_t len) {
    // 0.45 <= gc/len <= 0.55, inclusive, in exact integer arithmetic.
    return 100 * gc >= 45 * len && 100 * gc <= 55 * len;
}

}  // namespace

bool validate_primer(const Primer& p) {
    if (p.bases.empty()) return false;
    if (max_homopolymer_run(p.bases) > kMaxHomopolymer) return false;
    return gc_in_range(gc_count(p.bases), p.bases.size());
}

PrimerLibrary generate_library(std::uint64_t seed, std::size_t size, std::size_t primer_len) {
    if (size < 2) throw Error("library size must be at least 2");
    if (primer_len < 12) throw Error("primer length must be at least 12");

    PrimerLibrary lib;
    lib.seed = seed;
    lib.primer_len = primer_len;
    lib.primers.reserve(size);

    Rng rng(seed);
    std::unordered_set<std::string> seen;
    seen.reserve(size * 2);

    const std::size_t words_per_primer = (primer_len + 31) / 32;
    std::uint64_t draws = 0;
    BaseSeq candidate(primer_len);
    while (lib.primers.size() < size) {
        if (++draws > kMaxDraws)
            throw GenerationExhausted("primer generation exceeded 1e9 draws; rules too strict");
        for (std::size_t w = 0, i = 0; w < words_per_primer; ++w) {
            std::uint64_t word = rng.next_u64();
            for (; i < primer_len && i < (w + 1) * 32; ++i) {
                candidate[i] = static_cast<Base>(word & 3);
                word >>= 2;
            }
        }
        Primer p{static_cast<std::uint32_t>(lib.primers.size()), candidate};
        if (!validate_primer(p)) continue;
        std::string key = to_string(candidate);
        if (!seen.insert(std::move(key)).second) continue;
        lib.primers.push_back(std::move(p));
    }
    return lib;
}

void save_library(const PrimerLibrary& lib, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open '" + path.string() + "' for writing");
    out << "#primerlib v1 seed=" << lib.seed << " size=" << lib.primers.size()
        << " len=" << lib.primer_len << "\n";
    for (const Primer& p : lib.primers) out << p.id << '\t' << to_string(p.bases) << '\n';
    out.flush();
    if (!out) throw IoFailure("failed writing '" + path.string() + "'");
}

PrimerLibrary load_library(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open '" + path.string() + "' for reading");

    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty primer library file", 1);

    PrimerLibrary lib;
    std::size_t declared_size = 0;
    {
        std::uint64_t seed = 0;
        std::size_t size = 0, len = 0;
        if (std::sscanf(line.c_str(), "#primerlib v1 seed=%llu size=%zu len=%zu",
                        reinterpret_cast<unsigned long long*>(&seed), &size, &len) != 3)
            throw FormatError("bad primer library header", 1);
        lib.seed = seed;
        lib.primer_len = len;
        declared_size = size;
    }

    lib.primers.reserve(declared_size);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) throw FormatError("missing tab separator", lineno);
        std::uint32_t id = 0;
        const auto [ptr, ec] = std::from_chars(line.data(), line.data() + tab, id);
        if (ec != std::errc() || ptr != line.data() + tab)
            throw FormatError("bad primer id", lineno);
        if (id != lib.primers.size()) throw FormatError("primer ids must be dense", lineno);
        const std::string_view bases(line.data() + tab + 1, line.size() - tab - 1);
        if (bases.size() != lib.primer_len)
            throw FormatError("primer length does not match the header", lineno);
        Primer p{id, {}};
        try {
            p.bases = seq_from_string(bases);
        } catch (const MalformedSequence&) {
            throw FormatError("invalid base character", lineno);
        }
        lib.primers.push_back(std::move(p));
    }
    if (lib.primers.size() != declared_size)
        throw FormatError("record count does not match the header size", lineno);
    return lib;
}

}  // namespace tubealloc::primer
