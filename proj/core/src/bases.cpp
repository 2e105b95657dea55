#include "tubealloc/bases.hpp"

namespace tubealloc {

Base base_from_char(char c) {
    switch (c) {
        case 'A': return Base::A;
        case 'C': return Base::C;
        case 'G': return Base::G;
        case 'T': return Base::T;
        default: break;
    }
    throw MalformedSequence(std::string("invalid base character '") + c + "'");
}

std::string to_string(std::span<const Base> seq) {
    std::string out;
    out.reserve(seq.size());
    for (Base b : seq) out.push_back(to_char(b));
    return out;
}

BaseSeq seq_from_string(std::string_view text) {
    BaseSeq out;
    out.reserve(text.size());
    for (char c : text) out.push_back(base_from_char(c));
    return out;
}

std::size_t gc_count(std::span<const Base> seq) {
    std::size_t n = 0;
    for (Base b : seq) n += is_gc(b);
    return n;
}

std::size_t max_homopolymer_run(std::span<const Base> seq) {
    std::size_t best = 0, run = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        run = (i > 0 && seq[i] == seq[i - 1]) ? run + 1 : 1;
        if (run > best) best = run;
    }
    return best;
}

std::uint64_t pack_code(std::span<const Base> seq) {
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < seq.size(); ++i)
        code |= static_cast<std::uint64_t>(seq[i]) << (2 * i);
    return code;
}

}  // namespace tubealloc
