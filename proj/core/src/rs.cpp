#include "tubealloc/rs.hpp"

#include <array>

namespace tubealloc::rs {

namespace {

constexpr unsigned kPoly = 0x11d;

struct Tables {
    std::array<std::uint8_t, 512> exp{};
    std::array<std::uint8_t, 256> log{};
    // Monic generator polynomial, low degree first: g[0..16], g[16] = 1.
    std::array<std::uint8_t, kParityBytes + 1> gen{};

    Tables() {
        unsigned x = 1;
        for (unsigned i = 0; i < 255; ++i) {
            exp[i] = static_cast<std::uint8_t>(x);
            log[x] = static_cast<std::uint8_t>(i);
            x <<= 1;
            if (x & 0x100) x ^= kPoly;
        }
        for (unsigned i = 255; i < 512; ++i) exp[i] = exp[i - 255];

        gen[0] = 1;
        std::size_t deg = 0;
        for (unsigned r = 0; r < kParityBytes; ++r) {
            // gen *= (x + alpha^r)
            const std::uint8_t root = exp[r];
            ++deg;
            gen[deg] = gen[deg - 1];
            for (std::size_t j = deg - 1; j >= 1; --j)
                gen[j] = static_cast<std::uint8_t>(gen[j - 1] ^ mul(gen[j], root));
            gen[0] = mul(gen[0], root);
        }
    }

    std::uint8_t mul(std::uint8_t a, std::uint8_t b) const {
        if (a == 0 || b == 0) return 0;
        return exp[log[a] + log[b]];
    }

    std::uint8_t div(std::uint8_t a, std::uint8_t b) const {
        // b must be nonzero
        if (a == 0) return 0;
        return exp[(log[a] + 255 - log[b]) % 255];
    }

    std::uint8_t pow_alpha(unsigned e) const { return exp[e % 255]; }
};

const Tables& tables() {
    static const Tables t;
    return t;
}

// Polynomial with low degree first.
using Poly = std::vector<std::uint8_t>;

std::size_t poly_deg(const Poly& p) {
    std::size_t d = p.size();
    while (d > 1 && p[d - 1] == 0) --d;
    return d - 1;
}

std::uint8_t poly_eval(const Poly& p, std::uint8_t x, const Tables& t) {
    std::uint8_t acc = 0;
    for (std::size_t i = p.size(); i-- > 0;) acc = static_cast<std::uint8_t>(t.mul(acc, x) ^ p[i]);
    return acc;
}

// Syndromes of one received block: S_j = r(alpha^j) with the first byte as the
// highest-power coefficient. Shortened blocks need no special handling.
std::array<std::uint8_t, kParityBytes> syndromes(std::span<const std::uint8_t> block,
                                                 const Tables& t) {
    std::array<std::uint8_t, kParityBytes> s{};
    for (unsigned j = 0; j < kParityBytes; ++j) {
        const std::uint8_t a = t.pow_alpha(j);
        std::uint8_t acc = 0;
        for (std::uint8_t byte : block) acc = static_cast<std::uint8_t>(t.mul(acc, a) ^ byte);
        s[j] = acc;
    }
    return s;
}

// Corrects one block in place; returns false when the error pattern is beyond
// the code's capability (detectably).
bool correct_block(std::span<std::uint8_t> block, const Tables& t) {
    auto synd = syndromes(block, t);
    bool clean = true;
    for (auto v : synd) clean = clean && v == 0;
    if (clean) return true;

    // Berlekamp-Massey for the error locator polynomial.
    Poly lambda{1}, prev{1};
    std::size_t errors = 0, m = 1;
    std::uint8_t b = 1;
    for (std::size_t n = 0; n < kParityBytes; ++n) {
        std::uint8_t delta = synd[n];
        for (std::size_t i = 1; i <= errors; ++i)
            if (i < lambda.size()) delta ^= t.mul(lambda[i], synd[n - i]);
        if (delta == 0) {
            ++m;
        } else if (2 * errors <= n) {
            Poly tmp = lambda;
            const std::uint8_t scale = t.div(delta, b);
            if (lambda.size() < prev.size() + m) lambda.resize(prev.size() + m, 0);
            for (std::size_t i = 0; i < prev.size(); ++i)
                lambda[i + m] ^= t.mul(scale, prev[i]);
            errors = n + 1 - errors;
            prev = tmp;
            b = delta;
            m = 1;
        } else {
            const std::uint8_t scale = t.div(delta, b);
            if (lambda.size() < prev.size() + m) lambda.resize(prev.size() + m, 0);
            for (std::size_t i = 0; i < prev.size(); ++i)
                lambda[i + m] ^= t.mul(scale, prev[i]);
            ++m;
        }
    }
    const std::size_t nu = poly_deg(lambda);
    if (nu > kMaxCorrectable) return false;

    // Omega(x) = S(x) * Lambda(x) mod x^16.
    Poly omega(kParityBytes, 0);
    for (std::size_t i = 0; i < kParityBytes; ++i) {
        std::uint8_t acc = 0;
        for (std::size_t j = 0; j <= i && j < lambda.size(); ++j)
            acc ^= t.mul(lambda[j], synd[i - j]);
        omega[i] = acc;
    }

    // Chien search over powers that map into the received block.
    const std::size_t n = block.size();
    std::size_t roots = 0;
    for (std::size_t e = 0; e < n; ++e) {
        const std::uint8_t xinv = t.pow_alpha(static_cast<unsigned>((255 - e % 255) % 255));
        if (poly_eval(lambda, xinv, t) != 0) continue;
        ++roots;
        // Forney, fcr = 0: magnitude = X * Omega(1/X) / Lambda'(1/X).
        // Lambda'(x) over GF(2^8) keeps only the odd-degree terms of Lambda.
        std::uint8_t denom = 0;
        for (std::size_t i = 1; i < lambda.size(); i += 2) {
            std::uint8_t term = lambda[i];
            if (term != 0 && i > 1)
                term = t.mul(term, t.pow_alpha(static_cast<unsigned>(((i - 1) * ((255 - e % 255) % 255)) % 255)));
            denom ^= term;
        }
        if (denom == 0) return false;
        const std::uint8_t num = poly_eval(omega, xinv, t);
        const std::uint8_t x = t.pow_alpha(static_cast<unsigned>(e % 255));
        const std::uint8_t mag = t.mul(x, t.div(num, denom));
        block[n - 1 - e] ^= mag;
    }
    if (roots != nu) return false;

    // Paranoia: a decode that lands on a wrong codeword still zeroes the
    // syndromes, but a failed correction must not slip through.
    auto check = syndromes(block, t);
    for (auto v : check)
        if (v != 0) return false;
    return true;
}

}  // namespace

std::vector<std::uint8_t> block_parity(std::span<const std::uint8_t> block) {
    const Tables& t = tables();
    // Synthetic division of block(x) * x^16 by the monic generator polynomial.
    std::vector<std::uint8_t> buf(block.begin(), block.end());
    buf.resize(block.size() + kParityBytes, 0);
    for (std::size_t i = 0; i < block.size(); ++i) {
        const std::uint8_t coef = buf[i];
        if (coef == 0) continue;
        for (std::size_t j = 1; j <= kParityBytes; ++j)
            buf[i + j] ^= t.mul(coef, t.gen[kParityBytes - j]);
    }
    return {buf.begin() + static_cast<std::ptrdiff_t>(block.size()), buf.end()};
}

std::vector<std::uint8_t> rs_encode(std::span<const std::uint8_t> data) {
    std::vector<std::uint8_t> out;
    out.reserve(data.size() + kParityBytes * ((data.size() + kDataBytes - 1) / kDataBytes));
    std::size_t off = 0;
    while (off < data.size()) {
        const std::size_t k = std::min(kDataBytes, data.size() - off);
        auto block = data.subspan(off, k);
        out.insert(out.end(), block.begin(), block.end());
        auto parity = block_parity(block);
        out.insert(out.end(), parity.begin(), parity.end());
        off += k;
    }
    return out;
}

std::vector<std::uint8_t> rs_decode(std::span<const std::uint8_t> code) {
    if (code.empty()) return {};
    const std::size_t blocks = (code.size() + kBlockBytes - 1) / kBlockBytes;
    const std::size_t last = code.size() - (blocks - 1) * kBlockBytes;
    if (last <= kParityBytes)
        throw FormatError("byte stream length inconsistent with RS framing");

    const Tables& t = tables();
    std::vector<std::uint8_t> out;
    out.reserve(code.size() - blocks * kParityBytes);
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t off = b * kBlockBytes;
        const std::size_t n = (b + 1 == blocks) ? last : kBlockBytes;
        std::vector<std::uint8_t> block(code.begin() + static_cast<std::ptrdiff_t>(off),
                                        code.begin() + static_cast<std::ptrdiff_t>(off + n));
        if (!correct_block(block, t)) throw UncorrectableCodeword(b);
        out.insert(out.end(), block.begin(), block.end() - kParityBytes);
    }
    return out;
}

}  // namespace tubealloc::rs
