#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tubealloc {

// Base class for every error the library raises on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class IoFailure : public Error {
public:
    explicit IoFailure(const std::string& what) : Error(what) {}
};

// Parse error in a library/plan/dump file; line is 1-based, 0 if unknown.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A base sequence violates the framing or structural rules of its codec.
class MalformedSequence : public Error {
public:
    explicit MalformedSequence(const std::string& what) : Error(what) {}
};

// A Reed-Solomon codeword had more errors than the code can correct.
class UncorrectableCodeword : public Error {
public:
    explicit UncorrectableCodeword(std::size_t codeword_index)
        : Error("uncorrectable codeword at index " + std::to_string(codeword_index)),
          codeword_index_(codeword_index) {}
    std::size_t codeword_index() const noexcept { return codeword_index_; }

private:
    std::size_t codeword_index_;
};

class WidthMismatch : public Error {
public:
    WidthMismatch(std::size_t a, std::size_t b)
        : Error("bit-vector width mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class WindowTooLong : public Error {
public:
    WindowTooLong(std::size_t window, std::size_t primer_len)
        : Error("collision window " + std::to_string(window) + " exceeds primer length " +
                std::to_string(primer_len)) {}
};

class GenerationExhausted : public Error {
public:
    explicit GenerationExhausted(const std::string& what) : Error(what) {}
};

// A single chunk cannot fit any tube because its own collisions eat the capacity.
class InfeasibleChunk : public Error {
public:
    explicit InfeasibleChunk(std::uint32_t chunk_id)
        : Error("chunk " + std::to_string(chunk_id) + " is infeasible on its own"),
          chunk_id_(chunk_id) {}
    std::uint32_t chunk_id() const noexcept { return chunk_id_; }

private:
    std::uint32_t chunk_id_;
};

// Pair assignment ran out of primer pairs; indicates a feasibility accounting bug.
class PairBudgetExceeded : public Error {
public:
    PairBudgetExceeded(std::size_t needed, std::size_t available)
        : Error("pair assignment needs " + std::to_string(needed) + " pairs but only " +
                std::to_string(available) + " are available") {}
};

class UnknownFile : public Error {
public:
    explicit UnknownFile(std::uint32_t file_id)
        : Error("file " + std::to_string(file_id) + " not present in plan") {}
};

}  // namespace tubealloc
