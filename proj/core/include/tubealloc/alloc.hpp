#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "tubealloc/capacity.hpp"
#include "tubealloc/chunk.hpp"

namespace tubealloc::alloc {

// Tie-breaking rule used by every selection below: on equal priority /
// distance / fill ratio, prefer the candidate with the smaller resulting
// union popcount, then the lowest id (for pairs: lexicographically smallest
// (min id, max id)). This makes all three allocators pure functions of their
// inputs.
struct AllocConfig {
    std::uint32_t chunk_bytes = 4096;
    std::uint32_t k_seq_limit = 5;  // reported, not enforced during allocation
    capacity::CapacityParams params;

    void validate() const {
        if (chunk_bytes == 0) throw Error("chunk_bytes must be positive");
        if (k_seq_limit == 0) throw Error("k_seq_limit must be at least 1");
        params.validate();
    }
};

// Exact rational merge priority (1 + |A n B|) / (1 + |A u B|).
struct Priority {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline bool operator==(const Priority& a, const Priority& b) {
    return static_cast<unsigned __int128>(a.num) * b.den ==
           static_cast<unsigned __int128>(b.num) * a.den;
}
inline bool operator<(const Priority& a, const Priority& b) {
    return static_cast<unsigned __int128>(a.num) * b.den <
           static_cast<unsigned __int128>(b.num) * a.den;
}

Priority merge_priority(const CollisionSet& a, const CollisionSet& b);

// A mutable group of chunks destined for one tube. union_collisions and
// total_bytes are caches over members and stay coherent under merge/migrate.
struct Cluster {
    std::uint32_t cluster_id = 0;
    std::vector<std::uint32_t> members;  // chunk ids
    CollisionSet union_collisions;
    std::uint64_t total_bytes = 0;
};

// Feasibility: the cluster's bytes fit the capacity left by its collisions.
bool cluster_feasible(std::size_t union_popcount, std::uint64_t total_bytes,
                      const capacity::CapacityParams& params);

struct PairSlice {
    std::uint32_t pair_id = 0;
    std::vector<std::uint32_t> chunk_ids;
    std::uint64_t bytes = 0;
};

// file_id -> slices, one per primer pair holding part of that file.
using PairAssignments = std::map<std::uint32_t, std::vector<PairSlice>>;

struct SealedTube {
    std::uint32_t tube_id = 0;
    std::vector<std::uint32_t> chunks;  // ascending chunk ids
    std::size_t usable_primers = 0;
    std::size_t union_popcount = 0;
    std::uint64_t total_bytes = 0;
    std::uint64_t capacity_bytes = 0;
    PairAssignments pair_assignments;
};

struct PlanChunk {
    std::uint32_t chunk_id = 0;
    std::uint32_t file_id = 0;
    std::uint32_t byte_len = 0;
};

struct AllocationPlan {
    std::size_t library_size = 0;
    capacity::CapacityParams params;
    std::vector<SealedTube> tubes;
    std::vector<std::uint32_t> quarantined;  // chunk ids that fit no tube alone
    std::uint64_t objective = 0;             // sum of per-tube collided-union sizes
    std::vector<PlanChunk> chunk_table;      // every input chunk, ascending id
};

// Hierarchical initial clustering: starts from singletons and repeatedly
// merges the feasible pair with the highest merge priority until no feasible
// pair remains. Throws InfeasibleChunk when a singleton violates feasibility.
std::vector<Cluster> initial_clustering(std::span<const Chunk> chunks, const AllocConfig& cfg);

// Picks the cluster closest to its capacity (by fill ratio), migrates the
// highest-priority external chunks into it while they fit, seals it into a
// tube and returns the surviving clusters with their caches recomputed.
std::pair<SealedTube, std::vector<Cluster>> refine_and_seal(std::vector<Cluster> clusters,
                                                            std::span<const Chunk> chunks,
                                                            const AllocConfig& cfg);

// Collision-aware allocation: rounds of initial clustering + refinement until
// every chunk is sealed. Individually infeasible chunks are quarantined, never
// fatal.
AllocationPlan allocate(std::span<const Chunk> chunks, const AllocConfig& cfg);

// Baseline: fill tubes in chunk-id order, opening a new tube when the next
// chunk does not fit.
AllocationPlan allocate_sequential(std::span<const Chunk> chunks, const AllocConfig& cfg);

// Baseline: same pipeline as allocate, but initial clustering merges by
// minimum UPGMA distance with chunk-level distance 1 - merge_priority.
AllocationPlan allocate_upgma(std::span<const Chunk> chunks, const AllocConfig& cfg);

// Groups a tube's chunks by file and packs the groups into primer pairs,
// first-fit-decreasing by group bytes; a group larger than one pair spans
// ceil(bytes / pair_capacity) pairs. Throws PairBudgetExceeded if the tube
// would need more pairs than floor(usable_primers / 2).
PairAssignments assign_pairs(std::span<const Chunk* const> tube_chunks,
                             std::size_t usable_primers, const AllocConfig& cfg);

// Number of sequencing runs to read one file back: distinct primer pairs
// holding its chunks, summed over tubes. Throws UnknownFile.
std::uint64_t retrieval_cost(const AllocationPlan& plan, std::uint32_t file_id);

// Plan file, schema "plan v1" (JSON; see README). Deterministic serialization.
void save_plan(const AllocationPlan& plan, const std::filesystem::path& path);
AllocationPlan load_plan(const std::filesystem::path& path);
std::string plan_to_json(const AllocationPlan& plan);
AllocationPlan plan_from_json(const std::string& text);

}  // namespace tubealloc::alloc
