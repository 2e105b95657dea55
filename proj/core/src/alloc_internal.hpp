#pragma once

#include <span>
#include <vector>

#include "tubealloc/alloc.hpp"

namespace tubealloc::alloc::detail {

SealedTube seal_cluster(const Cluster& cluster, std::span<const Chunk> chunks,
                        const std::vector<std::uint32_t>& id_to_index, const AllocConfig& cfg);

std::vector<std::uint32_t> build_id_index(std::span<const Chunk> chunks);

void fill_plan_common(AllocationPlan& plan, std::span<const Chunk> chunks,
                      const AllocConfig& cfg);

std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> partition_feasible(
    std::span<const Chunk> chunks, const AllocConfig& cfg);

}  // namespace tubealloc::alloc::detail
