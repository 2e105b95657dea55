#include "tubealloc/alloc.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "alloc_internal.hpp"
#include "tubealloc/io_util.hpp"

namespace tubealloc::alloc {

Priority merge_priority(const CollisionSet& a, const CollisionSet& b) {
    const auto [u, i] = a.union_intersection_counts(b);
    return {static_cast<std::uint64_t>(1 + i), static_cast<std::uint64_t>(1 + u)};
}

bool cluster_feasible(std::size_t union_popcount, std::uint64_t total_bytes,
                      const capacity::CapacityParams& params) {
    const std::size_t usable = params.library_size - union_popcount;
    return total_bytes <= capacity::tube_capacity_bytes(usable, params);
}

// ---------------------------------------------------------------------------
// Pair assignment
// ---------------------------------------------------------------------------

namespace {

struct FileGroup {
    std::uint32_t file_id = 0;
    std::uint64_t bytes = 0;
    std::vector<const Chunk*> chunks;  // ascending chunk ids
};

}  // namespace

PairAssignments assign_pairs(std::span<const Chunk* const> tube_chunks,
                             std::size_t usable_primers, const AllocConfig& cfg) {
    const std::uint64_t pair_cap = capacity::pair_capacity_bytes(cfg.params);
    const std::size_t pair_budget = usable_primers / 2;

    std::map<std::uint32_t, FileGroup> by_file;
    for (const Chunk* c : tube_chunks) {
        FileGroup& g = by_file[c->file_id];
        g.file_id = c->file_id;
        g.bytes += c->byte_len;
        g.chunks.push_back(c);
    }
    std::vector<FileGroup*> order;
    order.reserve(by_file.size());
    for (auto& [_, g] : by_file) {
        std::sort(g.chunks.begin(), g.chunks.end(),
                  [](const Chunk* a, const Chunk* b) { return a->chunk_id < b->chunk_id; });
        order.push_back(&g);
    }
    // First-fit-decreasing on group bytes, file id breaking ties.
    std::sort(order.begin(), order.end(), [](const FileGroup* a, const FileGroup* b) {
        if (a->bytes != b->bytes) return a->bytes > b->bytes;
        return a->file_id < b->file_id;
    });

    std::vector<std::uint64_t> pair_used;
    PairAssignments out;
    for (FileGroup* g : order) {
        // The pairs this group occupies, in layout order, with the byte count
        // the group stores in each.
        std::vector<std::pair<std::uint32_t, std::uint64_t>> layout;
        if (g->bytes > pair_cap) {
            const std::uint64_t full = g->bytes / pair_cap;
            const std::uint64_t rem = g->bytes % pair_cap;
            for (std::uint64_t f = 0; f < full; ++f) {
                layout.push_back({static_cast<std::uint32_t>(pair_used.size()), pair_cap});
                pair_used.push_back(pair_cap);
            }
            if (rem > 0) {
                std::size_t slot = pair_used.size();
                for (std::size_t p = 0; p < pair_used.size(); ++p)
                    if (pair_used[p] + rem <= pair_cap) {
                        slot = p;
                        break;
                    }
                if (slot == pair_used.size()) pair_used.push_back(0);
                pair_used[slot] += rem;
                layout.push_back({static_cast<std::uint32_t>(slot), rem});
            }
        } else {
            std::size_t slot = pair_used.size();
            for (std::size_t p = 0; p < pair_used.size(); ++p)
                if (pair_used[p] + g->bytes <= pair_cap) {
                    slot = p;
                    break;
                }
            if (slot == pair_used.size()) pair_used.push_back(0);
            pair_used[slot] += g->bytes;
            layout.push_back({static_cast<std::uint32_t>(slot), g->bytes});
        }

        // Walk the group's chunks over the layout; a chunk crossing a layout
        // boundary appears in both pairs.
        std::vector<PairSlice> slices;
        for (const auto& [pair_id, bytes] : layout)
            slices.push_back({pair_id, {}, bytes});
        std::size_t li = 0;
        std::uint64_t left = slices.empty() ? 0 : slices[0].bytes;
        for (const Chunk* c : g->chunks) {
            std::uint64_t need = c->byte_len;
            slices[li].chunk_ids.push_back(c->chunk_id);
            while (need > left) {
                need -= left;
                ++li;
                left = slices[li].bytes;
                slices[li].chunk_ids.push_back(c->chunk_id);
            }
            left -= need;
            if (left == 0 && li + 1 < slices.size()) {
                ++li;
                left = slices[li].bytes;
            }
        }
        out[g->file_id] = std::move(slices);
    }

    if (pair_used.size() > pair_budget)
        throw PairBudgetExceeded(pair_used.size(), pair_budget);
    return out;
}

std::uint64_t retrieval_cost(const AllocationPlan& plan, std::uint32_t file_id) {
    std::uint64_t cost = 0;
    bool found = false;
    for (const auto& tube : plan.tubes) {
        const auto it = tube.pair_assignments.find(file_id);
        if (it == tube.pair_assignments.end()) continue;
        found = true;
        cost += it->second.size();
    }
    if (!found) throw UnknownFile(file_id);
    return cost;
}

// ---------------------------------------------------------------------------
// Sequential baseline
// ---------------------------------------------------------------------------

namespace detail {

SealedTube seal_cluster(const Cluster& cluster, std::span<const Chunk> chunks,
                        const std::vector<std::uint32_t>& id_to_index, const AllocConfig& cfg) {
    SealedTube tube;
    tube.chunks = cluster.members;
    std::sort(tube.chunks.begin(), tube.chunks.end());
    tube.union_popcount = cluster.union_collisions.popcount();
    tube.usable_primers = cfg.params.library_size - tube.union_popcount;
    tube.total_bytes = cluster.total_bytes;
    tube.capacity_bytes = capacity::tube_capacity_bytes(tube.usable_primers, cfg.params);
    std::vector<const Chunk*> members;
    members.reserve(tube.chunks.size());
    for (std::uint32_t id : tube.chunks) members.push_back(&chunks[id_to_index[id]]);
    tube.pair_assignments = assign_pairs(members, tube.usable_primers, cfg);
    return tube;
}

std::vector<std::uint32_t> build_id_index(std::span<const Chunk> chunks) {
    std::uint32_t max_id = 0;
    for (const auto& c : chunks) max_id = std::max(max_id, c.chunk_id);
    std::vector<std::uint32_t> id_to_index(max_id + 1, 0);
    for (std::size_t i = 0; i < chunks.size(); ++i) id_to_index[chunks[i].chunk_id] =
        static_cast<std::uint32_t>(i);
    return id_to_index;
}

void fill_plan_common(AllocationPlan& plan, std::span<const Chunk> chunks,
                      const AllocConfig& cfg) {
    plan.library_size = cfg.params.library_size;
    plan.params = cfg.params;
    plan.chunk_table.reserve(chunks.size());
    for (const auto& c : chunks) plan.chunk_table.push_back({c.chunk_id, c.file_id, c.byte_len});
    std::sort(plan.chunk_table.begin(), plan.chunk_table.end(),
              [](const PlanChunk& a, const PlanChunk& b) { return a.chunk_id < b.chunk_id; });
    plan.objective = 0;
    for (const auto& t : plan.tubes) plan.objective += t.union_popcount;
}

// Splits inputs into individually feasible chunks and quarantined ones.
std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> partition_feasible(
    std::span<const Chunk> chunks, const AllocConfig& cfg) {
    std::vector<std::uint32_t> feasible, quarantined;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        if (chunks[i].collisions.width() != cfg.params.library_size)
            throw WidthMismatch(chunks[i].collisions.width(), cfg.params.library_size);
        if (cluster_feasible(chunks[i].collisions.popcount(), chunks[i].byte_len, cfg.params))
            feasible.push_back(static_cast<std::uint32_t>(i));
        else
            quarantined.push_back(chunks[i].chunk_id);
    }
    return {std::move(feasible), std::move(quarantined)};
}

}  // namespace detail

AllocationPlan allocate_sequential(std::span<const Chunk> chunks, const AllocConfig& cfg) {
    cfg.validate();
    AllocationPlan plan;
    auto [feasible, quarantined] = detail::partition_feasible(chunks, cfg);
    plan.quarantined = std::move(quarantined);
    std::sort(feasible.begin(), feasible.end(), [&](std::uint32_t a, std::uint32_t b) {
        return chunks[a].chunk_id < chunks[b].chunk_id;
    });

    const auto id_to_index = chunks.empty() ? std::vector<std::uint32_t>{}
                                            : detail::build_id_index(chunks);
    Cluster open;
    bool has_open = false;
    const auto flush = [&]() {
        if (!has_open) return;
        SealedTube tube = detail::seal_cluster(open, chunks, id_to_index, cfg);
        tube.tube_id = static_cast<std::uint32_t>(plan.tubes.size());
        plan.tubes.push_back(std::move(tube));
        has_open = false;
    };
    for (std::uint32_t ix : feasible) {
        const Chunk& c = chunks[ix];
        if (has_open) {
            const std::size_t upc = open.union_collisions.union_count(c.collisions);
            if (cluster_feasible(upc, open.total_bytes + c.byte_len, cfg.params)) {
                open.members.push_back(c.chunk_id);
                open.union_collisions.union_with(c.collisions);
                open.total_bytes += c.byte_len;
                continue;
            }
            flush();
        }
        open.cluster_id = c.chunk_id;
        open.members = {c.chunk_id};
        open.union_collisions = c.collisions;
        open.total_bytes = c.byte_len;
        has_open = true;
    }
    flush();
    detail::fill_plan_common(plan, chunks, cfg);
    return plan;
}

// ---------------------------------------------------------------------------
// Plan file (schema "plan v1")
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json tube_to_json(const SealedTube& t) {
    json pairs = json::object();
    for (const auto& [file_id, slices] : t.pair_assignments) {
        json arr = json::array();
        for (const auto& s : slices)
            arr.push_back({{"pair_id", s.pair_id}, {"chunk_ids", s.chunk_ids}, {"bytes", s.bytes}});
        pairs[std::to_string(file_id)] = std::move(arr);
    }
    return {{"tube_id", t.tube_id},
            {"chunks", t.chunks},
            {"usable_primers", t.usable_primers},
            {"union_popcount", t.union_popcount},
            {"total_bytes", t.total_bytes},
            {"capacity_bytes", t.capacity_bytes},
            {"pair_assignments", std::move(pairs)}};
}

SealedTube tube_from_json(const json& j) {
    SealedTube t;
    t.tube_id = j.at("tube_id").get<std::uint32_t>();
    t.chunks = j.at("chunks").get<std::vector<std::uint32_t>>();
    t.usable_primers = j.at("usable_primers").get<std::size_t>();
    t.union_popcount = j.at("union_popcount").get<std::size_t>();
    t.total_bytes = j.at("total_bytes").get<std::uint64_t>();
    t.capacity_bytes = j.at("capacity_bytes").get<std::uint64_t>();
    for (const auto& [key, arr] : j.at("pair_assignments").items()) {
        std::vector<PairSlice> slices;
        for (const auto& s : arr)
            slices.push_back({s.at("pair_id").get<std::uint32_t>(),
                              s.at("chunk_ids").get<std::vector<std::uint32_t>>(),
                              s.at("bytes").get<std::uint64_t>()});
        t.pair_assignments[static_cast<std::uint32_t>(std::stoul(key))] = std::move(slices);
    }
    return t;
}

}  // namespace

std::string plan_to_json(const AllocationPlan& plan) {
    json tubes = json::array();
    for (const auto& t : plan.tubes) tubes.push_back(tube_to_json(t));
    json chunk_table = json::array();
    for (const auto& c : plan.chunk_table)
        chunk_table.push_back(
            {{"chunk_id", c.chunk_id}, {"file_id", c.file_id}, {"byte_len", c.byte_len}});
    const json j = {{"schema", "plan v1"},
                    {"library_size", plan.library_size},
                    {"capacity",
                     {{"payload_len", plan.params.payload_len},
                      {"density_bits", plan.params.density.bits},
                      {"density_bases", plan.params.density.bases},
                      {"parallel_factor", plan.params.parallel_factor},
                      {"pair_capacity_bytes", capacity::pair_capacity_bytes(plan.params)}}},
                    {"objective", plan.objective},
                    {"tubes", std::move(tubes)},
                    {"quarantined", plan.quarantined},
                    {"chunk_table", std::move(chunk_table)}};
    return j.dump(1);
}

AllocationPlan plan_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("plan file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("schema").get<std::string>() != "plan v1")
            throw FormatError("unsupported plan schema");
        AllocationPlan plan;
        plan.library_size = j.at("library_size").get<std::size_t>();
        const auto& cap = j.at("capacity");
        plan.params.payload_len = cap.at("payload_len").get<std::size_t>();
        plan.params.density.bits = cap.at("density_bits").get<std::uint32_t>();
        plan.params.density.bases = cap.at("density_bases").get<std::uint32_t>();
        plan.params.parallel_factor = cap.at("parallel_factor").get<std::uint64_t>();
        plan.params.library_size = plan.library_size;
        plan.objective = j.at("objective").get<std::uint64_t>();
        for (const auto& t : j.at("tubes")) plan.tubes.push_back(tube_from_json(t));
        plan.quarantined = j.at("quarantined").get<std::vector<std::uint32_t>>();
        for (const auto& c : j.at("chunk_table"))
            plan.chunk_table.push_back({c.at("chunk_id").get<std::uint32_t>(),
                                        c.at("file_id").get<std::uint32_t>(),
                                        c.at("byte_len").get<std::uint32_t>()});
        return plan;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed plan file: ") + e.what());
    }
}

void save_plan(const AllocationPlan& plan, const std::filesystem::path& path) {
    write_file_atomic(path, plan_to_json(plan));
}

AllocationPlan load_plan(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open '" + path.string() + "' for reading");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return plan_from_json(text);
}

}  // namespace tubealloc::alloc
