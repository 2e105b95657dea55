#include <algorithm>
#include <optional>

#include "alloc_internal.hpp"

namespace tubealloc::alloc {

namespace {

enum class Linkage { MergePriority, Upgma };

// One cluster during a clustering round. Nodes never move; merging folds the
// second node into the first and marks it dead. The tie-break id of a merged
// node is the minimum over the ids it absorbed.
struct Node {
    bool alive = false;
    std::uint32_t id = 0;
    std::vector<std::uint32_t> members;  // indices into the chunks span
    CollisionSet unioned;
    std::uint64_t bytes = 0;
};

struct Candidate {
    bool valid = false;
    Priority pri{0, 1};
    float dist = 0.f;
    std::size_t upc = 0;
    std::uint32_t partner = 0;
    std::uint32_t id_lo = 0, id_hi = 0;
};

// Greedy hierarchical clustering with best-partner maintenance: O(n) memory,
// recomputation limited to the merged cluster against the others plus full
// rescans of nodes whose recorded partner was consumed.
class ClusterEngine {
public:
    ClusterEngine(std::span<const Chunk> chunks, std::span<const std::uint32_t> active,
                  const AllocConfig& cfg, Linkage linkage)
        : chunks_(chunks), cfg_(cfg), linkage_(linkage) {
        nodes_.resize(active.size());
        for (std::size_t i = 0; i < active.size(); ++i) {
            const Chunk& c = chunks[active[i]];
            Node& n = nodes_[i];
            n.alive = true;
            n.id = c.chunk_id;
            n.members = {active[i]};
            n.unioned = c.collisions;
            n.bytes = c.byte_len;
            if (!cluster_feasible(n.unioned.popcount(), n.bytes, cfg.params))
                throw InfeasibleChunk(c.chunk_id);
        }
        if (linkage == Linkage::Upgma) init_distances();
        best_.assign(nodes_.size(), {});
        for (std::size_t i = 0; i < nodes_.size(); ++i) rescan(i);
    }

    std::vector<Cluster> run() {
        while (true) {
            std::size_t pick = nodes_.size();
            for (std::size_t i = 0; i < nodes_.size(); ++i) {
                if (!nodes_[i].alive || !best_[i].valid) continue;
                if (pick == nodes_.size() || better(best_[i], best_[pick])) pick = i;
            }
            if (pick == nodes_.size()) break;
            merge(pick, best_[pick].partner);
        }
        std::vector<Cluster> out;
        for (const Node& n : nodes_) {
            if (!n.alive) continue;
            Cluster c;
            c.cluster_id = n.id;
            c.members.reserve(n.members.size());
            for (std::uint32_t ix : n.members) c.members.push_back(chunks_[ix].chunk_id);
            std::sort(c.members.begin(), c.members.end());
            c.union_collisions = n.unioned;
            c.total_bytes = n.bytes;
            out.push_back(std::move(c));
        }
        std::sort(out.begin(), out.end(),
                  [](const Cluster& a, const Cluster& b) { return a.cluster_id < b.cluster_id; });
        return out;
    }

private:
    // Ordering of merge candidates; `a` strictly preferred over `b`.
    bool better(const Candidate& a, const Candidate& b) const {
        if (linkage_ == Linkage::MergePriority) {
            if (!(a.pri == b.pri)) return b.pri < a.pri;
        } else {
            if (a.dist != b.dist) return a.dist < b.dist;
        }
        if (a.upc != b.upc) return a.upc < b.upc;
        if (a.id_lo != b.id_lo) return a.id_lo < b.id_lo;
        return a.id_hi < b.id_hi;
    }

    std::optional<Candidate> consider(std::size_t k, std::size_t j) const {
        const Node& a = nodes_[k];
        const Node& b = nodes_[j];
        const auto [u, inter] = a.unioned.union_intersection_counts(b.unioned);
        if (!cluster_feasible(u, a.bytes + b.bytes, cfg_.params)) return std::nullopt;
        Candidate c;
        c.valid = true;
        if (linkage_ == Linkage::MergePriority)
            c.pri = {static_cast<std::uint64_t>(1 + inter), static_cast<std::uint64_t>(1 + u)};
        else
            c.dist = dist_at(k, j);
        c.upc = u;
        c.partner = static_cast<std::uint32_t>(j);
        c.id_lo = std::min(a.id, b.id);
        c.id_hi = std::max(a.id, b.id);
        return c;
    }

    void rescan(std::size_t k) {
        best_[k] = {};
        if (!nodes_[k].alive) return;
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            if (j == k || !nodes_[j].alive) continue;
            if (auto c = consider(k, j); c && (!best_[k].valid || better(*c, best_[k])))
                best_[k] = *c;
        }
    }

    void merge(std::size_t a, std::size_t b) {
        Node& na = nodes_[a];
        Node& nb = nodes_[b];
        if (linkage_ == Linkage::Upgma) fold_distances(a, b);
        na.id = std::min(na.id, nb.id);
        na.members.insert(na.members.end(), nb.members.begin(), nb.members.end());
        na.unioned.union_with(nb.unioned);
        na.bytes += nb.bytes;
        nb = Node{};  // dead

        for (std::size_t k = 0; k < nodes_.size(); ++k) {
            if (!nodes_[k].alive || k == a) continue;
            Candidate& cur = best_[k];
            if (cur.valid && (cur.partner == a || cur.partner == b)) {
                rescan(k);
            } else if (auto c = consider(k, a); c && (!cur.valid || better(*c, cur))) {
                cur = *c;
            }
        }
        rescan(a);
    }

    // --- UPGMA distance bookkeeping (Lance-Williams average linkage) ---

    std::size_t tri_index(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        return j * (j - 1) / 2 + i;
    }
    float dist_at(std::size_t i, std::size_t j) const { return dist_[tri_index(i, j)]; }

    void init_distances() {
        const std::size_t n = nodes_.size();
        dist_.assign(n * (n - 1) / 2, 0.f);
        sizes_.assign(n, 1);
        for (std::size_t j = 1; j < n; ++j)
            for (std::size_t i = 0; i < j; ++i) {
                const auto [u, inter] =
                    nodes_[i].unioned.union_intersection_counts(nodes_[j].unioned);
                // d = 1 - (1+inter)/(1+u) = (u - inter) / (1 + u)
                dist_[tri_index(i, j)] =
                    static_cast<float>(u - inter) / static_cast<float>(1 + u);
            }
    }

    void fold_distances(std::size_t a, std::size_t b) {
        const float wa = static_cast<float>(sizes_[a]);
        const float wb = static_cast<float>(sizes_[b]);
        for (std::size_t k = 0; k < nodes_.size(); ++k) {
            if (!nodes_[k].alive || k == a || k == b) continue;
            dist_[tri_index(k, a)] =
                (wa * dist_at(k, a) + wb * dist_at(k, b)) / (wa + wb);
        }
        sizes_[a] += sizes_[b];
    }

    std::span<const Chunk> chunks_;
    const AllocConfig& cfg_;
    Linkage linkage_;
    std::vector<Node> nodes_;
    std::vector<Candidate> best_;
    std::vector<float> dist_;
    std::vector<std::uint32_t> sizes_;
};

std::vector<Cluster> run_clustering(std::span<const Chunk> chunks,
                                    std::span<const std::uint32_t> active, const AllocConfig& cfg,
                                    Linkage linkage) {
    if (active.empty()) return {};
    return ClusterEngine(chunks, active, cfg, linkage).run();
}

// Fill-ratio selection for refinement: pick the cluster closest to capacity.
std::size_t select_fill_target(const std::vector<Cluster>& clusters,
                               const capacity::CapacityParams& params) {
    std::size_t pick = 0;
    std::uint64_t pick_cap = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const std::uint64_t cap = capacity::tube_capacity_bytes(
            params.library_size - clusters[i].union_collisions.popcount(), params);
        if (i == 0) {
            pick_cap = cap;
            continue;
        }
        const Cluster& a = clusters[i];
        const Cluster& p = clusters[pick];
        const auto lhs = static_cast<unsigned __int128>(a.total_bytes) * pick_cap;
        const auto rhs = static_cast<unsigned __int128>(p.total_bytes) * cap;
        bool take = false;
        if (lhs != rhs) {
            take = lhs > rhs;
        } else if (a.union_collisions.popcount() != p.union_collisions.popcount()) {
            take = a.union_collisions.popcount() < p.union_collisions.popcount();
        } else {
            take = a.cluster_id < p.cluster_id;
        }
        if (take) {
            pick = i;
            pick_cap = cap;
        }
    }
    return pick;
}

AllocationPlan allocate_with(std::span<const Chunk> chunks, const AllocConfig& cfg,
                             Linkage linkage) {
    cfg.validate();
    AllocationPlan plan;
    auto [active, quarantined] = detail::partition_feasible(chunks, cfg);
    plan.quarantined = std::move(quarantined);
    const auto id_to_index =
        chunks.empty() ? std::vector<std::uint32_t>{} : detail::build_id_index(chunks);

    while (!active.empty()) {
        auto clusters = run_clustering(chunks, active, cfg, linkage);
        auto [tube, rest] = refine_and_seal(std::move(clusters), chunks, cfg);
        tube.tube_id = static_cast<std::uint32_t>(plan.tubes.size());
        plan.tubes.push_back(std::move(tube));
        active.clear();
        for (const Cluster& c : rest)
            for (std::uint32_t id : c.members) active.push_back(id_to_index[id]);
        std::sort(active.begin(), active.end());
    }
    detail::fill_plan_common(plan, chunks, cfg);
    return plan;
}

}  // namespace

std::vector<Cluster> initial_clustering(std::span<const Chunk> chunks, const AllocConfig& cfg) {
    cfg.validate();
    std::vector<std::uint32_t> active(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) active[i] = static_cast<std::uint32_t>(i);
    return run_clustering(chunks, active, cfg, Linkage::MergePriority);
}

std::pair<SealedTube, std::vector<Cluster>> refine_and_seal(std::vector<Cluster> clusters,
                                                            std::span<const Chunk> chunks,
                                                            const AllocConfig& cfg) {
    if (clusters.empty()) throw Error("refine_and_seal needs at least one cluster");
    const auto id_to_index = detail::build_id_index(chunks);
    const std::size_t target_ix = select_fill_target(clusters, cfg.params);
    Cluster target = std::move(clusters[target_ix]);
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(target_ix));

    // Migrate the external chunk with the highest merge priority against the
    // target until nothing more fits.
    while (true) {
        bool found = false;
        std::size_t best_cluster = 0, best_pos = 0;
        Priority best_pri{0, 1};
        std::size_t best_upc = 0;
        std::uint32_t best_id = 0;
        for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
            for (std::size_t mi = 0; mi < clusters[ci].members.size(); ++mi) {
                const Chunk& c = chunks[id_to_index[clusters[ci].members[mi]]];
                const auto [u, inter] =
                    target.union_collisions.union_intersection_counts(c.collisions);
                if (!cluster_feasible(u, target.total_bytes + c.byte_len, cfg.params)) continue;
                const Priority pri{static_cast<std::uint64_t>(1 + inter),
                                   static_cast<std::uint64_t>(1 + u)};
                bool take = !found;
                if (found) {
                    if (!(pri == best_pri))
                        take = best_pri < pri;
                    else if (u != best_upc)
                        take = u < best_upc;
                    else
                        take = c.chunk_id < best_id;
                }
                if (take) {
                    found = true;
                    best_cluster = ci;
                    best_pos = mi;
                    best_pri = pri;
                    best_upc = u;
                    best_id = c.chunk_id;
                }
            }
        }
        if (!found) break;

        Cluster& donor = clusters[best_cluster];
        const std::uint32_t chunk_id = donor.members[best_pos];
        const Chunk& c = chunks[id_to_index[chunk_id]];
        target.members.push_back(chunk_id);
        target.union_collisions.union_with(c.collisions);
        target.total_bytes += c.byte_len;

        donor.members.erase(donor.members.begin() + static_cast<std::ptrdiff_t>(best_pos));
        if (donor.members.empty()) {
            clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_cluster));
        } else {
            // Removing a member can shrink the union; recompute the caches.
            donor.union_collisions = CollisionSet(cfg.params.library_size);
            donor.total_bytes = 0;
            for (std::uint32_t id : donor.members) {
                const Chunk& mc = chunks[id_to_index[id]];
                donor.union_collisions.union_with(mc.collisions);
                donor.total_bytes += mc.byte_len;
            }
        }
    }

    SealedTube tube = detail::seal_cluster(target, chunks, id_to_index, cfg);
    return {std::move(tube), std::move(clusters)};
}

AllocationPlan allocate(std::span<const Chunk> chunks, const AllocConfig& cfg) {
    return allocate_with(chunks, cfg, Linkage::MergePriority);
}

AllocationPlan allocate_upgma(std::span<const Chunk> chunks, const AllocConfig& cfg) {
    return allocate_with(chunks, cfg, Linkage::Upgma);
}

}  // namespace tubealloc::alloc
