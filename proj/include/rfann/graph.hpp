// Copyright 2026-present the rfann project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "rfann/core.hpp"

namespace rfann {

struct GraphParams {
    std::uint32_t max_degree = 16;        // M: out-degree cap per node per layer (2M at layer 0)
    std::uint32_t ef_construction = 200;  // candidate-list width during insert
    double level_scale = 0.0;             // 0 resolves to 1 / ln(M)
    std::uint64_t seed = 0x9e3779b97f4a7c15ull;

    double resolved_level_scale() const;
};

enum class FilterKind : std::uint8_t { None, Pre, Post };

/// NONE traverses and admits everything. PRE drops out-of-range neighbors
/// before they enter the candidate queue. POST traverses out-of-range nodes
/// but keeps them out of the result queue.
struct FilterMode {
    FilterKind kind = FilterKind::None;
    RankRange range;

    static FilterMode none() { return {FilterKind::None, {}}; }
    static FilterMode pre(RankRange r) { return {FilterKind::Pre, r}; }
    static FilterMode post(RankRange r) { return {FilterKind::Post, r}; }

    bool admits_result(Rank p) const { return kind == FilterKind::None || range.contains(p); }
    bool allows_expansion(Rank p) const { return kind != FilterKind::Pre || range.contains(p); }
};

struct SearchStats {
    std::uint64_t dist_computations = 0;
    std::uint64_t hops = 0;
    std::uint32_t graphs_consulted = 0;
    std::uint32_t beam_restarts = 0;

    void merge(const SearchStats& other) {
        dist_computations += other.dist_computations;
        hops += other.hops;
        graphs_consulted += other.graphs_consulted;
        beam_restarts += other.beam_restarts;
    }

    friend bool operator==(const SearchStats&, const SearchStats&) = default;
};

struct Neighbor {
    Rank position = 0;
    double distance = 0.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct SearchResult {
    std::vector<Neighbor> neighbors;  // ascending by (distance, position)
    SearchStats stats;
    bool exhausted = false;  // candidate queue emptied after visiting every member
};

// Edge-occlusion rule: scan candidates by ascending distance to the base
// point; keep c iff dist(c, base) < dist(c, s) for every already-kept s;
// stop once `cap` neighbors are kept. Distance ties keep the earlier
// candidate (the sort is stable).
std::vector<Rank> occlude_neighbors(const Dataset& dataset, std::span<const float> base,
                                    std::vector<Neighbor> candidates, std::size_t cap);

// Hierarchical navigable proximity graph over dataset positions. Layer levels
// are sampled geometrically; neighbors are chosen by beam descent plus edge
// occlusion, with reverse edges re-pruned on overflow. Single writer during
// construction; immutable and safe for concurrent search afterwards.
class GraphIndex {
 public:
    explicit GraphIndex(GraphParams params);

    struct NodeSpec {
        Rank position = 0;
        int level = 0;
        std::vector<std::vector<Rank>> layers;  // layers[0..level], out-neighbor positions
    };

    /// Rebuilds a graph from explicit adjacency (deserialization, hand-built
    /// fixtures). Validates structural invariants; throws on violation.
    static GraphIndex from_parts(GraphParams params, std::vector<NodeSpec> nodes, Rank entry_position);

    void insert(const Dataset& dataset, Rank position);

    /// One graph search per the NONE/PRE/POST traversal rules: min-heap
    /// candidate queue against a max-heap result queue capped at m, stopping
    /// once the queue is full and the best candidate is farther than the
    /// worst result. Upper layers are descended greedily (beam 1) to seed the
    /// base layer; the base beam starts from both that seed and the entry
    /// point. Heap ties break toward smaller positions.
    SearchResult search(const Dataset& dataset, std::span<const float> query, std::uint32_t m,
                        const FilterMode& filter) const;

    /// POST search that returns up to k in-range points, restarting with a
    /// beam grown by params.expansion_factor (up to params.beam_cap, itself
    /// clamped to the member count) while fewer than k in-range points have
    /// been found and the graph is not exhausted. stats.graphs_consulted is 1.
    SearchResult search_rf_post(const Dataset& dataset, const Query& query,
                                const SearchParams& params) const;

    GraphIndex clone() const { return *this; }

    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    bool contains(Rank position) const { return slot_of_.count(position) > 0; }
    int max_level() const { return max_level_; }
    Rank entry_point() const;  // 0 when empty
    const GraphParams& params() const { return params_; }
    std::uint32_t degree_cap(int layer) const {
        return layer == 0 ? 2 * params_.max_degree : params_.max_degree;
    }

    std::vector<Rank> members_sorted() const;
    int level_of(Rank position) const;
    const std::vector<std::vector<Rank>>& layers_of(Rank position) const;

    /// Members reachable from the entry point via base-layer edges (the
    /// oracle behind the exhaustive-beam exactness checks).
    std::size_t reachable_members() const;

    /// Throws std::runtime_error on any violated structural invariant:
    /// degree caps, edge closure, self-loops, duplicate edges, entry membership.
    void validate_structure() const;

 private:
    struct Node {
        Rank position;
        int level;
        std::vector<std::vector<Rank>> layers;
    };

    int sample_level();
    std::uint32_t slot(Rank position) const { return slot_of_.at(position); }

    // Greedy beam-1 walk at `layer` starting from `start`; returns the slot of
    // the local minimum w.r.t. `query`.
    std::uint32_t greedy_step_down(const Dataset& dataset, std::span<const float> query,
                                   std::uint32_t start, double& start_dist, int layer,
                                   SearchStats& stats) const;

    struct LayerSearch {
        std::vector<Neighbor> found;  // ascending (distance, position)
        bool exhausted = false;
    };
    LayerSearch beam_search_layer(const Dataset& dataset, std::span<const float> query,
                                  std::span<const std::uint32_t> seed_slots, std::uint32_t m,
                                  int layer, const FilterMode& filter, SearchStats& stats) const;

    GraphParams params_;
    std::vector<Node> nodes_;
    std::unordered_map<Rank, std::uint32_t> slot_of_;
    std::vector<std::uint32_t> layer_population_;  // node count per layer
    std::uint32_t entry_slot_;
    int max_level_ = -1;
    std::mt19937_64 rng_;

    static constexpr std::uint32_t kNoSlot = 0xFFFFFFFFu;
};

}  // namespace rfann
