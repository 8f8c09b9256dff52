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

#include <memory>
#include <vector>

#include "rfann/core.hpp"
#include "rfann/graph.hpp"

namespace rfann {

/// One graph snapshot paired with the rank range its members cover.
struct RangedIndex {
    RankRange range;
    GraphIndex graph;
};

enum class AnchorSide : std::uint8_t {
    LeftAnchored = 0,   // serves [1, r]
    RightAnchored = 1,  // serves [l, N], built over reversed rank order
};

struct HalfIndexParams {
    std::uint32_t base = 2;  // B: ladder ratio
    AnchorSide direction = AnchorSide::LeftAnchored;
};

// Geometric ladder of graph snapshots over ranges of length ceil(N / B^i),
// built in one incremental pass over ranks: each point is inserted exactly
// once into a live graph, and a deep clone is stored whenever the prefix
// reaches a ladder boundary. Half-bounded queries are served by the snapshot
// with the smallest superset range, always a single graph search.
class HalfIndex {
 public:
    static HalfIndex build(std::shared_ptr<const Dataset> dataset, HalfIndexParams params,
                           GraphParams graph_params);

    /// Re-assembles an index from stored parts (deserialization). Validates
    /// that every snapshot's members equal exactly the ranks of its range.
    static HalfIndex restore(std::shared_ptr<const Dataset> dataset, HalfIndexParams params,
                             GraphParams graph_params, std::vector<RangedIndex> snapshots);

    /// The distinct snapshot lengths ceil(n / base^i), i = 0.., descending.
    static std::vector<std::uint32_t> ladder_lengths(std::uint32_t n, std::uint32_t base);

    /// Snapshot with the smallest stored range containing the half-bounded
    /// range of length `needed` (the full-range snapshot always qualifies).
    const RangedIndex& select(std::uint64_t needed_length) const;

    struct QueryResult {
        std::vector<Neighbor> neighbors;
        SearchStats stats;
        RankRange snapshot_range;  // which snapshot served the query
    };

    /// Serves a query anchored at the configured side ([1, r] for
    /// LeftAnchored, [l, N] for RightAnchored); throws std::invalid_argument
    /// otherwise. Exactly one graph is consulted.
    QueryResult query(const Query& query, const SearchParams& params) const;

    std::span<const RangedIndex> snapshots() const { return snapshots_; }
    const HalfIndexParams& params() const { return params_; }
    const GraphParams& graph_params() const { return graph_params_; }
    const std::shared_ptr<const Dataset>& dataset() const { return dataset_; }
    std::uint64_t total_stored_nodes() const;

 private:
    HalfIndex(std::shared_ptr<const Dataset> dataset, HalfIndexParams params, GraphParams gp)
        : dataset_(std::move(dataset)), params_(params), graph_params_(gp) {}

    RankRange range_for_length(std::uint32_t len) const;

    std::shared_ptr<const Dataset> dataset_;
    HalfIndexParams params_;
    GraphParams graph_params_;
    std::vector<RangedIndex> snapshots_;  // strictly shrinking ranges, first is [1, N] / [1+0, N]
};

}  // namespace rfann
