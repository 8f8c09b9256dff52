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

#include <map>
#include <memory>
#include <vector>

#include "rfann/core.hpp"
#include "rfann/graph.hpp"

namespace rfann {

struct TreeParams {
    std::uint32_t fanout = 2;          // f: children per segment-tree node
    std::uint32_t leaf_threshold = 256;  // l: ranges with r - l < l stay unindexed
    ElasticPolicy elastic;             // c; 0 resolves to 1 / fanout

    double resolved_c() const;
};

// Fanout-f segment tree of graph snapshots rooted at [1, N]. A parent's graph
// is obtained by deep-cloning its leftmost child's graph (building that
// subrange fresh when the child is unindexed) and inserting the remaining
// ranks of the range, so each indexed level above the deepest costs roughly
// half its nodes in insert operations. Queries either hit one stored graph
// whose range is a superset of the query range within the elastic threshold,
// or split once at a child boundary into two edge-anchored fragments; at most
// two graphs are ever searched, with sub-threshold fragments served by exact
// linear scans.
class TreeIndex {
 public:
    static TreeIndex build(std::shared_ptr<const Dataset> dataset, TreeParams params,
                           GraphParams graph_params);

    static TreeIndex restore(std::shared_ptr<const Dataset> dataset, TreeParams params,
                             GraphParams graph_params, std::map<RankRange, GraphIndex> nodes,
                             std::uint64_t build_insert_count);

    /// Near-equal contiguous split into min(fanout, length) parts; earlier
    /// parts take the remainder, so sizes differ by at most one.
    static std::vector<RankRange> child_split(RankRange range, std::uint32_t fanout);

    struct ConsultedGraph {
        RankRange node_range;  // stored range whose graph was searched
        RankRange fragment;    // clipped query fragment it served
    };

    struct QueryResult {
        std::vector<Neighbor> neighbors;
        SearchStats stats;
        std::vector<ConsultedGraph> consulted;
    };

    /// Recursive range decomposition: sub-threshold node ranges fall back to
    /// an exact linear scan of the clipped fragment; a node whose range is a
    /// superset of the fragment with elastic factor >= c serves it with one
    /// POST graph search; otherwise the fragment splits at child boundaries
    /// and partial results are merged by (distance, position).
    QueryResult query(const Query& query, const SearchParams& params) const;

    const std::map<RankRange, GraphIndex>& nodes() const { return nodes_; }
    const TreeParams& params() const { return params_; }
    const GraphParams& graph_params() const { return graph_params_; }
    const std::shared_ptr<const Dataset>& dataset() const { return dataset_; }

    std::uint64_t build_insert_count() const { return build_insert_count_; }
    std::uint64_t count_stored_nodes() const;
    std::uint32_t indexed_level_count() const;

 private:
    TreeIndex(std::shared_ptr<const Dataset> dataset, TreeParams params, GraphParams gp)
        : dataset_(std::move(dataset)), params_(params), graph_params_(gp) {}

    bool is_unindexed(RankRange range) const {
        return range.r - range.l < params_.leaf_threshold;
    }

    const GraphIndex* build_rec(RankRange range);

    struct Accum {
        std::vector<std::vector<Neighbor>> fragments;
        SearchStats stats;
        std::vector<ConsultedGraph> consulted;
    };
    void query_rec(RankRange node_range, RankRange fragment, const Query& query,
                   const SearchParams& params, Accum& accum) const;

    std::shared_ptr<const Dataset> dataset_;
    TreeParams params_;
    GraphParams graph_params_;
    std::map<RankRange, GraphIndex> nodes_;
    std::uint64_t build_insert_count_ = 0;
};

}  // namespace rfann
