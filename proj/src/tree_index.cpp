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

#include "rfann/tree_index.hpp"

#include <algorithm>
#include <stdexcept>

namespace rfann {

double
TreeParams::resolved_c() const {
    if (elastic.c > 0.0) {
        return elastic.c;
    }
    return 1.0 / static_cast<double>(fanout);
}

std::vector<RankRange>
TreeIndex::child_split(RankRange range, std::uint32_t fanout) {
    const std::uint64_t len = range.length();
    const std::uint64_t parts = std::min<std::uint64_t>(fanout, len);
    std::vector<RankRange> children;
    children.reserve(parts);
    Rank next = range.l;
    for (std::uint64_t i = 0; i < parts; ++i) {
        const std::uint64_t size = len / parts + (i < len % parts ? 1 : 0);
        children.push_back({next, static_cast<Rank>(next + size - 1)});
        next = static_cast<Rank>(next + size);
    }
    return children;
}

const GraphIndex*
TreeIndex::build_rec(RankRange range) {
    if (is_unindexed(range)) {
        return nullptr;
    }
    const std::vector<RankRange> children = child_split(range, params_.fanout);
    std::vector<const GraphIndex*> child_graphs;
    child_graphs.reserve(children.size());
    for (const RankRange& child : children) {
        child_graphs.push_back(build_rec(child));
    }

    GraphParams gp = graph_params_;
    gp.seed = fnv1a(&range, sizeof(range), graph_params_.seed);  // decorrelate level draws per range

    GraphIndex graph = child_graphs.front() != nullptr ? child_graphs.front()->clone()
                                                       : GraphIndex(gp);
    if (child_graphs.front() == nullptr) {
        for (Rank p = children.front().l; p <= children.front().r; ++p) {
            graph.insert(*dataset_, p);
            ++build_insert_count_;
        }
    }
    // extend the leftmost child's graph with every rank to its right
    for (Rank p = children.front().r + 1; p <= range.r; ++p) {
        graph.insert(*dataset_, p);
        ++build_insert_count_;
    }
    auto [it, inserted] = nodes_.emplace(range, std::move(graph));
    (void)inserted;
    return &it->second;
}

TreeIndex
TreeIndex::build(std::shared_ptr<const Dataset> dataset, TreeParams params,
                 GraphParams graph_params) {
    if (!dataset) {
        throw std::invalid_argument("tree index requires a dataset");
    }
    if (params.fanout < 2) {
        throw std::invalid_argument("fanout must be >= 2");
    }
    if (params.leaf_threshold < 1) {
        throw std::invalid_argument("leaf threshold must be >= 1");
    }
    const double c = params.resolved_c();
    if (c <= 0.0 || c > 1.0) {
        throw std::invalid_argument("elastic threshold must lie in (0, 1]");
    }
    params.elastic.c = c;

    TreeIndex index(std::move(dataset), params, graph_params);
    index.build_rec(index.dataset_->full_range());
    return index;
}

TreeIndex
TreeIndex::restore(std::shared_ptr<const Dataset> dataset, TreeParams params,
                   GraphParams graph_params, std::map<RankRange, GraphIndex> nodes,
                   std::uint64_t build_insert_count) {
    if (!dataset) {
        throw std::invalid_argument("tree index requires a dataset");
    }
    params.elastic.c = params.resolved_c();
    TreeIndex index(std::move(dataset), params, graph_params);
    for (const auto& [range, graph] : nodes) {
        graph.validate_structure();
        const std::vector<Rank> members = graph.members_sorted();
        if (members.size() != range.length()) {
            throw std::runtime_error("stored node member count does not match its range");
        }
        for (std::size_t j = 0; j < members.size(); ++j) {
            if (members[j] != range.l + j) {
                throw std::runtime_error("stored node members do not match its range");
            }
        }
    }
    index.nodes_ = std::move(nodes);
    index.build_insert_count_ = build_insert_count;
    return index;
}

void
TreeIndex::query_rec(RankRange node_range, RankRange fragment, const Query& query,
                     const SearchParams& params, Accum& accum) const {
    if (is_unindexed(node_range)) {
        // exact linear scan of the clipped fragment
        std::vector<Neighbor> found;
        found.reserve(fragment.length());
        for (Rank p = fragment.l; p <= fragment.r; ++p) {
            found.push_back({p, euclidean_distance(query.vec, dataset_->point(p))});
            accum.stats.dist_computations += 1;
        }
        std::sort(found.begin(), found.end(), [](const Neighbor& a, const Neighbor& b) {
            return a.distance < b.distance || (a.distance == b.distance && a.position < b.position);
        });
        if (found.size() > query.k) {
            found.resize(query.k);
        }
        accum.fragments.push_back(std::move(found));
        return;
    }

    const double factor =
        static_cast<double>(fragment.length()) / static_cast<double>(node_range.length());
    if (factor >= params_.elastic.c) {
        const GraphIndex& graph = nodes_.at(node_range);
        Query sub{query.vec, fragment, query.k};
        SearchResult res = graph.search_rf_post(*dataset_, sub, params);
        accum.stats.merge(res.stats);
        accum.consulted.push_back({node_range, fragment});
        accum.fragments.push_back(std::move(res.neighbors));
        return;
    }

    for (const RankRange& child : child_split(node_range, params_.fanout)) {
        if (child.r < fragment.l || child.l > fragment.r) {
            continue;
        }
        const RankRange clipped{std::max(child.l, fragment.l), std::min(child.r, fragment.r)};
        query_rec(child, clipped, query, params, accum);
    }
}

TreeIndex::QueryResult
TreeIndex::query(const Query& query, const SearchParams& params) const {
    const Rank n = static_cast<Rank>(dataset_->size());
    if (query.range.l < 1 || query.range.l > query.range.r || query.range.r > n) {
        throw std::invalid_argument("query range out of bounds");
    }
    if (query.k < 1) {
        throw std::invalid_argument("query k must be >= 1");
    }

    Accum accum;
    query_rec(dataset_->full_range(), query.range, query, params, accum);

    std::vector<Neighbor> merged;
    for (std::vector<Neighbor>& frag : accum.fragments) {
        merged.insert(merged.end(), frag.begin(), frag.end());
    }
    std::sort(merged.begin(), merged.end(), [](const Neighbor& a, const Neighbor& b) {
        return a.distance < b.distance || (a.distance == b.distance && a.position < b.position);
    });
    // fragments are disjoint by construction; dedup is a guard, not a filter
    merged.erase(std::unique(merged.begin(), merged.end(),
                             [](const Neighbor& a, const Neighbor& b) {
                                 return a.position == b.position;
                             }),
                 merged.end());
    if (merged.size() > query.k) {
        merged.resize(query.k);
    }
    return QueryResult{std::move(merged), accum.stats, std::move(accum.consulted)};
}

std::uint64_t
TreeIndex::count_stored_nodes() const {
    std::uint64_t total = 0;
    for (const auto& [range, graph] : nodes_) {
        total += graph.size();
    }
    return total;
}

std::uint32_t
TreeIndex::indexed_level_count() const {
    std::uint32_t levels = 0;
    RankRange range = dataset_->full_range();
    while (!is_unindexed(range)) {
        ++levels;
        range = child_split(range, params_.fanout).front();
    }
    return levels;
}

}  // namespace rfann
