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

#include "rfann/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_set>

namespace rfann {

namespace {

// top = smallest (distance, position)
struct MinOrder {
    bool operator()(const Neighbor& a, const Neighbor& b) const {
        return a.distance > b.distance || (a.distance == b.distance && a.position > b.position);
    }
};

// top = largest (distance, position); popping evicts the worst, so distance
// ties keep the smaller position.
struct MaxOrder {
    bool operator()(const Neighbor& a, const Neighbor& b) const {
        return a.distance < b.distance || (a.distance == b.distance && a.position < b.position);
    }
};

using MinHeap = std::priority_queue<Neighbor, std::vector<Neighbor>, MinOrder>;
using MaxHeap = std::priority_queue<Neighbor, std::vector<Neighbor>, MaxOrder>;

}  // namespace

double
GraphParams::resolved_level_scale() const {
    if (level_scale > 0.0) {
        return level_scale;
    }
    return 1.0 / std::log(static_cast<double>(std::max<std::uint32_t>(max_degree, 2)));
}

std::vector<Rank>
occlude_neighbors(const Dataset& dataset, std::span<const float> /*base*/,
                  std::vector<Neighbor> candidates, std::size_t cap) {
    // candidate.distance already carries dist(candidate, base)
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Neighbor& a, const Neighbor& b) { return a.distance < b.distance; });
    std::vector<Rank> kept;
    for (const Neighbor& cand : candidates) {
        if (kept.size() >= cap) {
            break;
        }
        bool occluded = false;
        for (Rank s : kept) {
            if (euclidean_distance(dataset.point(cand.position), dataset.point(s)) <= cand.distance) {
                occluded = true;
                break;
            }
        }
        if (!occluded) {
            kept.push_back(cand.position);
        }
    }
    return kept;
}

GraphIndex::GraphIndex(GraphParams params)
    : params_(params), entry_slot_(kNoSlot), rng_(params.seed) {
    if (params_.max_degree < 2) {
        throw std::invalid_argument("graph max_degree must be >= 2");
    }
    if (params_.ef_construction < params_.max_degree) {
        throw std::invalid_argument("ef_construction must be >= max_degree");
    }
}

int
GraphIndex::sample_level() {
    // uniform in (0, 1], so -log(u) stays finite
    const double u = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
    const int level = static_cast<int>(-std::log(u) * params_.resolved_level_scale());
    return std::min(level, 30);
}

Rank
GraphIndex::entry_point() const {
    return nodes_.empty() ? 0 : nodes_[entry_slot_].position;
}

std::vector<Rank>
GraphIndex::members_sorted() const {
    std::vector<Rank> out;
    out.reserve(nodes_.size());
    for (const Node& n : nodes_) {
        out.push_back(n.position);
    }
    std::sort(out.begin(), out.end());
    return out;
}

int
GraphIndex::level_of(Rank position) const {
    return nodes_[slot(position)].level;
}

const std::vector<std::vector<Rank>>&
GraphIndex::layers_of(Rank position) const {
    return nodes_[slot(position)].layers;
}

std::uint32_t
GraphIndex::greedy_step_down(const Dataset& dataset, std::span<const float> query,
                             std::uint32_t start, double& start_dist, int layer,
                             SearchStats& stats) const {
    std::uint32_t cur = start;
    double best = start_dist;
    while (true) {
        stats.hops += 1;
        std::uint32_t next = cur;
        double next_dist = best;
        for (Rank nb : nodes_[cur].layers[layer]) {
            const double d = euclidean_distance(query, dataset.point(nb));
            stats.dist_computations += 1;
            if (d < next_dist) {
                next_dist = d;
                next = slot(nb);
            }
        }
        if (next == cur) {
            break;
        }
        cur = next;
        best = next_dist;
    }
    start_dist = best;
    return cur;
}

GraphIndex::LayerSearch
GraphIndex::beam_search_layer(const Dataset& dataset, std::span<const float> query,
                              std::span<const std::uint32_t> seed_slots, std::uint32_t m,
                              int layer, const FilterMode& filter, SearchStats& stats) const {
    MinHeap candidates;
    MaxHeap results;
    std::vector<std::uint8_t> visited(dataset.size() + 1, 0);
    std::size_t visited_count = 0;

    auto admit = [&](Rank pos, double d) {
        if (!filter.admits_result(pos)) {
            return;
        }
        results.push({pos, d});
        if (results.size() > m) {
            results.pop();
        }
    };

    for (std::uint32_t s : seed_slots) {
        const Rank pos = nodes_[s].position;
        if (visited[pos]) {
            continue;
        }
        visited[pos] = 1;
        ++visited_count;
        const double d = euclidean_distance(query, dataset.point(pos));
        stats.dist_computations += 1;
        candidates.push({pos, d});
        admit(pos, d);
    }

    while (!candidates.empty()) {
        const Neighbor u = candidates.top();
        if (results.size() == m && u.distance > results.top().distance) {
            break;
        }
        candidates.pop();
        stats.hops += 1;
        for (Rank v : nodes_[slot(u.position)].layers[layer]) {
            if (visited[v]) {
                continue;
            }
            visited[v] = 1;
            ++visited_count;
            if (!filter.allows_expansion(v)) {
                continue;  // PRE: dropped before any distance work
            }
            const double d = euclidean_distance(query, dataset.point(v));
            stats.dist_computations += 1;
            candidates.push({v, d});
            admit(v, d);
        }
    }

    LayerSearch out;
    out.exhausted = candidates.empty() && visited_count == layer_population_[layer];
    out.found.resize(results.size());
    for (std::size_t i = results.size(); i-- > 0;) {
        out.found[i] = results.top();
        results.pop();
    }
    return out;
}

void
GraphIndex::insert(const Dataset& dataset, Rank position) {
    if (contains(position)) {
        throw std::invalid_argument("position " + std::to_string(position) + " already inserted");
    }
    const int level = sample_level();
    const std::uint32_t idx = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{position, level, std::vector<std::vector<Rank>>(level + 1)});
    slot_of_[position] = idx;
    if (static_cast<int>(layer_population_.size()) <= level) {
        layer_population_.resize(level + 1, 0);
    }
    for (int l = 0; l <= level; ++l) {
        layer_population_[l] += 1;
    }

    if (idx == 0) {
        entry_slot_ = 0;
        max_level_ = level;
        return;
    }

    const std::span<const float> q = dataset.point(position);
    SearchStats scratch;
    std::uint32_t cur = entry_slot_;
    double cur_dist = euclidean_distance(q, dataset.point(nodes_[cur].position));
    for (int layer = max_level_; layer > level; --layer) {
        cur = greedy_step_down(dataset, q, cur, cur_dist, layer, scratch);
    }

    for (int layer = std::min(level, max_level_); layer >= 0; --layer) {
        const std::uint32_t seed[1] = {cur};
        LayerSearch ls = beam_search_layer(dataset, q, seed, params_.ef_construction, layer,
                                           FilterMode::none(), scratch);
        std::vector<Rank> chosen = occlude_neighbors(dataset, q, ls.found, params_.max_degree);
        nodes_[idx].layers[layer] = chosen;
        for (Rank nb : chosen) {
            std::vector<Rank>& rev = nodes_[slot(nb)].layers[layer];
            rev.push_back(position);
            const std::uint32_t cap = degree_cap(layer);
            if (rev.size() > cap) {
                // overflow: re-run occlusion over the neighbor's full out list
                const std::span<const float> nb_vec = dataset.point(nb);
                std::vector<Neighbor> cands;
                cands.reserve(rev.size());
                for (Rank p : rev) {
                    cands.push_back({p, euclidean_distance(nb_vec, dataset.point(p))});
                }
                rev = occlude_neighbors(dataset, nb_vec, std::move(cands), cap);
            }
        }
        if (!ls.found.empty()) {
            cur = slot(ls.found.front().position);
        }
    }

    if (level > max_level_) {
        entry_slot_ = idx;
        max_level_ = level;
    }
}

SearchResult
GraphIndex::search(const Dataset& dataset, std::span<const float> query, std::uint32_t m,
                   const FilterMode& filter) const {
    SearchResult out;
    out.stats.graphs_consulted = 1;
    if (nodes_.empty()) {
        return out;
    }
    m = std::max<std::uint32_t>(m, 1);

    std::uint32_t cur = entry_slot_;
    double cur_dist = euclidean_distance(query, dataset.point(nodes_[cur].position));
    out.stats.dist_computations += 1;
    for (int layer = max_level_; layer >= 1; --layer) {
        cur = greedy_step_down(dataset, query, cur, cur_dist, layer, out.stats);
    }

    std::uint32_t seeds[2] = {cur, entry_slot_};
    const std::size_t seed_count = (cur == entry_slot_) ? 1 : 2;
    LayerSearch ls = beam_search_layer(dataset, query, {seeds, seed_count}, m, 0, filter, out.stats);
    out.neighbors = std::move(ls.found);
    out.exhausted = ls.exhausted;
    return out;
}

SearchResult
GraphIndex::search_rf_post(const Dataset& dataset, const Query& query,
                           const SearchParams& params) const {
    const std::uint32_t k = std::max<std::uint32_t>(query.k, 1);
    const std::uint32_t factor = std::max<std::uint32_t>(params.expansion_factor, 2);
    std::uint64_t m = std::max<std::uint64_t>(params.beam, k);
    std::uint64_t cap = std::max<std::uint64_t>(m, params.beam_cap);
    cap = std::min(cap, std::max<std::uint64_t>(m, nodes_.size()));

    const FilterMode filter = FilterMode::post(query.range);
    SearchResult result;
    SearchStats total;
    std::uint32_t restarts = 0;
    while (true) {
        result = search(dataset, query.vec, static_cast<std::uint32_t>(m), filter);
        total.dist_computations += result.stats.dist_computations;
        total.hops += result.stats.hops;
        if (result.neighbors.size() >= k || result.exhausted || m >= cap) {
            break;
        }
        m = std::min<std::uint64_t>(cap, m * factor);
        restarts += 1;
    }
    total.graphs_consulted = 1;
    total.beam_restarts = restarts;
    result.stats = total;
    if (result.neighbors.size() > k) {
        result.neighbors.resize(k);
    }
    return result;
}

GraphIndex
GraphIndex::from_parts(GraphParams params, std::vector<NodeSpec> nodes, Rank entry_position) {
    GraphIndex g(params);
    g.nodes_.reserve(nodes.size());
    for (NodeSpec& ns : nodes) {
        if (ns.level < 0 || ns.layers.size() != static_cast<std::size_t>(ns.level) + 1) {
            throw std::invalid_argument("node layer list does not match its level");
        }
        if (g.slot_of_.count(ns.position)) {
            throw std::invalid_argument("duplicate node position " + std::to_string(ns.position));
        }
        const std::uint32_t idx = static_cast<std::uint32_t>(g.nodes_.size());
        g.slot_of_[ns.position] = idx;
        if (static_cast<int>(g.layer_population_.size()) <= ns.level) {
            g.layer_population_.resize(ns.level + 1, 0);
        }
        for (int l = 0; l <= ns.level; ++l) {
            g.layer_population_[l] += 1;
        }
        g.max_level_ = std::max(g.max_level_, ns.level);
        g.nodes_.push_back(Node{ns.position, ns.level, std::move(ns.layers)});
    }
    if (!g.nodes_.empty()) {
        auto it = g.slot_of_.find(entry_position);
        if (it == g.slot_of_.end()) {
            throw std::invalid_argument("entry point is not a member");
        }
        g.entry_slot_ = it->second;
    }
    g.validate_structure();
    return g;
}

std::size_t
GraphIndex::reachable_members() const {
    if (nodes_.empty()) {
        return 0;
    }
    std::vector<std::uint8_t> seen(nodes_.size(), 0);
    std::vector<std::uint32_t> stack{entry_slot_};
    seen[entry_slot_] = 1;
    std::size_t count = 0;
    while (!stack.empty()) {
        const std::uint32_t u = stack.back();
        stack.pop_back();
        ++count;
        for (Rank v : nodes_[u].layers[0]) {
            const std::uint32_t vs = slot(v);
            if (!seen[vs]) {
                seen[vs] = 1;
                stack.push_back(vs);
            }
        }
    }
    return count;
}

void
GraphIndex::validate_structure() const {
    if (nodes_.empty()) {
        return;
    }
    if (entry_slot_ >= nodes_.size()) {
        throw std::runtime_error("entry point out of bounds");
    }
    if (nodes_[entry_slot_].level != max_level_) {
        throw std::runtime_error("entry point is not a top-layer node");
    }
    for (const Node& n : nodes_) {
        if (n.layers.size() != static_cast<std::size_t>(n.level) + 1) {
            throw std::runtime_error("layer count mismatch at node " + std::to_string(n.position));
        }
        for (int l = 0; l <= n.level; ++l) {
            const std::vector<Rank>& adj = n.layers[l];
            if (adj.size() > degree_cap(l)) {
                throw std::runtime_error("degree cap exceeded at node " + std::to_string(n.position) +
                                         " layer " + std::to_string(l));
            }
            std::unordered_set<Rank> uniq;
            for (Rank v : adj) {
                if (v == n.position) {
                    throw std::runtime_error("self-loop at node " + std::to_string(n.position));
                }
                auto it = slot_of_.find(v);
                if (it == slot_of_.end()) {
                    throw std::runtime_error("edge to non-member " + std::to_string(v));
                }
                if (nodes_[it->second].level < l) {
                    throw std::runtime_error("edge to node below layer " + std::to_string(l));
                }
                if (!uniq.insert(v).second) {
                    throw std::runtime_error("duplicate edge at node " + std::to_string(n.position));
                }
            }
        }
    }
}

}  // namespace rfann
