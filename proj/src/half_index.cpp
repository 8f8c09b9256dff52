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

#include "rfann/half_index.hpp"

#include <algorithm>
#include <stdexcept>

namespace rfann {

std::vector<std::uint32_t>
HalfIndex::ladder_lengths(std::uint32_t n, std::uint32_t base) {
    if (n < 1 || base < 2) {
        throw std::invalid_argument("ladder requires n >= 1 and base >= 2");
    }
    std::vector<std::uint32_t> lengths;
    std::uint64_t denom = 1;
    while (true) {
        const std::uint32_t len = static_cast<std::uint32_t>((n + denom - 1) / denom);  // ceil
        if (lengths.empty() || lengths.back() != len) {
            lengths.push_back(len);
        }
        if (denom > n / base) {
            break;  // next i would exceed floor(log_B n)
        }
        denom *= base;
    }
    return lengths;
}

RankRange
HalfIndex::range_for_length(std::uint32_t len) const {
    const Rank n = static_cast<Rank>(dataset_->size());
    if (params_.direction == AnchorSide::LeftAnchored) {
        return {1, len};
    }
    return {static_cast<Rank>(n - len + 1), n};
}

HalfIndex
HalfIndex::build(std::shared_ptr<const Dataset> dataset, HalfIndexParams params,
                 GraphParams graph_params) {
    if (!dataset) {
        throw std::invalid_argument("half index requires a dataset");
    }
    HalfIndex index(std::move(dataset), params, graph_params);
    const std::uint32_t n = static_cast<std::uint32_t>(index.dataset_->size());
    std::vector<std::uint32_t> boundaries = ladder_lengths(n, params.base);
    std::sort(boundaries.begin(), boundaries.end());  // snapshot in growing-prefix order

    GraphIndex live(graph_params);
    std::size_t next_boundary = 0;
    for (std::uint32_t i = 1; i <= n; ++i) {
        const Rank rank = params.direction == AnchorSide::LeftAnchored ? i : n - i + 1;
        live.insert(*index.dataset_, rank);
        if (next_boundary < boundaries.size() && i == boundaries[next_boundary]) {
            RangedIndex snap{index.range_for_length(i), i == n ? std::move(live) : live.clone()};
            index.snapshots_.push_back(std::move(snap));
            ++next_boundary;
        }
    }
    // largest range first
    std::reverse(index.snapshots_.begin(), index.snapshots_.end());
    return index;
}

HalfIndex
HalfIndex::restore(std::shared_ptr<const Dataset> dataset, HalfIndexParams params,
                   GraphParams graph_params, std::vector<RangedIndex> snapshots) {
    if (!dataset) {
        throw std::invalid_argument("half index requires a dataset");
    }
    HalfIndex index(std::move(dataset), params, graph_params);
    const std::uint32_t n = static_cast<std::uint32_t>(index.dataset_->size());
    const std::vector<std::uint32_t> expected = ladder_lengths(n, params.base);
    if (snapshots.size() != expected.size()) {
        throw std::runtime_error("snapshot count does not match the ladder");
    }
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
        const RangedIndex& snap = snapshots[i];
        if (snap.range != index.range_for_length(expected[i])) {
            throw std::runtime_error("snapshot range does not match the ladder");
        }
        snap.graph.validate_structure();
        const std::vector<Rank> members = snap.graph.members_sorted();
        if (members.size() != snap.range.length()) {
            throw std::runtime_error("snapshot member count does not match its range");
        }
        for (std::size_t j = 0; j < members.size(); ++j) {
            if (members[j] != snap.range.l + j) {
                throw std::runtime_error("snapshot members do not match its range");
            }
        }
    }
    index.snapshots_ = std::move(snapshots);
    return index;
}

const RangedIndex&
HalfIndex::select(std::uint64_t needed_length) const {
    // snapshots_ is sorted by shrinking range; scan from the smallest
    for (std::size_t i = snapshots_.size(); i-- > 0;) {
        if (snapshots_[i].range.length() >= needed_length) {
            return snapshots_[i];
        }
    }
    return snapshots_.front();
}

HalfIndex::QueryResult
HalfIndex::query(const Query& query, const SearchParams& params) const {
    const Rank n = static_cast<Rank>(dataset_->size());
    if (query.range.l < 1 || query.range.r > n || query.range.l > query.range.r) {
        throw std::invalid_argument("query range out of bounds");
    }
    if (query.k < 1) {
        throw std::invalid_argument("query k must be >= 1");
    }
    if (params_.direction == AnchorSide::LeftAnchored && query.range.l != 1) {
        throw std::invalid_argument("left-anchored index serves ranges of the form [1, r]");
    }
    if (params_.direction == AnchorSide::RightAnchored && query.range.r != n) {
        throw std::invalid_argument("right-anchored index serves ranges of the form [l, N]");
    }

    const RangedIndex& snap = select(query.range.length());
    SearchResult res = snap.graph.search_rf_post(*dataset_, query, params);
    return QueryResult{std::move(res.neighbors), res.stats, snap.range};
}

std::uint64_t
HalfIndex::total_stored_nodes() const {
    std::uint64_t total = 0;
    for (const RangedIndex& snap : snapshots_) {
        total += snap.graph.size();
    }
    return total;
}

}  // namespace rfann
