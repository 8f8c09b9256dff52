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

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rfann/core.hpp"
#include "rfann/half_index.hpp"
#include "rfann/oracle.hpp"
#include "rfann/tree_index.hpp"

namespace rfann {

class FormatError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raw float vectors as parsed from an fvecs file (not yet rank-ordered).
struct VectorFile {
    std::size_t dim = 0;
    std::vector<float> data;

    std::size_t count() const { return dim == 0 ? 0 : data.size() / dim; }
    std::span<const float> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

struct IntVectorFile {
    std::size_t dim = 0;
    std::vector<std::int32_t> data;

    std::size_t count() const { return dim == 0 ? 0 : data.size() / dim; }
};

// fvecs layout: repeated records of a little-endian int32 d followed by d
// little-endian float32 values; every record must agree on d. Truncated or
// inconsistent records raise FormatError with the failing byte offset.
VectorFile load_fvecs(const std::filesystem::path& path);
IntVectorFile load_ivecs(const std::filesystem::path& path);
void save_fvecs(const std::filesystem::path& path, const VectorFile& vectors);

/// Reorders rows by ascending attribute rank so row i carries rank i.
/// Attributes must align one-to-one with rows.
Dataset make_ranked_dataset(const VectorFile& vectors, std::span<const double> raw_attrs,
                            std::string label);

struct SynthesizedData {
    std::shared_ptr<const Dataset> dataset;    // already in rank order
    std::vector<double> raw_attributes;        // aligned to rank order
};

// Gaussian-mixture vectors with uniform random attributes; deterministic
// under seed.
SynthesizedData synthesize_dataset(std::size_t n, std::size_t dim, std::size_t cluster_count,
                                   std::uint64_t seed);

/// Extra vectors from the same mixture, for use as query points.
VectorFile synthesize_queries(std::size_t count, std::size_t dim, std::size_t cluster_count,
                              std::uint64_t seed);

enum class RangeMode : std::uint8_t { Mix, FixedLength, HalfBounded };

struct WorkloadSpec {
    RangeMode mode = RangeMode::Mix;
    double fraction = 1.0;  // FixedLength only: range length = round(fraction * N)
    std::uint32_t count = 1000;
    std::uint32_t k = 10;
    std::uint64_t seed = 7;
};

std::string range_mode_label(const WorkloadSpec& spec);

// Mix: two independent uniform rank draws, sorted. FixedLength(p): length
// round(p*N) placed uniformly. HalfBounded: l = 1, r uniform. Query vectors
// are cycled in order.
std::vector<Query> gen_queries(const WorkloadSpec& spec, const Dataset& dataset,
                               const VectorFile& query_vectors);

struct BenchRow {
    std::string method;
    std::uint32_t beam = 0;
    std::uint32_t k = 0;
    std::string range_mode;
    double recall = 0.0;
    double qps = 0.0;
    double mean_dist = 0.0;
    double mean_graphs = 0.0;
    double wall_seconds = 0.0;
};

/// Uniform front-end over the index kinds (and the plain-POST baseline) for
/// the benchmark loop.
class QueryEngine {
 public:
    virtual ~QueryEngine() = default;
    virtual std::string name() const = 0;
    virtual SearchResult run(const Query& query, const SearchParams& params) const = 0;
};

class HalfEngine : public QueryEngine {
 public:
    explicit HalfEngine(const HalfIndex& index) : index_(index) {}
    std::string name() const override { return "half"; }
    SearchResult run(const Query& query, const SearchParams& params) const override;

 private:
    const HalfIndex& index_;
};

class TreeEngine : public QueryEngine {
 public:
    explicit TreeEngine(const TreeIndex& index) : index_(index) {}
    std::string name() const override { return "tree"; }
    SearchResult run(const Query& query, const SearchParams& params) const override;

 private:
    const TreeIndex& index_;
};

/// POST search on a single full-range graph (the classic baseline).
class RootPostEngine : public QueryEngine {
 public:
    RootPostEngine(const GraphIndex& graph, const Dataset& dataset)
        : graph_(graph), dataset_(dataset) {}
    std::string name() const override { return "root-post"; }
    SearchResult run(const Query& query, const SearchParams& params) const override;

 private:
    const GraphIndex& graph_;
    const Dataset& dataset_;
};

// Exact answers for a query batch, optionally cached in a sidecar file keyed
// by (dataset hash, query-set hash, k); a stale or foreign sidecar is
// recomputed and overwritten.
std::vector<ExactResult> ground_truth(const Dataset& dataset, std::span<const Query> queries,
                                      const std::optional<std::filesystem::path>& cache_path);

// One row per beam: recall against the oracle for every query, QPS measured
// on the single-threaded query loop only.
std::vector<BenchRow> run_benchmark(const QueryEngine& engine, const Dataset& dataset,
                                    std::span<const Query> queries,
                                    std::span<const ExactResult> exact, const WorkloadSpec& spec,
                                    std::span<const std::uint32_t> beams);

/// Header: method,beam,k,range_mode,recall,qps,mean_dist,mean_graphs
void write_csv(const std::filesystem::path& path, std::span<const BenchRow> rows);

// ---- theory-validation sweeps (shared by the CLI and the acceptance suite)

struct SweepReport {
    std::uint64_t checked = 0;
    std::uint64_t violations = 0;
    std::string detail;

    bool ok() const { return violations == 0; }
};

/// Random small instances; a violation would falsify the h-NN containment
/// property the POST expansion relies on.
SweepReport containment_sweep(std::uint32_t instances, std::uint32_t max_n, std::uint32_t max_d,
                              std::uint32_t max_k, std::uint64_t seed);

struct OrderStatsCase {
    std::uint32_t n;
    std::uint32_t in_range;
    std::uint32_t k;
};

SweepReport order_stats_sweep(std::span<const OrderStatsCase> cases, std::uint32_t trials,
                              double rel_tolerance, std::uint64_t seed);

/// Builds a tree per fanout (c = 1/f) over the dataset and checks
/// graphs_consulted <= 2 plus the elastic floor on every consulted graph.
SweepReport two_index_bound_sweep(const std::shared_ptr<const Dataset>& dataset,
                                  std::span<const std::uint32_t> fanouts, std::uint32_t queries,
                                  std::uint64_t seed, const GraphParams& graph_params,
                                  std::uint32_t leaf_threshold);

/// Half-bounded queries on a B=2 ladder: exactly one graph consulted per
/// query and achieved elastic factor >= 0.5 - 1/|stored range|.
SweepReport half_bound_sweep(const HalfIndex& index, std::uint32_t queries, std::uint64_t seed);

}  // namespace rfann
