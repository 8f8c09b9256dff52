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

// End-to-end acceptance suite. Each case prints one [PASS]/[FAIL] line; run
// the binary with -s to see them alongside the assertion summary.

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "rfann/harness.hpp"
#include "rfann/oracle.hpp"
#include "rfann/storage.hpp"

using namespace rfann;

namespace {

void
report(int criterion, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", criterion, name,
                detail.c_str());
    std::fflush(stdout);
}

// Shared fixtures, built once per process run.
struct BigFixture {
    std::shared_ptr<const Dataset> dataset;  // 16,384 x 16, clustered
    VectorFile query_vectors;

    BigFixture() {
        dataset = synthesize_dataset(16384, 16, 8, 9001).dataset;
        query_vectors = synthesize_queries(512, 16, 8, 9002);
    }
};

BigFixture&
big() {
    static BigFixture fixture;
    return fixture;
}

struct RecallFixture {
    std::shared_ptr<const Dataset> dataset;  // 10,000 x 16, clustered
    VectorFile query_vectors;
    std::optional<TreeIndex> tree;           // f = 2, M = 16, efc = 200

    RecallFixture() {
        dataset = synthesize_dataset(10000, 16, 8, 9101).dataset;
        query_vectors = synthesize_queries(256, 16, 8, 9102);
        TreeParams tp;
        tp.fanout = 2;
        tp.leaf_threshold = 256;
        tree.emplace(TreeIndex::build(dataset, tp, GraphParams{}));
    }
};

RecallFixture&
recall_fixture() {
    static RecallFixture fixture;
    return fixture;
}

}  // namespace

TEST_SUITE_BEGIN("acceptance");

TEST_CASE("criterion 1: two-index bound across fanouts") {
    const std::uint32_t fanouts[] = {2, 4, 8, 16};
    const SweepReport sweep =
        two_index_bound_sweep(big().dataset, fanouts, 10000, 8801, GraphParams{}, 256);
    std::string detail = std::to_string(sweep.checked) + " mix queries over f in {2,4,8,16}, " +
                         std::to_string(sweep.violations) + " violations";
    report(1, "graphs_consulted <= 2", sweep.ok(), detail);
    INFO(sweep.detail);
    REQUIRE(sweep.ok());
}

TEST_CASE("criterion 2: one-index bound and elastic floor for half-bounded queries") {
    const HalfIndex index = HalfIndex::build(big().dataset, HalfIndexParams{}, GraphParams{});
    const SweepReport sweep = half_bound_sweep(index, 10000, 8802);
    std::string detail = std::to_string(sweep.checked) + " half-bounded queries, " +
                         std::to_string(sweep.violations) + " violations";
    report(2, "graphs_consulted == 1, factor >= 0.5 - 1/|stored|", sweep.ok(), detail);
    INFO(sweep.detail);
    REQUIRE(sweep.ok());
}

TEST_CASE("criterion 3: oracle equivalence under exhaustive beams") {
    std::mt19937_64 rng(8803);
    std::uint64_t compared = 0;
    std::uint64_t mismatches = 0;
    std::uint64_t skipped_unreachable = 0;
    std::uint64_t graphs_checked = 0;
    std::uint64_t graphs_unreachable = 0;

    for (int d = 0; d < 20; ++d) {
        const std::size_t n = 200 + rng() % 1801;   // <= 2000
        const std::size_t dim = 2 + rng() % 7;      // <= 8
        auto dataset = synthesize_dataset(n, dim, 4, 7000 + d).dataset;
        const VectorFile qvecs = synthesize_queries(32, dim, 4, 7100 + d);

        GraphParams gp;
        gp.max_degree = 12;
        gp.ef_construction = 80;
        const HalfIndex half = HalfIndex::build(dataset, HalfIndexParams{}, gp);
        TreeParams tp;
        tp.leaf_threshold = 64;
        const TreeIndex tree = TreeIndex::build(dataset, tp, gp);

        // reachability oracle per stored graph
        std::map<RankRange, bool> half_reachable;
        for (const RangedIndex& snap : half.snapshots()) {
            ++graphs_checked;
            const bool full = snap.graph.reachable_members() == snap.graph.size();
            graphs_unreachable += full ? 0 : 1;
            half_reachable[snap.range] = full;
        }
        std::map<RankRange, bool> tree_reachable;
        for (const auto& [range, graph] : tree.nodes()) {
            ++graphs_checked;
            const bool full = graph.reachable_members() == graph.size();
            graphs_unreachable += full ? 0 : 1;
            tree_reachable[range] = full;
        }

        SearchParams params;
        params.beam = static_cast<std::uint32_t>(n);  // exhaustive beam
        params.beam_cap = static_cast<std::uint32_t>(n);

        for (int t = 0; t < 200; ++t) {
            Query q;
            const auto row = qvecs.row(t % qvecs.count());
            q.vec.assign(row.begin(), row.end());
            q.k = 10;

            // half-bounded query against the ladder
            q.range = {1, static_cast<Rank>(1 + rng() % n)};
            if (half_reachable.at(half.select(q.range.length()).range)) {
                const HalfIndex::QueryResult res = half.query(q, params);
                const ExactResult exact = exact_rfknn(*dataset, q);
                ++compared;
                bool same = res.neighbors.size() == exact.neighbors.size();
                for (std::size_t i = 0; same && i < res.neighbors.size(); ++i) {
                    same = res.neighbors[i].position == exact.neighbors[i].position;
                }
                mismatches += same ? 0 : 1;
            } else {
                ++skipped_unreachable;
            }

            // general query against the segment tree
            Rank a = 1 + rng() % n;
            Rank b = 1 + rng() % n;
            q.range = {std::min(a, b), std::max(a, b)};
            const TreeIndex::QueryResult res = tree.query(q, params);
            bool reachable = true;
            for (const TreeIndex::ConsultedGraph& g : res.consulted) {
                reachable = reachable && tree_reachable.at(g.node_range);
            }
            if (!reachable) {
                ++skipped_unreachable;
                continue;
            }
            const ExactResult exact = exact_rfknn(*dataset, q);
            ++compared;
            bool same = res.neighbors.size() == exact.neighbors.size();
            for (std::size_t i = 0; same && i < res.neighbors.size(); ++i) {
                same = res.neighbors[i].position == exact.neighbors[i].position;
            }
            mismatches += same ? 0 : 1;
        }
    }

    const double unreachable_pct =
        100.0 * static_cast<double>(graphs_unreachable) / static_cast<double>(graphs_checked);
    std::string detail = std::to_string(compared) + " comparisons, " +
                         std::to_string(mismatches) + " mismatches; " +
                         std::to_string(graphs_unreachable) + "/" +
                         std::to_string(graphs_checked) + " graphs not fully reachable (" +
                         std::to_string(unreachable_pct) + "%), " +
                         std::to_string(skipped_unreachable) + " queries skipped";
    const bool ok = mismatches == 0;
    report(3, "exhaustive-beam results equal exact rfknn", ok, detail);
    REQUIRE(ok);
    CHECK(unreachable_pct < 1.0);
}

TEST_CASE("criterion 4: containment lemma on random instances") {
    const SweepReport sweep = containment_sweep(1000, 500, 8, 10, 8804);
    std::string detail = std::to_string(sweep.checked) + " instances, " +
                         std::to_string(sweep.violations) + " violations";
    report(4, "rfknn(k) within the global h-nn prefix", sweep.ok(), detail);
    REQUIRE(sweep.ok());
}

TEST_CASE("criterion 5: order-statistics formula at 100k trials") {
    const OrderStatsCase cases[] = {{10, 5, 2}, {1000, 250, 10}, {10000, 2500, 10}};
    const SweepReport sweep = order_stats_sweep(cases, 100000, 0.03, 8805);
    report(5, "E[W_k] = k(N+1)/(K+1) within 3%", sweep.ok(), sweep.detail);
    REQUIRE(sweep.ok());
}

TEST_CASE("criterion 6: storage bounds at three scales") {
    bool ok = true;
    std::string detail;
    for (std::size_t n : {std::size_t(1000), std::size_t(4096), std::size_t(16384)}) {
        auto dataset =
            n == 16384 ? big().dataset : synthesize_dataset(n, 16, 8, 9200 + n).dataset;

        const HalfIndex half = HalfIndex::build(dataset, HalfIndexParams{}, GraphParams{});
        const bool half_ok = half.total_stored_nodes() <= 2 * n;
        ok = ok && half_ok;
        detail += "n=" + std::to_string(n) + " half=" + std::to_string(half.total_stored_nodes()) +
                  "/" + std::to_string(2 * n);

        TreeParams tp;
        const TreeIndex tree = TreeIndex::build(dataset, tp, GraphParams{});
        const std::uint64_t bound =
            static_cast<std::uint64_t>(n) * tree.indexed_level_count();
        const bool tree_ok = tree.count_stored_nodes() <= bound;
        ok = ok && tree_ok;
        detail += " tree=" + std::to_string(tree.count_stored_nodes()) + "/" +
                  std::to_string(bound) + "; ";
    }
    report(6, "half <= 2N, tree <= N * levels", ok, detail);
    REQUIRE(ok);
}

TEST_CASE("criterion 7: left-subtree reuse keeps inserts near half the nodes") {
    auto dataset = synthesize_dataset(4096, 16, 8, 9301).dataset;
    TreeParams tp;
    tp.fanout = 2;
    tp.leaf_threshold = 32;
    const TreeIndex tree = TreeIndex::build(dataset, tp, GraphParams{});
    const double ratio = static_cast<double>(tree.build_insert_count()) /
                         static_cast<double>(tree.count_stored_nodes());
    std::string detail = "inserts=" + std::to_string(tree.build_insert_count()) +
                         " stored=" + std::to_string(tree.count_stored_nodes()) +
                         " ratio=" + std::to_string(ratio);
    const bool ok = ratio <= 0.7;
    report(7, "insert/node ratio <= 0.7", ok, detail);
    REQUIRE(ok);
}

TEST_CASE("criterion 8: recall@10 reaches 0.95 and rises with beam") {
    RecallFixture& fx = recall_fixture();
    WorkloadSpec spec;
    spec.mode = RangeMode::FixedLength;
    spec.fraction = 1.0 / 8.0;
    spec.count = 300;
    spec.k = 10;
    spec.seed = 8808;
    const std::vector<Query> queries = gen_queries(spec, *fx.dataset, fx.query_vectors);
    const std::vector<ExactResult> exact = ground_truth(*fx.dataset, queries, std::nullopt);

    TreeEngine engine(*fx.tree);
    const std::uint32_t beams[] = {10, 20, 50, 100, 200};
    const std::vector<BenchRow> rows =
        run_benchmark(engine, *fx.dataset, queries, exact, spec, beams);

    double best = 0.0;
    int inversions = 0;
    std::string detail;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        best = std::max(best, rows[i].recall);
        if (i > 0 && rows[i].recall < rows[i - 1].recall) {
            ++inversions;
        }
        detail += "m=" + std::to_string(rows[i].beam) + ":" + std::to_string(rows[i].recall) + " ";
    }
    const bool ok = best >= 0.95 && inversions <= 1;
    report(8, "recall@10 >= 0.95 somewhere, <= 1 inversion", ok,
           detail + "inversions=" + std::to_string(inversions));
    REQUIRE(ok);
}

TEST_CASE("criterion 9: tree queries cost fewer distance computations than root POST") {
    RecallFixture& fx = recall_fixture();
    WorkloadSpec spec;
    spec.mode = RangeMode::FixedLength;
    spec.fraction = 1.0 / 32.0;
    spec.count = 200;
    spec.k = 10;
    spec.seed = 8809;
    const std::vector<Query> queries = gen_queries(spec, *fx.dataset, fx.query_vectors);

    SearchParams params;
    params.beam = 50;

    const GraphIndex& root = fx.tree->nodes().at(fx.dataset->full_range());
    double tree_dist = 0.0;
    double root_dist = 0.0;
    for (const Query& q : queries) {
        tree_dist += static_cast<double>(fx.tree->query(q, params).stats.dist_computations);
        root_dist +=
            static_cast<double>(root.search_rf_post(*fx.dataset, q, params).stats.dist_computations);
    }
    tree_dist /= static_cast<double>(queries.size());
    root_dist /= static_cast<double>(queries.size());

    std::string detail = "mean dist: tree=" + std::to_string(tree_dist) +
                         " root-post=" + std::to_string(root_dist);
    const bool ok = tree_dist < root_dist;
    report(9, "elastic decomposition beats POST on the root", ok, detail);
    REQUIRE(ok);
}

TEST_CASE("criterion 10: persistence round trip is exact") {
    auto dataset = synthesize_dataset(600, 8, 4, 9401).dataset;
    const VectorFile qvecs = synthesize_queries(32, 8, 4, 9402);
    const std::filesystem::path dir = std::filesystem::temp_directory_path();
    const std::filesystem::path half_a = dir / "rfann_acc_half_a.idx";
    const std::filesystem::path half_b = dir / "rfann_acc_half_b.idx";
    const std::filesystem::path tree_a = dir / "rfann_acc_tree_a.idx";
    const std::filesystem::path tree_b = dir / "rfann_acc_tree_b.idx";

    bool ok = true;
    std::string detail;

    const HalfIndex half = HalfIndex::build(dataset, HalfIndexParams{}, GraphParams{});
    TreeParams tp;
    tp.leaf_threshold = 32;
    const TreeIndex tree = TreeIndex::build(dataset, tp, GraphParams{});

    save_index(half, half_a);
    save_index(tree, tree_a);
    const HalfIndex half_loaded = load_half_index(half_a, dataset);
    const TreeIndex tree_loaded = load_tree_index(tree_a, dataset);
    save_index(half_loaded, half_b);
    save_index(tree_loaded, tree_b);

    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    const bool bytes_ok = slurp(half_a) == slurp(half_b) && slurp(tree_a) == slurp(tree_b);
    ok = ok && bytes_ok;
    detail += bytes_ok ? "bytes stable; " : "byte drift; ";

    std::mt19937_64 rng(9403);
    SearchParams params;
    params.beam = 16;
    std::uint64_t checked = 0;
    std::uint64_t diffs = 0;
    for (int t = 0; t < 100; ++t) {
        Query q;
        const auto row = qvecs.row(t % qvecs.count());
        q.vec.assign(row.begin(), row.end());
        q.k = 10;

        q.range = {1, static_cast<Rank>(1 + rng() % 600)};
        const HalfIndex::QueryResult ha = half.query(q, params);
        const HalfIndex::QueryResult hb = half_loaded.query(q, params);
        ++checked;
        diffs += (ha.neighbors == hb.neighbors && ha.stats == hb.stats) ? 0 : 1;

        Rank a = 1 + rng() % 600;
        Rank b = 1 + rng() % 600;
        q.range = {std::min(a, b), std::max(a, b)};
        const TreeIndex::QueryResult ta = tree.query(q, params);
        const TreeIndex::QueryResult tb = tree_loaded.query(q, params);
        ++checked;
        diffs += (ta.neighbors == tb.neighbors && ta.stats == tb.stats) ? 0 : 1;
    }
    ok = ok && diffs == 0;
    detail += std::to_string(checked) + " query replays, " + std::to_string(diffs) + " diffs";

    for (const auto& p : {half_a, half_b, tree_a, tree_b}) {
        std::filesystem::remove(p);
    }
    report(10, "save/load identity", ok, detail);
    REQUIRE(ok);
}

TEST_SUITE_END();
