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

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "rfann/harness.hpp"
#include "rfann/storage.hpp"

namespace {

using namespace rfann;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct GenSpec {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::size_t clusters = 1;
    std::uint64_t seed = 1;
};

GenSpec
parse_gen_spec(const std::string& text) {
    GenSpec spec;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream in(text);
    if (!(in >> spec.n >> c1 >> spec.dim >> c2 >> spec.clusters >> c3 >> spec.seed) || c1 != ',' ||
        c2 != ',' || c3 != ',') {
        throw std::invalid_argument("--gen expects n,dim,clusters,seed");
    }
    return spec;
}

struct DatasetArgs {
    std::string dataset_path;
    std::string attrs_path;
    std::string gen;

    void attach(CLI::App* cmd) {
        cmd->add_option("--dataset", dataset_path, "fvecs file with vectors in rank order");
        cmd->add_option("--attrs", attrs_path,
                        "fvecs file (dim 1) of raw attributes; rows are re-ranked by it");
        cmd->add_option("--gen", gen, "synthesize instead: n,dim,clusters,seed");
    }

    std::shared_ptr<const Dataset> load() const {
        if (!gen.empty() && !dataset_path.empty()) {
            throw std::invalid_argument("--dataset and --gen are mutually exclusive");
        }
        if (!gen.empty()) {
            const GenSpec spec = parse_gen_spec(gen);
            return synthesize_dataset(spec.n, spec.dim, spec.clusters, spec.seed).dataset;
        }
        if (dataset_path.empty()) {
            throw std::invalid_argument("one of --dataset or --gen is required");
        }
        VectorFile vecs = load_fvecs(dataset_path);
        if (attrs_path.empty()) {
            // file is taken as already rank-ordered
            const std::size_t count = vecs.count();
            return std::make_shared<const Dataset>(std::move(vecs.data), count, vecs.dim,
                                                   dataset_path);
        }
        const VectorFile attrs = load_fvecs(attrs_path);
        if (attrs.dim != 1) {
            throw FormatError("--attrs expects one value per record");
        }
        std::vector<double> raw(attrs.data.begin(), attrs.data.end());
        return std::make_shared<const Dataset>(make_ranked_dataset(vecs, raw, dataset_path));
    }
};

struct IndexArgs {
    std::string kind = "tree";
    std::uint32_t base = 2;
    std::uint32_t fanout = 2;
    std::uint32_t leaf = 256;
    double elastic_c = 0.0;
    std::uint32_t degree = 16;
    std::uint32_t efc = 200;
    std::uint64_t seed = 0x9e3779b97f4a7c15ull;

    void attach(CLI::App* cmd) {
        cmd->add_option("--kind", kind, "half | tree")->check(CLI::IsMember({"half", "tree"}));
        cmd->add_option("--base", base, "ladder ratio B (half)");
        cmd->add_option("--fanout", fanout, "segment-tree fanout f (tree)");
        cmd->add_option("--leaf", leaf, "leaf threshold (tree)");
        cmd->add_option("--elastic", elastic_c, "elastic threshold c; 0 means 1/fanout");
        cmd->add_option("--degree", degree, "graph out-degree cap M");
        cmd->add_option("--efc", efc, "construction beam width");
        cmd->add_option("--seed", seed, "level-sampling seed");
    }

    GraphParams graph_params() const {
        GraphParams gp;
        gp.max_degree = degree;
        gp.ef_construction = efc;
        gp.seed = seed;
        return gp;
    }
};

std::vector<std::uint32_t>
parse_uint_list(const std::string& text) {
    std::vector<std::uint32_t> out;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (!tok.empty()) {
            out.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
        }
    }
    if (out.empty()) {
        throw std::invalid_argument("expected a comma-separated list of integers");
    }
    return out;
}

WorkloadSpec
parse_workload(const std::string& mode, std::uint32_t count, std::uint32_t k, std::uint64_t seed) {
    WorkloadSpec spec;
    spec.count = count;
    spec.k = k;
    spec.seed = seed;
    if (mode == "mix") {
        spec.mode = RangeMode::Mix;
    } else if (mode == "half") {
        spec.mode = RangeMode::HalfBounded;
    } else if (mode.rfind("fixed:", 0) == 0) {
        spec.mode = RangeMode::FixedLength;
        spec.fraction = std::stod(mode.substr(6));
    } else {
        throw std::invalid_argument("--range-mode expects mix | fixed:<frac> | half");
    }
    return spec;
}

int
cmd_gen_data(const GenSpec& spec, std::uint32_t query_count, const std::string& out_base) {
    SynthesizedData data = synthesize_dataset(spec.n, spec.dim, spec.clusters, spec.seed);

    VectorFile vecs;
    vecs.dim = data.dataset->dim();
    vecs.data = data.dataset->raw();
    save_fvecs(out_base + ".fvecs", vecs);

    VectorFile attrs;
    attrs.dim = 1;
    attrs.data.assign(data.raw_attributes.begin(), data.raw_attributes.end());
    save_fvecs(out_base + ".attrs.fvecs", attrs);

    const VectorFile queries =
        synthesize_queries(query_count, spec.dim, spec.clusters, spec.seed + 1);
    save_fvecs(out_base + ".queries.fvecs", queries);

    std::cout << "dataset " << out_base << ".fvecs n=" << data.dataset->size()
              << " dim=" << data.dataset->dim() << " hash=" << std::hex
              << data.dataset->content_hash() << std::dec << "\n"
              << "queries " << out_base << ".queries.fvecs count=" << query_count << "\n";
    return kExitOk;
}

int
cmd_build(const DatasetArgs& data_args, const IndexArgs& index_args, const std::string& out_path) {
    std::shared_ptr<const Dataset> dataset = data_args.load();
    const GraphParams gp = index_args.graph_params();

    if (index_args.kind == "half") {
        HalfIndexParams hp;
        hp.base = index_args.base;
        const HalfIndex index = HalfIndex::build(dataset, hp, gp);
        std::uint64_t bytes = 0;
        if (!out_path.empty()) {
            bytes = save_index(index, out_path);
        }
        std::cout << "half index: snapshots=" << index.snapshots().size()
                  << " stored_nodes=" << index.total_stored_nodes()
                  << " inserts=" << dataset->size() << " bytes=" << bytes << "\n";
    } else {
        TreeParams tp;
        tp.fanout = index_args.fanout;
        tp.leaf_threshold = index_args.leaf;
        tp.elastic.c = index_args.elastic_c;
        const TreeIndex index = TreeIndex::build(dataset, tp, gp);
        std::uint64_t bytes = 0;
        if (!out_path.empty()) {
            bytes = save_index(index, out_path);
        }
        const double ratio = index.count_stored_nodes() == 0
                                 ? 0.0
                                 : static_cast<double>(index.build_insert_count()) /
                                       static_cast<double>(index.count_stored_nodes());
        std::cout << "tree index: ranges=" << index.nodes().size()
                  << " stored_nodes=" << index.count_stored_nodes()
                  << " inserts=" << index.build_insert_count() << " insert_node_ratio=" << ratio
                  << " levels=" << index.indexed_level_count() << " bytes=" << bytes << "\n";
    }
    return kExitOk;
}

int
cmd_query(const DatasetArgs& data_args, const std::string& index_path, const std::string& vec_text,
          const std::string& qvecs_path, std::uint32_t qid, std::uint32_t l, std::uint32_t r,
          std::uint32_t k, std::uint32_t beam) {
    std::shared_ptr<const Dataset> dataset = data_args.load();

    Query query;
    query.k = k;
    query.range = make_range(l, r == 0 ? static_cast<Rank>(dataset->size()) : r,
                             static_cast<Rank>(dataset->size()));
    if (!vec_text.empty()) {
        std::istringstream in(vec_text);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            query.vec.push_back(std::stof(tok));
        }
    } else if (!qvecs_path.empty()) {
        const VectorFile qvecs = load_fvecs(qvecs_path);
        if (qid >= qvecs.count()) {
            throw std::invalid_argument("--qid out of bounds");
        }
        const auto row = qvecs.row(qid);
        query.vec.assign(row.begin(), row.end());
    } else {
        throw std::invalid_argument("one of --vec or --query-vecs is required");
    }
    if (query.vec.size() != dataset->dim()) {
        throw std::invalid_argument("query vector dimensionality does not match the dataset");
    }

    SearchParams params;
    params.beam = beam;

    SearchResult res;
    if (peek_index_kind(index_path) == IndexKind::Half) {
        const HalfIndex index = load_half_index(index_path, dataset);
        HalfEngine engine(index);
        res = engine.run(query, params);
    } else {
        const TreeIndex index = load_tree_index(index_path, dataset);
        TreeEngine engine(index);
        res = engine.run(query, params);
    }

    for (const Neighbor& nb : res.neighbors) {
        std::cout << nb.position << "\t" << nb.distance << "\n";
    }
    std::cout << "stats: dist=" << res.stats.dist_computations << " hops=" << res.stats.hops
              << " graphs=" << res.stats.graphs_consulted
              << " restarts=" << res.stats.beam_restarts << "\n";
    return kExitOk;
}

int
cmd_bench(const DatasetArgs& data_args, const IndexArgs& index_args, const std::string& index_path,
          const std::string& qvecs_path, const std::string& range_mode, std::uint32_t count,
          std::uint32_t k, std::uint64_t seed, const std::string& beams_text,
          const std::string& out_path, const std::string& gt_cache, bool with_baseline) {
    std::shared_ptr<const Dataset> dataset = data_args.load();
    const std::vector<std::uint32_t> beams = parse_uint_list(beams_text);
    const WorkloadSpec spec = parse_workload(range_mode, count, k, seed);

    VectorFile qvecs;
    if (!qvecs_path.empty()) {
        qvecs = load_fvecs(qvecs_path);
    } else {
        qvecs = synthesize_queries(std::min<std::uint32_t>(count, 1000), dataset->dim(), 4,
                                   seed ^ 0x51f7);
        std::cerr << "note: no --query-vecs given, synthesizing query vectors\n";
    }
    const std::vector<Query> queries = gen_queries(spec, *dataset, qvecs);
    std::optional<std::filesystem::path> cache;
    if (!gt_cache.empty()) {
        cache = gt_cache;
    }
    const std::vector<ExactResult> exact = ground_truth(*dataset, queries, cache);

    std::vector<BenchRow> rows;
    auto append = [&](const QueryEngine& engine) {
        const std::vector<BenchRow> part =
            run_benchmark(engine, *dataset, queries, exact, spec, beams);
        rows.insert(rows.end(), part.begin(), part.end());
    };

    std::optional<HalfIndex> half;
    std::optional<TreeIndex> tree;
    if (!index_path.empty()) {
        if (peek_index_kind(index_path) == IndexKind::Half) {
            half.emplace(load_half_index(index_path, dataset));
        } else {
            tree.emplace(load_tree_index(index_path, dataset));
        }
    } else if (index_args.kind == "half") {
        HalfIndexParams hp;
        hp.base = index_args.base;
        half.emplace(HalfIndex::build(dataset, hp, index_args.graph_params()));
    } else {
        TreeParams tp;
        tp.fanout = index_args.fanout;
        tp.leaf_threshold = index_args.leaf;
        tp.elastic.c = index_args.elastic_c;
        tree.emplace(TreeIndex::build(dataset, tp, index_args.graph_params()));
    }

    if (half) {
        HalfEngine engine(*half);
        append(engine);
    }
    if (tree) {
        TreeEngine engine(*tree);
        append(engine);
    }
    if (with_baseline) {
        const GraphIndex* root = nullptr;
        if (tree) {
            auto it = tree->nodes().find(dataset->full_range());
            if (it != tree->nodes().end()) {
                root = &it->second;
            }
        } else if (half) {
            root = &half->snapshots().front().graph;
        }
        if (root != nullptr) {
            RootPostEngine engine(*root, *dataset);
            append(engine);
        } else {
            std::cerr << "note: no full-range graph available for the baseline\n";
        }
    }

    if (!out_path.empty()) {
        write_csv(out_path, rows);
    }
    for (const BenchRow& row : rows) {
        std::cout << row.method << " beam=" << row.beam << " recall@" << row.k << "="
                  << row.recall << " qps=" << row.qps << " mean_dist=" << row.mean_dist
                  << " mean_graphs=" << row.mean_graphs << "\n";
    }
    return kExitOk;
}

int
cmd_validate(std::uint32_t n, std::uint32_t dim, std::uint32_t trials, std::uint32_t queries,
             std::uint64_t seed, const std::string& fanouts_text) {
    bool ok = true;
    auto show = [&ok](const std::string& name, const SweepReport& report) {
        ok = ok && report.ok();
        std::cout << (report.ok() ? "[PASS] " : "[FAIL] ") << name << ": " << report.checked
                  << " checks, " << report.violations << " violations\n";
        if (!report.detail.empty()) {
            std::cerr << report.detail;
        }
    };

    show("containment lemma", containment_sweep(1000, 500, 8, 10, seed));

    const OrderStatsCase cases[] = {{10, 5, 2}, {1000, 250, 10}, {10000, 2500, 10}};
    show("order statistics", order_stats_sweep(cases, trials, 0.03, seed + 1));

    const SynthesizedData data = synthesize_dataset(n, dim, 8, seed + 2);
    const std::vector<std::uint32_t> fanouts = parse_uint_list(fanouts_text);
    show("two-index bound",
         two_index_bound_sweep(data.dataset, fanouts, queries, seed + 3, GraphParams{}, 64));

    HalfIndexParams hp;
    const HalfIndex half = HalfIndex::build(data.dataset, hp, GraphParams{});
    show("one-index bound (half)", half_bound_sweep(half, queries, seed + 4));

    return ok ? kExitOk : kExitValidation;
}

}  // namespace

int
main(int argc, char** argv) {
    CLI::App app{"range-filtering approximate nearest neighbor search over elastic graph indexes"};
    app.require_subcommand(1);
    // key-value file per subcommand section ([bench] queries=500); flags win
    app.set_config("--config");
    app.fallthrough();

    // gen-data
    auto* gen_cmd = app.add_subcommand("gen-data", "synthesize a dataset, attributes and queries");
    std::string gen_spec_text;
    std::uint32_t gen_queries_count = 1000;
    std::string gen_out = "data";
    gen_cmd->add_option("--gen", gen_spec_text, "n,dim,clusters,seed")->required();
    gen_cmd->add_option("--queries", gen_queries_count, "number of query vectors");
    gen_cmd->add_option("--out", gen_out, "output basename");

    // build
    auto* build_cmd = app.add_subcommand("build", "build an index and save it");
    DatasetArgs build_data;
    build_data.attach(build_cmd);
    IndexArgs build_index;
    build_index.attach(build_cmd);
    std::string build_out;
    build_cmd->add_option("--out", build_out, "index file to write");

    // query
    auto* query_cmd = app.add_subcommand("query", "run a single query against a saved index");
    DatasetArgs query_data;
    query_data.attach(query_cmd);
    std::string query_index, query_vec, query_qvecs;
    std::uint32_t query_qid = 0, query_l = 1, query_r = 0, query_k = 10, query_beam = 64;
    query_cmd->add_option("--index", query_index, "index file")->required();
    query_cmd->add_option("--vec", query_vec, "query vector as comma-separated floats");
    query_cmd->add_option("--query-vecs", query_qvecs, "fvecs file of query vectors");
    query_cmd->add_option("--qid", query_qid, "row in --query-vecs");
    query_cmd->add_option("--l", query_l, "range left bound (1-based)");
    query_cmd->add_option("--r", query_r, "range right bound (default N)");
    query_cmd->add_option("--k", query_k, "result count");
    query_cmd->add_option("--beam", query_beam, "beam width m");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "run a workload and report recall/QPS as CSV");
    DatasetArgs bench_data;
    bench_data.attach(bench_cmd);
    IndexArgs bench_index;
    bench_index.attach(bench_cmd);
    std::string bench_index_path, bench_qvecs, bench_mode = "mix", bench_beams = "16,32,64";
    std::string bench_out, bench_gt_cache;
    std::uint32_t bench_count = 1000, bench_k = 10;
    std::uint64_t bench_seed = 7;
    bool bench_baseline = false;
    bench_cmd->add_option("--index", bench_index_path, "saved index (otherwise built from flags)");
    bench_cmd->add_option("--query-vecs", bench_qvecs, "fvecs file of query vectors");
    bench_cmd->add_option("--range-mode", bench_mode, "mix | fixed:<frac> | half");
    bench_cmd->add_option("--queries", bench_count, "number of queries");
    bench_cmd->add_option("--k", bench_k, "result count");
    bench_cmd->add_option("--workload-seed", bench_seed, "workload RNG seed");
    bench_cmd->add_option("--beam", bench_beams, "comma-separated beam schedule");
    bench_cmd->add_option("--out", bench_out, "CSV output path");
    bench_cmd->add_option("--gt-cache", bench_gt_cache, "ground-truth sidecar cache file");
    bench_cmd->add_flag("--with-baseline", bench_baseline, "also run POST on the full-range graph");

    // validate
    auto* val_cmd = app.add_subcommand("validate", "run the theory-validation sweeps");
    std::uint32_t val_n = 4096, val_dim = 16, val_trials = 100000, val_queries = 2000;
    std::uint64_t val_seed = 17;
    std::string val_fanouts = "2,4,8,16";
    val_cmd->add_option("--n", val_n, "synthetic dataset size for the index sweeps");
    val_cmd->add_option("--dim", val_dim, "synthetic dataset dimensionality");
    val_cmd->add_option("--trials", val_trials, "Monte-Carlo trials per order-statistics case");
    val_cmd->add_option("--queries", val_queries, "queries per index sweep");
    val_cmd->add_option("--seed", val_seed, "sweep RNG seed");
    val_cmd->add_option("--fanouts", val_fanouts, "fanouts for the two-index sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen_cmd->parsed()) {
            return cmd_gen_data(parse_gen_spec(gen_spec_text), gen_queries_count, gen_out);
        }
        if (build_cmd->parsed()) {
            return cmd_build(build_data, build_index, build_out);
        }
        if (query_cmd->parsed()) {
            return cmd_query(query_data, query_index, query_vec, query_qvecs, query_qid, query_l,
                             query_r, query_k, query_beam);
        }
        if (bench_cmd->parsed()) {
            return cmd_bench(bench_data, bench_index, bench_index_path, bench_qvecs, bench_mode,
                             bench_count, bench_k, bench_seed, bench_beams, bench_out,
                             bench_gt_cache, bench_baseline);
        }
        if (val_cmd->parsed()) {
            return cmd_validate(val_n, val_dim, val_trials, val_queries, val_seed, val_fanouts);
        }
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const StorageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
