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

#include "rfann/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace rfann {

namespace {

double
uniform01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller, one value per two uniforms; keeps synthesis independent of the
// standard library's distribution internals.
double
gaussian(std::mt19937_64& rng) {
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::vector<float>
mixture_vectors(std::size_t n, std::size_t dim, std::size_t cluster_count, std::mt19937_64& rng) {
    std::vector<std::vector<double>> centers(cluster_count, std::vector<double>(dim));
    for (auto& center : centers) {
        for (double& c : center) {
            c = (uniform01(rng) * 2.0 - 1.0) * 10.0;
        }
    }
    std::vector<float> data(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cluster = static_cast<std::size_t>(uniform01(rng) * cluster_count) %
                                    cluster_count;
        for (std::size_t j = 0; j < dim; ++j) {
            data[i * dim + j] = static_cast<float>(centers[cluster][j] + gaussian(rng));
        }
    }
    return data;
}

}  // namespace

VectorFile
load_fvecs(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path.string());
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    VectorFile out;
    std::size_t off = 0;
    while (off < bytes.size()) {
        if (off + 4 > bytes.size()) {
            throw FormatError("truncated record header at byte offset " + std::to_string(off) +
                              " in " + path.string());
        }
        std::int32_t d = 0;
        std::memcpy(&d, bytes.data() + off, 4);
        if (d <= 0) {
            throw FormatError("non-positive dimension at byte offset " + std::to_string(off) +
                              " in " + path.string());
        }
        if (out.dim != 0 && static_cast<std::size_t>(d) != out.dim) {
            throw FormatError("inconsistent dimension at byte offset " + std::to_string(off) +
                              " in " + path.string());
        }
        out.dim = static_cast<std::size_t>(d);
        off += 4;
        if (off + out.dim * 4 > bytes.size()) {
            throw FormatError("truncated record body at byte offset " + std::to_string(off) +
                              " in " + path.string());
        }
        const std::size_t old = out.data.size();
        out.data.resize(old + out.dim);
        std::memcpy(out.data.data() + old, bytes.data() + off, out.dim * 4);
        off += out.dim * 4;
    }
    return out;
}

IntVectorFile
load_ivecs(const std::filesystem::path& path) {
    // identical layout with int32 payloads
    const VectorFile raw = load_fvecs(path);
    IntVectorFile out;
    out.dim = raw.dim;
    out.data.resize(raw.data.size());
    std::memcpy(out.data.data(), raw.data.data(), raw.data.size() * 4);
    return out;
}

void
save_fvecs(const std::filesystem::path& path, const VectorFile& vectors) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FormatError("cannot open " + path.string() + " for writing");
    }
    const std::int32_t d = static_cast<std::int32_t>(vectors.dim);
    for (std::size_t i = 0; i < vectors.count(); ++i) {
        out.write(reinterpret_cast<const char*>(&d), 4);
        out.write(reinterpret_cast<const char*>(vectors.data.data() + i * vectors.dim),
                  static_cast<std::streamsize>(vectors.dim * 4));
    }
    if (!out) {
        throw FormatError("write failed for " + path.string());
    }
}

Dataset
make_ranked_dataset(const VectorFile& vectors, std::span<const double> raw_attrs,
                    std::string label) {
    if (raw_attrs.size() != vectors.count()) {
        throw std::invalid_argument("attribute count does not match vector count");
    }
    const std::vector<Rank> ranks = rerank_attributes(raw_attrs);
    std::vector<float> ordered(vectors.data.size());
    for (std::size_t i = 0; i < vectors.count(); ++i) {
        const std::size_t row = static_cast<std::size_t>(ranks[i]) - 1;
        std::copy_n(vectors.data.data() + i * vectors.dim, vectors.dim,
                    ordered.data() + row * vectors.dim);
    }
    return Dataset(std::move(ordered), vectors.count(), vectors.dim, std::move(label));
}

SynthesizedData
synthesize_dataset(std::size_t n, std::size_t dim, std::size_t cluster_count, std::uint64_t seed) {
    if (n < 1 || dim < 1) {
        throw std::invalid_argument("synthesis requires n >= 1 and dim >= 1");
    }
    cluster_count = std::max<std::size_t>(cluster_count, 1);
    std::mt19937_64 rng(seed);

    VectorFile vecs;
    vecs.dim = dim;
    vecs.data = mixture_vectors(n, dim, cluster_count, rng);

    std::vector<double> attrs(n);
    for (double& a : attrs) {
        a = uniform01(rng);
    }

    std::ostringstream label;
    label << "synthetic(n=" << n << ",dim=" << dim << ",clusters=" << cluster_count
          << ",seed=" << seed << ")";
    Dataset dataset = make_ranked_dataset(vecs, attrs, label.str());

    // report attributes in rank order, matching the dataset rows
    std::vector<double> sorted_attrs = attrs;
    std::sort(sorted_attrs.begin(), sorted_attrs.end());
    return SynthesizedData{std::make_shared<const Dataset>(std::move(dataset)),
                           std::move(sorted_attrs)};
}

VectorFile
synthesize_queries(std::size_t count, std::size_t dim, std::size_t cluster_count,
                   std::uint64_t seed) {
    if (count < 1 || dim < 1) {
        throw std::invalid_argument("synthesis requires count >= 1 and dim >= 1");
    }
    cluster_count = std::max<std::size_t>(cluster_count, 1);
    std::mt19937_64 rng(seed);
    VectorFile out;
    out.dim = dim;
    out.data = mixture_vectors(count, dim, cluster_count, rng);
    return out;
}

std::string
range_mode_label(const WorkloadSpec& spec) {
    switch (spec.mode) {
        case RangeMode::Mix:
            return "mix";
        case RangeMode::HalfBounded:
            return "half";
        case RangeMode::FixedLength: {
            std::ostringstream s;
            s << "fixed:" << spec.fraction;
            return s.str();
        }
    }
    return "unknown";
}

std::vector<Query>
gen_queries(const WorkloadSpec& spec, const Dataset& dataset, const VectorFile& query_vectors) {
    if (query_vectors.count() == 0) {
        throw std::invalid_argument("query vector pool is empty");
    }
    if (query_vectors.dim != dataset.dim()) {
        throw std::invalid_argument("query vector dimensionality does not match the dataset");
    }
    const Rank n = static_cast<Rank>(dataset.size());
    std::mt19937_64 rng(spec.seed);
    auto uniform_rank = [&]() { return static_cast<Rank>(uniform01(rng) * n) % n + 1; };

    std::vector<Query> out;
    out.reserve(spec.count);
    for (std::uint32_t i = 0; i < spec.count; ++i) {
        RankRange range;
        switch (spec.mode) {
            case RangeMode::Mix: {
                Rank a = uniform_rank();
                Rank b = uniform_rank();
                range = {std::min(a, b), std::max(a, b)};
                break;
            }
            case RangeMode::HalfBounded:
                range = {1, uniform_rank()};
                break;
            case RangeMode::FixedLength: {
                if (spec.fraction <= 0.0 || spec.fraction > 1.0) {
                    throw std::invalid_argument("fixed-length fraction must lie in (0, 1]");
                }
                const Rank len = std::clamp<Rank>(
                    static_cast<Rank>(std::llround(spec.fraction * n)), 1, n);
                const Rank l = static_cast<Rank>(uniform01(rng) * (n - len + 1)) % (n - len + 1) + 1;
                range = {l, static_cast<Rank>(l + len - 1)};
                break;
            }
        }
        const std::span<const float> v = query_vectors.row(i % query_vectors.count());
        out.push_back(Query{{v.begin(), v.end()}, range, spec.k});
    }
    return out;
}

SearchResult
HalfEngine::run(const Query& query, const SearchParams& params) const {
    HalfIndex::QueryResult r = index_.query(query, params);
    return SearchResult{std::move(r.neighbors), r.stats, false};
}

SearchResult
TreeEngine::run(const Query& query, const SearchParams& params) const {
    TreeIndex::QueryResult r = index_.query(query, params);
    return SearchResult{std::move(r.neighbors), r.stats, false};
}

SearchResult
RootPostEngine::run(const Query& query, const SearchParams& params) const {
    return graph_.search_rf_post(dataset_, query, params);
}

namespace {

constexpr char kGtMagic[4] = {'R', 'F', 'G', 'T'};

std::uint64_t
ground_truth_key(const Dataset& dataset, std::span<const Query> queries) {
    std::uint64_t h = dataset.content_hash();
    for (const Query& q : queries) {
        h = fnv1a(&q.range, sizeof(q.range), h);
        h = fnv1a(&q.k, sizeof(q.k), h);
        h = fnv1a(q.vec.data(), q.vec.size() * sizeof(float), h);
    }
    return h;
}

bool
try_load_ground_truth(const std::filesystem::path& path, std::uint64_t key,
                      std::size_t query_count, std::vector<ExactResult>& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return false;
    }
    char magic[4];
    std::uint64_t stored_key = 0;
    std::uint32_t count = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&stored_key), 8);
    in.read(reinterpret_cast<char*>(&count), 4);
    if (!in || std::memcmp(magic, kGtMagic, 4) != 0 || stored_key != key || count != query_count) {
        return false;
    }
    std::vector<ExactResult> loaded(count);
    for (ExactResult& res : loaded) {
        std::uint32_t m = 0;
        in.read(reinterpret_cast<char*>(&m), 4);
        if (!in) {
            return false;
        }
        res.neighbors.resize(m);
        for (Neighbor& nb : res.neighbors) {
            in.read(reinterpret_cast<char*>(&nb.position), 4);
            in.read(reinterpret_cast<char*>(&nb.distance), 8);
        }
        if (!in) {
            return false;
        }
    }
    out = std::move(loaded);
    return true;
}

void
store_ground_truth(const std::filesystem::path& path, std::uint64_t key,
                   std::span<const ExactResult> results) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        return;  // cache is best-effort
    }
    out.write(kGtMagic, 4);
    out.write(reinterpret_cast<const char*>(&key), 8);
    const std::uint32_t count = static_cast<std::uint32_t>(results.size());
    out.write(reinterpret_cast<const char*>(&count), 4);
    for (const ExactResult& res : results) {
        const std::uint32_t m = static_cast<std::uint32_t>(res.neighbors.size());
        out.write(reinterpret_cast<const char*>(&m), 4);
        for (const Neighbor& nb : res.neighbors) {
            out.write(reinterpret_cast<const char*>(&nb.position), 4);
            out.write(reinterpret_cast<const char*>(&nb.distance), 8);
        }
    }
}

}  // namespace

std::vector<ExactResult>
ground_truth(const Dataset& dataset, std::span<const Query> queries,
             const std::optional<std::filesystem::path>& cache_path) {
    const std::uint64_t key = ground_truth_key(dataset, queries);
    std::vector<ExactResult> results;
    if (cache_path && try_load_ground_truth(*cache_path, key, queries.size(), results)) {
        return results;
    }
    results.reserve(queries.size());
    for (const Query& q : queries) {
        results.push_back(exact_rfknn(dataset, q));
    }
    if (cache_path) {
        store_ground_truth(*cache_path, key, results);
    }
    return results;
}

std::vector<BenchRow>
run_benchmark(const QueryEngine& engine, const Dataset& dataset, std::span<const Query> queries,
              std::span<const ExactResult> exact, const WorkloadSpec& spec,
              std::span<const std::uint32_t> beams) {
    if (exact.size() != queries.size()) {
        throw std::invalid_argument("ground truth does not match the query set");
    }
    for (const Query& q : queries) {
        if (q.vec.size() != dataset.dim() || q.range.r > dataset.size()) {
            throw std::invalid_argument("query does not match the dataset");
        }
    }
    std::vector<BenchRow> rows;
    rows.reserve(beams.size());
    for (std::uint32_t beam : beams) {
        SearchParams params;
        params.beam = beam;

        std::vector<SearchResult> results;
        results.reserve(queries.size());
        const auto start = std::chrono::steady_clock::now();
        for (const Query& q : queries) {
            results.push_back(engine.run(q, params));
        }
        const auto stop = std::chrono::steady_clock::now();
        const double seconds = std::chrono::duration<double>(stop - start).count();

        double recall_sum = 0.0;
        double dist_sum = 0.0;
        double graph_sum = 0.0;
        for (std::size_t i = 0; i < queries.size(); ++i) {
            recall_sum += recall(results[i].neighbors, exact[i], spec.k);
            dist_sum += static_cast<double>(results[i].stats.dist_computations);
            graph_sum += static_cast<double>(results[i].stats.graphs_consulted);
        }
        const double count = static_cast<double>(queries.size());
        BenchRow row;
        row.method = engine.name();
        row.beam = beam;
        row.k = spec.k;
        row.range_mode = range_mode_label(spec);
        row.recall = queries.empty() ? 0.0 : recall_sum / count;
        row.qps = seconds > 0.0 ? count / seconds : 0.0;
        row.mean_dist = queries.empty() ? 0.0 : dist_sum / count;
        row.mean_graphs = queries.empty() ? 0.0 : graph_sum / count;
        row.wall_seconds = seconds;
        rows.push_back(std::move(row));
    }
    return rows;
}

void
write_csv(const std::filesystem::path& path, std::span<const BenchRow> rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);  // binary keeps LF endings
    if (!out) {
        throw FormatError("cannot open " + path.string() + " for writing");
    }
    out << "method,beam,k,range_mode,recall,qps,mean_dist,mean_graphs\n";
    for (const BenchRow& row : rows) {
        out << row.method << ',' << row.beam << ',' << row.k << ',' << row.range_mode << ','
            << row.recall << ',' << row.qps << ',' << row.mean_dist << ',' << row.mean_graphs
            << '\n';
    }
}

SweepReport
containment_sweep(std::uint32_t instances, std::uint32_t max_n, std::uint32_t max_d,
                  std::uint32_t max_k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SweepReport report;
    for (std::uint32_t i = 0; i < instances; ++i) {
        const std::uint32_t k = 1 + static_cast<std::uint32_t>(uniform01(rng) * max_k) % max_k;
        const std::uint32_t n =
            std::max<std::uint32_t>(k + 4, static_cast<std::uint32_t>(uniform01(rng) * max_n) + 1);
        const std::uint32_t d = 1 + static_cast<std::uint32_t>(uniform01(rng) * max_d) % max_d;
        SynthesizedData data = synthesize_dataset(n, d, 1 + i % 4, rng());

        std::vector<float> q(d);
        for (float& x : q) {
            x = static_cast<float>((uniform01(rng) * 2.0 - 1.0) * 10.0);
        }
        const Rank l = 1 + static_cast<Rank>(uniform01(rng) * (n - k + 1)) % (n - k + 1);
        const Rank r_min = static_cast<Rank>(l + k - 1);
        const Rank r = r_min + static_cast<Rank>(uniform01(rng) * (n - r_min + 1)) % (n - r_min + 1);

        const ContainmentCheck check = check_containment(*data.dataset, q, {l, r}, k);
        ++report.checked;
        if (!check.holds) {
            ++report.violations;
            report.detail += "containment failed at instance " + std::to_string(i) + "\n";
        }
    }
    return report;
}

SweepReport
order_stats_sweep(std::span<const OrderStatsCase> cases, std::uint32_t trials,
                  double rel_tolerance, std::uint64_t seed) {
    SweepReport report;
    std::ostringstream detail;
    std::uint64_t case_seed = seed;
    for (const OrderStatsCase& c : cases) {
        const double closed = expected_draws_closed_form(c.n, c.in_range, c.k);
        const double empirical = simulate_expected_draws(c.n, c.in_range, c.k, trials, case_seed++);
        const double rel = std::abs(empirical - closed) / closed;
        ++report.checked;
        detail << "N=" << c.n << " K=" << c.in_range << " k=" << c.k << " closed=" << closed
               << " empirical=" << empirical << " rel_err=" << rel << "\n";
        if (rel > rel_tolerance) {
            ++report.violations;
        }
    }
    report.detail = detail.str();
    return report;
}

SweepReport
two_index_bound_sweep(const std::shared_ptr<const Dataset>& dataset,
                      std::span<const std::uint32_t> fanouts, std::uint32_t queries,
                      std::uint64_t seed, const GraphParams& graph_params,
                      std::uint32_t leaf_threshold) {
    SweepReport report;
    std::ostringstream detail;
    const VectorFile qvecs = synthesize_queries(std::min<std::size_t>(queries, 256),
                                                dataset->dim(), 4, seed ^ 0xabcdef);
    for (std::uint32_t fanout : fanouts) {
        TreeParams tp;
        tp.fanout = fanout;
        tp.leaf_threshold = leaf_threshold;
        const TreeIndex tree = TreeIndex::build(dataset, tp, graph_params);
        const double c = tree.params().resolved_c();

        WorkloadSpec spec;
        spec.mode = RangeMode::Mix;
        spec.count = queries;
        spec.k = 10;
        spec.seed = seed + fanout;
        const std::vector<Query> batch = gen_queries(spec, *dataset, qvecs);

        SearchParams params;
        params.beam = 16;
        std::uint32_t worst = 0;
        for (const Query& q : batch) {
            const TreeIndex::QueryResult res = tree.query(q, params);
            worst = std::max(worst, res.stats.graphs_consulted);
            ++report.checked;
            if (res.stats.graphs_consulted > 2) {
                ++report.violations;
            }
            for (const TreeIndex::ConsultedGraph& g : res.consulted) {
                const double factor = static_cast<double>(g.fragment.length()) /
                                      static_cast<double>(g.node_range.length());
                if (factor + 1e-12 < c) {
                    ++report.violations;
                    detail << "elastic floor violated: fragment [" << g.fragment.l << ","
                           << g.fragment.r << "] on node [" << g.node_range.l << ","
                           << g.node_range.r << "]\n";
                }
            }
        }
        detail << "fanout=" << fanout << " c=" << c << " queries=" << batch.size()
               << " max_graphs_consulted=" << worst << "\n";
    }
    report.detail = detail.str();
    return report;
}

SweepReport
half_bound_sweep(const HalfIndex& index, std::uint32_t queries, std::uint64_t seed) {
    SweepReport report;
    std::ostringstream detail;
    const Dataset& dataset = *index.dataset();
    const VectorFile qvecs = synthesize_queries(std::min<std::size_t>(queries, 256), dataset.dim(),
                                                4, seed ^ 0xfedcba);
    WorkloadSpec spec;
    spec.mode = RangeMode::HalfBounded;
    spec.count = queries;
    spec.k = 10;
    spec.seed = seed;
    const std::vector<Query> batch = gen_queries(spec, dataset, qvecs);

    SearchParams params;
    params.beam = 16;
    double worst_factor = 1.0;
    for (const Query& q : batch) {
        const HalfIndex::QueryResult res = index.query(q, params);
        ++report.checked;
        if (res.stats.graphs_consulted != 1) {
            ++report.violations;
            detail << "expected one graph, got " << res.stats.graphs_consulted << "\n";
        }
        const double stored = static_cast<double>(res.snapshot_range.length());
        const double factor = static_cast<double>(q.range.length()) / stored;
        const double floor = 1.0 / static_cast<double>(index.params().base) - 1.0 / stored;
        worst_factor = std::min(worst_factor, factor);
        if (factor + 1e-12 < floor) {
            ++report.violations;
            detail << "elastic floor violated: |query|=" << q.range.length()
                   << " |stored|=" << res.snapshot_range.length() << "\n";
        }
    }
    detail << "queries=" << batch.size() << " worst_factor=" << worst_factor << "\n";
    report.detail = detail.str();
    return report;
}

}  // namespace rfann
