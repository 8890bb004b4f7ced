#include "nlmc/sampling.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <string>

#include "nlmc/errors.hpp"
#include "nlmc/parallel.hpp"
#include "nlmc/rng.hpp"

namespace nlmc {

SparseGraph::SparseGraph(std::size_t node_count, std::vector<std::int64_t> row_offsets,
                         std::vector<std::int32_t> columns, double alpha, double gamma,
                         std::uint64_t seed, std::size_t clamped_pairs)
    : node_count_(node_count),
      row_offsets_(std::move(row_offsets)),
      columns_(std::move(columns)),
      alpha_(alpha),
      gamma_(gamma),
      seed_(seed),
      clamped_pairs_(clamped_pairs) {
    if (row_offsets_.size() != node_count_ + 1 || row_offsets_.front() != 0 ||
        static_cast<std::size_t>(row_offsets_.back()) != columns_.size()) {
        throw DomainError("inconsistent CSR row offsets");
    }
}

bool SparseGraph::has_edge(std::size_t i, std::size_t j) const {
    const auto r = row(i);
    return std::binary_search(r.begin(), r.end(), static_cast<std::int32_t>(j));
}

SparseGraph sample_graph(const CellKernelMatrix& cells, const SparsitySchedule& schedule,
                         std::uint64_t seed, unsigned threads) {
    const std::size_t size = cells.size();
    if (size >= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
        throw DomainError("node count exceeds 32-bit column index range");
    }
    const double alpha = schedule.alpha(cells.partition.n(), cells.partition.d());
    const CounterRng rng(seed);

    std::vector<std::vector<std::int32_t>> rows(size);
    std::vector<std::size_t> clamped(size, 0);
    parallel_for(size, threads, [&](std::size_t i) {
        auto& out = rows[i];
        for (std::size_t j = 0; j < size; ++j) {
            double p = alpha * cells(i, j);
            if (p <= 0.0) continue;
            if (p > 1.0) {
                if (p > 1.0 + 1e-12) ++clamped[i];
                p = 1.0;
            }
            if (rng.uniform(i * size + j) < p) out.push_back(static_cast<std::int32_t>(j));
        }
    });

    std::vector<std::int64_t> offsets(size + 1, 0);
    for (std::size_t i = 0; i < size; ++i) {
        offsets[i + 1] = offsets[i] + static_cast<std::int64_t>(rows[i].size());
    }
    std::vector<std::int32_t> columns;
    columns.reserve(static_cast<std::size_t>(offsets.back()));
    std::size_t clamped_total = 0;
    for (std::size_t i = 0; i < size; ++i) {
        columns.insert(columns.end(), rows[i].begin(), rows[i].end());
        clamped_total += clamped[i];
    }
    return SparseGraph(size, std::move(offsets), std::move(columns), alpha, schedule.gamma(), seed,
                       clamped_total);
}

DegreeStats degree_stats(const SparseGraph& g) {
    DegreeStats s;
    if (g.node_count() == 0) return s;
    s.min = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const std::size_t deg = g.row(i).size();
        s.min = std::min(s.min, deg);
        s.max = std::max(s.max, deg);
        ++s.histogram[deg];
    }
    s.mean = static_cast<double>(g.edge_count()) / static_cast<double>(g.node_count());
    return s;
}

void adjacency_pixmap(const SparseGraph& g, const std::filesystem::path& path) {
    const std::size_t size = g.node_count();
    if (size > kMaxPixmapNodes) {
        throw DomainError("pixmap limited to " + std::to_string(kMaxPixmapNodes) + " nodes, got " +
                          std::to_string(size));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing", path.string());
    out << "P5\n" << size << ' ' << size << "\n255\n";
    std::vector<unsigned char> line(size);
    for (std::size_t i = 0; i < size; ++i) {
        std::fill(line.begin(), line.end(), static_cast<unsigned char>(255));
        for (const auto j : g.row(i)) line[static_cast<std::size_t>(j)] = 0;
        out.write(reinterpret_cast<const char*>(line.data()), static_cast<std::streamsize>(size));
    }
    if (!out) throw IoError("failed writing " + path.string(), path.string());
}

void write_edge_list(const SparseGraph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing", path.string());
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        for (const auto j : g.row(i)) out << i << ' ' << j << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string(), path.string());
}

}  // namespace nlmc
