#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "nlmc/graphon.hpp"

namespace nlmc {

// Directed adjacency in compressed sparse row form. Immutable once built.
class SparseGraph {
public:
    SparseGraph(std::size_t node_count, std::vector<std::int64_t> row_offsets,
                std::vector<std::int32_t> columns, double alpha, double gamma, std::uint64_t seed,
                std::size_t clamped_pairs = 0);

    std::size_t node_count() const noexcept { return node_count_; }
    std::size_t edge_count() const noexcept { return columns_.size(); }
    std::span<const std::int64_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const std::int32_t> columns() const noexcept { return columns_; }
    std::span<const std::int32_t> row(std::size_t i) const {
        return std::span<const std::int32_t>(columns_).subspan(
            static_cast<std::size_t>(row_offsets_[i]),
            static_cast<std::size_t>(row_offsets_[i + 1] - row_offsets_[i]));
    }
    bool has_edge(std::size_t i, std::size_t j) const;

    double alpha() const noexcept { return alpha_; }
    double gamma() const noexcept { return gamma_; }
    std::uint64_t seed() const noexcept { return seed_; }
    // Pairs of a declared-bounded kernel whose probability had to be clamped to 1.
    std::size_t clamped_pairs() const noexcept { return clamped_pairs_; }

    bool operator==(const SparseGraph&) const = default;

private:
    std::size_t node_count_;
    std::vector<std::int64_t> row_offsets_;
    std::vector<std::int32_t> columns_;
    double alpha_;
    double gamma_;
    std::uint64_t seed_;
    std::size_t clamped_pairs_;
};

// Each ordered pair (i, j), diagonal included, is an independent
// Bernoulli(alpha_n * W_ij) draw keyed by (seed, i * N + j).
SparseGraph sample_graph(const CellKernelMatrix& cells, const SparsitySchedule& schedule,
                         std::uint64_t seed, unsigned threads = 1);

struct DegreeStats {
    double mean = 0.0;
    std::size_t min = 0;
    std::size_t max = 0;
    std::map<std::size_t, std::size_t> histogram;  // out-degree -> node count
};

DegreeStats degree_stats(const SparseGraph& g);

// Binary PGM (P5): black for an edge, white otherwise; row = source node.
void adjacency_pixmap(const SparseGraph& g, const std::filesystem::path& path);

// One "src dst" line per edge in (src, dst) order, zero-based.
void write_edge_list(const SparseGraph& g, const std::filesystem::path& path);

inline constexpr std::size_t kMaxPixmapNodes = 4096;

}  // namespace nlmc
