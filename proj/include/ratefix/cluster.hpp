#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ratefix/panel.hpp"

namespace ratefix {

/// Symmetric, zero-diagonal, non-negative matrix stored as the condensed
/// upper triangle (row-major over i < j).
class DistanceMatrix {
public:
    /// `condensed` has n*(n-1)/2 entries for n labels.
    DistanceMatrix(std::vector<std::string> labels, std::vector<double> condensed);

    /// Builds from a full square matrix; checks symmetry and the diagonal.
    static DistanceMatrix from_square(std::vector<std::string> labels,
                                      const std::vector<std::vector<double>>& square);

    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<double>& condensed() const { return values_; }

    double operator()(std::size_t i, std::size_t j) const;

private:
    std::size_t index(std::size_t i, std::size_t j) const;

    std::vector<std::string> labels_;
    std::vector<double> values_;
};

enum class Linkage { Single, Ward };

Linkage parse_linkage(std::string_view name);
std::string_view linkage_name(Linkage linkage);

struct Merge {
    std::size_t left;   // node id: leaves 0..n-1, merge k is node n+k
    std::size_t right;
    double height;
    std::size_t size;
};

class Dendrogram {
public:
    /// Validates the tree structure (n-1 merges, each node consumed once,
    /// size bookkeeping, non-negative heights).
    Dendrogram(std::vector<std::string> leaves, std::vector<Merge> merges);

    std::size_t leaf_count() const { return leaves_.size(); }
    const std::vector<std::string>& leaves() const { return leaves_; }
    const std::vector<Merge>& merges() const { return merges_; }
    double root_height() const { return merges_.back().height; }

    /// Height of a node: 0 for leaves.
    double node_height(std::size_t node) const;
    /// Leaf indices under a node, ascending.
    std::vector<std::size_t> members(std::size_t node) const;

private:
    std::vector<std::string> leaves_;
    std::vector<Merge> merges_;
};

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Per-series z-score; a constant series maps to all zeros.
std::vector<double> z_normalize(std::span<const double> series);

DistanceMatrix distance_matrix(const PanelWindow& window, bool normalize = false);

/// Bottom-up agglomeration. Single linkage merges at the closest cross pair;
/// Ward runs the Lance-Williams recurrence on squared distances and reports
/// sqrt of the squared merge distance as the height. Ties go to the
/// lexicographically smallest (left, right) node pair.
Dendrogram agglomerate(const DistanceMatrix& dist, Linkage linkage);

/// Cluster index per leaf after undoing the last k-1 merges. Clusters are
/// numbered in order of their first leaf.
std::vector<std::size_t> cut(const Dendrogram& dendrogram, std::size_t k);

// Serialization. Numbers carry six fractional digits.
std::string to_newick(const Dendrogram& dendrogram);
std::string to_dot(const Dendrogram& dendrogram);
std::string to_json(const Dendrogram& dendrogram, Linkage linkage);

}  // namespace ratefix

namespace ratefix {

/// Edge weights of a minimum spanning tree of the complete graph, ascending
/// (Prim's algorithm). Equal to single-linkage merge heights.
std::vector<double> minimum_spanning_weights(const DistanceMatrix& dist);

}  // namespace ratefix
