#include "ratefix/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ratefix/error.hpp"

namespace ratefix {

DistanceMatrix::DistanceMatrix(std::vector<std::string> labels, std::vector<double> condensed)
    : labels_(std::move(labels)), values_(std::move(condensed)) {
    const std::size_t n = labels_.size();
    if (values_.size() != n * (n - 1) / 2 && !(n == 0 && values_.empty())) {
        throw Error(Errc::InvalidArgument, "condensed distance vector has the wrong length");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw Error(Errc::NonFiniteValue, "distance is not finite");
        if (v < 0.0) throw Error(Errc::InvalidArgument, "distance is negative");
    }
}

DistanceMatrix DistanceMatrix::from_square(std::vector<std::string> labels,
                                           const std::vector<std::vector<double>>& square) {
    const std::size_t n = labels.size();
    if (square.size() != n) throw Error(Errc::InvalidArgument, "matrix rows do not match labels");
    std::vector<double> condensed;
    condensed.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        if (square[i].size() != n) throw Error(Errc::InvalidArgument, "distance matrix is not square");
        if (square[i][i] != 0.0) throw Error(Errc::InvalidArgument, "distance matrix diagonal must be zero");
        for (std::size_t j = i + 1; j < n; ++j) {
            if (square[i][j] != square[j][i]) throw Error(Errc::InvalidArgument, "distance matrix is not symmetric");
            condensed.push_back(square[i][j]);
        }
    }
    return DistanceMatrix(std::move(labels), std::move(condensed));
}

std::size_t DistanceMatrix::index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    const std::size_t n = labels_.size();
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

double DistanceMatrix::operator()(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    return values_[index(i, j)];
}

Linkage parse_linkage(std::string_view name) {
    if (name == "single") return Linkage::Single;
    if (name == "ward") return Linkage::Ward;
    throw Error(Errc::InvalidArgument, "unknown linkage '" + std::string(name) + "' (single|ward)");
}

std::string_view linkage_name(Linkage linkage) {
    return linkage == Linkage::Single ? "single" : "ward";
}

Dendrogram::Dendrogram(std::vector<std::string> leaves, std::vector<Merge> merges)
    : leaves_(std::move(leaves)), merges_(std::move(merges)) {
    const std::size_t n = leaves_.size();
    if (n < 2) throw Error(Errc::DegeneratePanel, "dendrogram needs at least 2 leaves");
    if (merges_.size() != n - 1) throw Error(Errc::InvalidArgument, "dendrogram needs exactly n-1 merges");
    std::vector<std::size_t> sizes(2 * n - 1, 1);
    std::vector<bool> used(2 * n - 1, false);
    for (std::size_t k = 0; k < merges_.size(); ++k) {
        const Merge& m = merges_[k];
        const std::size_t node = n + k;
        if (m.left >= node || m.right >= node || m.left == m.right) {
            throw Error(Errc::InvalidArgument, "merge refers to an undefined node");
        }
        if (used[m.left] || used[m.right]) throw Error(Errc::InvalidArgument, "node merged twice");
        if (!(m.height >= 0.0) || !std::isfinite(m.height)) {
            throw Error(Errc::InvalidArgument, "merge height must be finite and non-negative");
        }
        used[m.left] = used[m.right] = true;
        sizes[node] = sizes[m.left] + sizes[m.right];
        if (m.size != sizes[node]) throw Error(Errc::InvalidArgument, "merge size bookkeeping is inconsistent");
    }
}

double Dendrogram::node_height(std::size_t node) const {
    return node < leaves_.size() ? 0.0 : merges_.at(node - leaves_.size()).height;
}

std::vector<std::size_t> Dendrogram::members(std::size_t node) const {
    std::vector<std::size_t> out;
    std::vector<std::size_t> stack{node};
    while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        if (cur < leaves_.size()) {
            out.push_back(cur);
        } else {
            const Merge& m = merges_.at(cur - leaves_.size());
            stack.push_back(m.left);
            stack.push_back(m.right);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "series lengths differ");
    if (a.empty()) throw Error(Errc::LengthMismatch, "series are empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
            throw Error(Errc::NonFiniteValue, "series value is not finite");
        }
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

std::vector<double> z_normalize(std::span<const double> series) {
    std::vector<double> out(series.begin(), series.end());
    if (out.empty()) return out;
    const double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
    double ss = 0.0;
    for (double v : out) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(out.size()));
    for (double& v : out) v = sd > 0.0 ? (v - mean) / sd : 0.0;
    return out;
}

DistanceMatrix distance_matrix(const PanelWindow& window, bool normalize) {
    const std::size_t n = window.bank_count();
    std::vector<std::vector<double>> rows;
    rows.reserve(n);
    std::vector<std::string> labels;
    for (std::size_t b = 0; b < n; ++b) {
        auto values = window.row_values(b);
        rows.push_back(normalize ? z_normalize(values) : std::move(values));
        labels.push_back(window.banks()[b].str());
    }
    std::vector<double> condensed;
    condensed.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) condensed.push_back(euclidean_distance(rows[i], rows[j]));
    }
    return DistanceMatrix(std::move(labels), std::move(condensed));
}

Dendrogram agglomerate(const DistanceMatrix& dist, Linkage linkage) {
    const std::size_t n = dist.size();
    if (n < 2) throw Error(Errc::DegeneratePanel, "agglomeration needs at least 2 items");

    // Slot-indexed working matrix; a merged cluster reuses the lower slot.
    const bool ward = linkage == Linkage::Ward;
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = dist(i, j);
            d[i * n + j] = ward ? v * v : v;
        }
    }
    std::vector<std::size_t> node(n);
    std::iota(node.begin(), node.end(), 0);
    std::vector<std::size_t> size(n, 1);
    std::vector<bool> active(n, true);

    std::vector<Merge> merges;
    merges.reserve(n - 1);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t best_a = 0, best_b = 0;
        double best = std::numeric_limits<double>::infinity();
        std::pair<std::size_t, std::size_t> best_key{std::numeric_limits<std::size_t>::max(), 0};
        for (std::size_t a = 0; a < n; ++a) {
            if (!active[a]) continue;
            for (std::size_t b = a + 1; b < n; ++b) {
                if (!active[b]) continue;
                const double v = d[a * n + b];
                const std::pair<std::size_t, std::size_t> key{std::min(node[a], node[b]), std::max(node[a], node[b])};
                if (v < best || (v == best && key < best_key)) {
                    best = v;
                    best_key = key;
                    best_a = a;
                    best_b = b;
                }
            }
        }

        const std::size_t na = size[best_a];
        const std::size_t nb = size[best_b];
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == best_a || k == best_b) continue;
            const double dak = d[best_a * n + k];
            const double dbk = d[best_b * n + k];
            double updated;
            if (ward) {
                const auto nk = static_cast<double>(size[k]);
                const auto fa = static_cast<double>(na);
                const auto fb = static_cast<double>(nb);
                updated = ((fa + nk) * dak + (fb + nk) * dbk - nk * best) / (fa + fb + nk);
                updated = std::max(updated, 0.0);
            } else {
                updated = std::min(dak, dbk);
            }
            d[best_a * n + k] = d[k * n + best_a] = updated;
        }

        const double height = ward ? std::sqrt(best) : best;
        merges.push_back(Merge{best_key.first, best_key.second, height, na + nb});
        node[best_a] = n + step;
        size[best_a] = na + nb;
        active[best_b] = false;
    }
    return Dendrogram(dist.labels(), std::move(merges));
}

std::vector<std::size_t> cut(const Dendrogram& dendrogram, std::size_t k) {
    const std::size_t n = dendrogram.leaf_count();
    if (k < 1 || k > n) throw Error(Errc::InvalidK, "cluster count must lie in [1, n]");

    std::vector<std::size_t> parent(2 * n - 1);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t m = 0; m < n - k; ++m) {
        const Merge& merge = dendrogram.merges()[m];
        parent[find(merge.left)] = n + m;
        parent[find(merge.right)] = n + m;
    }

    std::vector<std::size_t> assignment(n);
    std::vector<std::pair<std::size_t, std::size_t>> seen;  // root -> cluster index
    for (std::size_t leaf = 0; leaf < n; ++leaf) {
        const std::size_t root = find(leaf);
        auto it = std::find_if(seen.begin(), seen.end(), [&](const auto& p) { return p.first == root; });
        if (it == seen.end()) {
            seen.emplace_back(root, seen.size());
            assignment[leaf] = seen.size() - 1;
        } else {
            assignment[leaf] = it->second;
        }
    }
    return assignment;
}

}  // namespace ratefix

namespace ratefix {

std::vector<double> minimum_spanning_weights(const DistanceMatrix& dist) {
    const std::size_t n = dist.size();
    std::vector<double> weights;
    if (n < 2) return weights;
    std::vector<bool> in_tree(n, false);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    best[0] = 0.0;
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t next = n;
        for (std::size_t v = 0; v < n; ++v) {
            if (!in_tree[v] && (next == n || best[v] < best[next])) next = v;
        }
        in_tree[next] = true;
        if (step > 0) weights.push_back(best[next]);
        for (std::size_t v = 0; v < n; ++v) {
            if (!in_tree[v]) best[v] = std::min(best[v], dist(next, v));
        }
    }
    std::sort(weights.begin(), weights.end());
    return weights;
}

}  // namespace ratefix
