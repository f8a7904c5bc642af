#include <sstream>

#include <json.hpp>

#include "json_util.hpp"
#include "ratefix/cluster.hpp"

namespace ratefix {

namespace {

std::string newick_label(const std::string& label) {
    if (label.find_first_of(" \t()[]':;,") == std::string::npos) return label;
    std::string out = "'";
    for (char c : label) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

void write_newick(const Dendrogram& d, std::size_t node, std::ostringstream& out) {
    const std::size_t n = d.leaf_count();
    if (node < n) {
        out << newick_label(d.leaves()[node]);
        return;
    }
    const Merge& m = d.merges()[node - n];
    out << '(';
    write_newick(d, m.left, out);
    out << ':' << detail::fixed6(m.height - d.node_height(m.left)) << ',';
    write_newick(d, m.right, out);
    out << ':' << detail::fixed6(m.height - d.node_height(m.right)) << ')';
}

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string to_newick(const Dendrogram& dendrogram) {
    std::ostringstream out;
    write_newick(dendrogram, 2 * dendrogram.leaf_count() - 2, out);
    out << ';';
    return out.str();
}

std::string to_dot(const Dendrogram& dendrogram) {
    const std::size_t n = dendrogram.leaf_count();
    std::ostringstream out;
    out << "digraph dendrogram {\n";
    out << "  rankdir=TB;\n";
    for (std::size_t i = 0; i < n; ++i) {
        out << "  n" << i << " [shape=box, label=\"" << dot_escape(dendrogram.leaves()[i]) << "\"];\n";
    }
    for (std::size_t k = 0; k < dendrogram.merges().size(); ++k) {
        const Merge& m = dendrogram.merges()[k];
        const std::size_t id = n + k;
        out << "  n" << id << " [shape=ellipse, label=\"h=" << detail::fixed6(m.height) << "\"];\n";
        out << "  n" << id << " -> n" << m.left << ";\n";
        out << "  n" << id << " -> n" << m.right << ";\n";
    }
    out << "}\n";
    return out.str();
}

std::string to_json(const Dendrogram& dendrogram, Linkage linkage) {
    nlohmann::ordered_json j;
    j["linkage"] = linkage_name(linkage);
    j["leaves"] = dendrogram.leaves();
    auto merges = nlohmann::ordered_json::array();
    for (const Merge& m : dendrogram.merges()) {
        merges.push_back({{"left", m.left}, {"right", m.right}, {"height", detail::round6(m.height)}, {"size", m.size}});
    }
    j["merges"] = std::move(merges);
    return j.dump(2);
}

}  // namespace ratefix
