#include "ratefix/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "json_util.hpp"
#include "ratefix/error.hpp"

namespace ratefix {

namespace {

constexpr const char* kCollusionAdvisory =
    "advisory: a large cohesive group looks the same as benign structure such as a "
    "local-versus-international split. Banks that coordinate on a common quote and move "
    "the fixing only mildly form such a group, so its presence is not evidence either way "
    "and needs investigation beyond the dendrogram.";

}  // namespace

std::vector<IsolationScore> isolation_scores(const Dendrogram& dendrogram) {
    const std::size_t n = dendrogram.leaf_count();
    std::vector<IsolationScore> scores(n);
    for (std::size_t i = 0; i < n; ++i) scores[i].bank = dendrogram.leaves()[i];
    // A leaf appears as a direct child exactly once: in its first merge.
    for (const Merge& m : dendrogram.merges()) {
        if (m.left < n) scores[m.left].persistence_height = m.height;
        if (m.right < n) scores[m.right].persistence_height = m.height;
    }
    const double root = dendrogram.root_height();
    for (IsolationScore& s : scores) {
        s.normalized = root > 0.0 ? std::clamp(s.persistence_height / root, 0.0, 1.0) : 0.0;
    }
    return scores;
}

double median(std::vector<double> values) {
    if (values.empty()) throw Error(Errc::InvalidArgument, "median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

AnomalyReport flag_anomalies(const PanelWindow& window, const DetectOptions& options) {
    if (window.bank_count() < 3) {
        throw Error(Errc::PanelTooSmall, "anomaly detection needs at least 3 banks");
    }
    if (!(options.threshold_factor >= 0.0) || !std::isfinite(options.threshold_factor)) {
        throw Error(Errc::InvalidConfig, "threshold_factor must be a finite non-negative number");
    }
    const DistanceMatrix dist = distance_matrix(window, options.normalize);
    const Dendrogram tree = agglomerate(dist, options.linkage);

    AnomalyReport report;
    report.window_label = window.label();
    report.linkage = options.linkage;
    report.threshold_factor = options.threshold_factor;

    std::vector<double> heights;
    for (const Merge& m : tree.merges()) heights.push_back(m.height);
    report.median_merge_height = median(heights);
    report.threshold_used = options.threshold_factor * report.median_merge_height;

    const auto scores = isolation_scores(tree);
    for (const IsolationScore& s : scores) {
        report.banks.push_back(s.bank);
        if (s.persistence_height > report.threshold_used) report.flagged.push_back(s.bank);
    }
    report.scores = scores;
    std::stable_sort(report.scores.begin(), report.scores.end(),
                     [](const IsolationScore& a, const IsolationScore& b) {
                         if (a.normalized != b.normalized) return a.normalized > b.normalized;
                         return a.persistence_height > b.persistence_height;
                     });
    report.group_structure = cut(tree, 2);

    const Dendrogram single = options.linkage == Linkage::Single ? tree : agglomerate(dist, Linkage::Single);
    const auto mst = minimum_spanning_weights(dist);
    for (std::size_t k = 0; k < mst.size(); ++k) {
        if (single.merges()[k].height != mst[k]) report.single_linkage_mst_consistent = false;
    }
    return report;
}

AverageRateTable average_daily_rates(const PanelWindow& window) {
    AverageRateTable table;
    table.window_label = window.label();
    std::int64_t total = 0;
    const auto days = static_cast<std::int64_t>(window.date_count());
    for (std::size_t b = 0; b < window.bank_count(); ++b) {
        std::int64_t sum = 0;
        for (Decimal r : window.row(b)) sum += r.micros();
        total += sum;
        table.rows.push_back({window.banks()[b].str(), Decimal::from_ratio(sum, days), false});
    }
    table.rows.push_back(
        {"Overall", Decimal::from_ratio(total, days * static_cast<std::int64_t>(window.bank_count())), true});
    std::stable_sort(table.rows.begin(), table.rows.end(), [](const AverageRateRow& a, const AverageRateRow& b) {
        if (a.rate != b.rate) return a.rate < b.rate;
        return a.overall < b.overall;
    });
    return table;
}

CollusionCaveat collusion_caveat_report(const AnomalyReport& report, const PanelWindow& window,
                                        bool normalize) {
    if (report.group_structure.size() != window.bank_count()) {
        throw Error(Errc::InvalidArgument, "report does not belong to this window");
    }
    const DistanceMatrix dist = distance_matrix(window, normalize);
    const std::size_t groups = *std::max_element(report.group_structure.begin(), report.group_structure.end()) + 1;

    CollusionCaveat caveat;
    caveat.group_sizes.assign(groups, 0);
    std::vector<double> sums(groups, 0.0);
    std::vector<std::size_t> pairs(groups, 0);
    const auto& g = report.group_structure;
    for (std::size_t i = 0; i < g.size(); ++i) {
        ++caveat.group_sizes[g[i]];
        for (std::size_t j = i + 1; j < g.size(); ++j) {
            if (g[i] == g[j]) {
                sums[g[i]] += dist(i, j);
                ++pairs[g[i]];
            }
        }
    }
    for (std::size_t c = 0; c < groups; ++c) {
        caveat.within_group_mean_distance.push_back(pairs[c] ? sums[c] / static_cast<double>(pairs[c]) : 0.0);
    }
    caveat.largest_group = static_cast<std::size_t>(
        std::max_element(caveat.group_sizes.begin(), caveat.group_sizes.end()) - caveat.group_sizes.begin());
    caveat.largest_group_cohesion = caveat.within_group_mean_distance[caveat.largest_group];
    caveat.advisory = kCollusionAdvisory;
    return caveat;
}

std::string to_json(const AnomalyReport& report, const CollusionCaveat* caveat) {
    using detail::round6;
    nlohmann::ordered_json j;
    j["window_label"] = report.window_label;
    j["linkage"] = linkage_name(report.linkage);
    auto scores = nlohmann::ordered_json::array();
    for (const IsolationScore& s : report.scores) {
        scores.push_back({{"bank", s.bank},
                          {"persistence_height", round6(s.persistence_height)},
                          {"normalized", round6(s.normalized)}});
    }
    j["scores"] = std::move(scores);
    j["flagged"] = report.flagged;
    j["threshold_rule"] = kThresholdRule;
    j["threshold_factor"] = round6(report.threshold_factor);
    j["median_merge_height"] = round6(report.median_merge_height);
    j["threshold_used"] = round6(report.threshold_used);
    auto groups = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < report.banks.size(); ++i) groups[report.banks[i]] = report.group_structure[i];
    j["group_structure"] = std::move(groups);
    j["single_linkage_mst_consistent"] = report.single_linkage_mst_consistent;
    if (caveat) {
        auto within = nlohmann::ordered_json::array();
        for (double d : caveat->within_group_mean_distance) within.push_back(round6(d));
        j["collusion_caveat"] = {{"group_sizes", caveat->group_sizes},
                                 {"within_group_mean_distance", std::move(within)},
                                 {"largest_group", caveat->largest_group},
                                 {"largest_group_cohesion", round6(caveat->largest_group_cohesion)},
                                 {"advisory", caveat->advisory}};
    }
    return j.dump(2);
}

std::string to_text(const AnomalyReport& report, const CollusionCaveat* caveat) {
    std::ostringstream out;
    out << "window " << report.window_label << "  linkage " << linkage_name(report.linkage) << '\n';
    out << "rule: " << kThresholdRule << "\n";
    out << "threshold " << detail::fixed6(report.threshold_used) << " (factor "
        << detail::fixed6(report.threshold_factor) << " x median " << detail::fixed6(report.median_merge_height)
        << ")\n\n";
    out << std::left << std::setw(20) << "bank" << std::setw(14) << "persistence" << std::setw(12) << "normalized"
        << "flag\n";
    for (const IsolationScore& s : report.scores) {
        const bool flagged = std::find(report.flagged.begin(), report.flagged.end(), s.bank) != report.flagged.end();
        out << std::left << std::setw(20) << s.bank << std::setw(14) << detail::fixed6(s.persistence_height)
            << std::setw(12) << detail::fixed6(s.normalized) << (flagged ? "*" : "") << '\n';
    }
    out << "\ngroups (k=2):";
    for (std::size_t c = 0; c < 2; ++c) {
        out << "\n  " << c << ":";
        for (std::size_t i = 0; i < report.banks.size(); ++i) {
            if (report.group_structure[i] == c) out << ' ' << report.banks[i];
        }
    }
    out << '\n';
    if (caveat) {
        out << "\nwithin-group mean distance:";
        for (std::size_t c = 0; c < caveat->group_sizes.size(); ++c) {
            out << "\n  " << c << ": size " << caveat->group_sizes[c] << ", "
                << detail::fixed6(caveat->within_group_mean_distance[c]);
        }
        out << '\n' << caveat->advisory << '\n';
    }
    return out.str();
}

std::string to_text(const AverageRateTable& table) {
    std::size_t width = 5;
    for (const auto& row : table.rows) width = std::max(width, row.label.size());
    std::ostringstream out;
    if (!table.window_label.empty()) out << table.window_label << " (average daily)\n";
    out << std::left << std::setw(static_cast<int>(width) + 2) << "Banks" << "Rates\n";
    for (const auto& row : table.rows) {
        out << std::left << std::setw(static_cast<int>(width) + 2) << row.label << row.rate.to_string(3) << '\n';
    }
    return out.str();
}

std::string to_csv(const AverageRateTable& table) {
    std::ostringstream out;
    out << "bank,rate\n";
    for (const auto& row : table.rows) {
        std::string label = row.label;
        if (label.find_first_of(",\"") != std::string::npos) {
            std::string q = "\"";
            for (char c : label) {
                if (c == '"') q += '"';
                q += c;
            }
            label = q + "\"";
        }
        out << label << ',' << row.rate.to_string(3) << '\n';
    }
    return out.str();
}

}  // namespace ratefix
