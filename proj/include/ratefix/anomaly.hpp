#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ratefix/cluster.hpp"
#include "ratefix/panel.hpp"

namespace ratefix {

/// How long a bank stays on its own in the dendrogram.
struct IsolationScore {
    std::string bank;
    double persistence_height = 0.0;  // height of the first merge containing the bank
    double normalized = 0.0;          // persistence / root height, 0 when the root is at 0
};

/// Scores in leaf order.
std::vector<IsolationScore> isolation_scores(const Dendrogram& dendrogram);

double median(std::vector<double> values);

inline constexpr const char* kThresholdRule =
    "flag if persistence_height > threshold_factor * median(merge heights)";

struct AnomalyReport {
    std::string window_label;
    Linkage linkage = Linkage::Ward;
    std::vector<IsolationScore> scores;  // descending by normalized score
    std::vector<std::string> flagged;    // window bank order
    double threshold_factor = 2.0;
    double median_merge_height = 0.0;
    double threshold_used = 0.0;  // threshold_factor * median_merge_height
    std::vector<std::string> banks;
    std::vector<std::size_t> group_structure;  // k=2 cut, parallel to `banks`
    // Single-linkage heights re-derived from a minimum spanning tree agree.
    bool single_linkage_mst_consistent = true;
};

struct DetectOptions {
    Linkage linkage = Linkage::Ward;
    double threshold_factor = 2.0;
    bool normalize = false;
};

/// distance_matrix -> agglomerate -> isolation_scores -> threshold rule.
/// Needs at least 3 banks (Errc::PanelTooSmall).
AnomalyReport flag_anomalies(const PanelWindow& window, const DetectOptions& options = {});

struct AverageRateRow {
    std::string label;
    Decimal rate;
    bool overall = false;
};

/// Per-bank mean rate plus an "Overall" row, sorted ascending by rate.
struct AverageRateTable {
    std::string window_label;
    std::vector<AverageRateRow> rows;
};

AverageRateTable average_daily_rates(const PanelWindow& window);

struct CollusionCaveat {
    std::vector<std::size_t> group_sizes;            // k=2 cut
    std::vector<double> within_group_mean_distance;  // 0 for a singleton group
    std::size_t largest_group = 0;
    double largest_group_cohesion = 0.0;
    std::string advisory;
};

CollusionCaveat collusion_caveat_report(const AnomalyReport& report, const PanelWindow& window,
                                        bool normalize = false);

std::string to_json(const AnomalyReport& report, const CollusionCaveat* caveat = nullptr);
std::string to_text(const AnomalyReport& report, const CollusionCaveat* caveat = nullptr);
std::string to_text(const AverageRateTable& table);
std::string to_csv(const AverageRateTable& table);

}  // namespace ratefix
