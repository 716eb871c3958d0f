// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace simcse {

enum class ReportFormat { tsv, pretty };

/// One evaluated (model, task, metric) cell.
struct MetricReport {
    std::string model;
    std::string task;    // sst | paraphrase | sts | overall
    std::string metric;  // accuracy | pearson | mean
    double value = 0.0;
    std::size_t n = 0;
    std::string stage;   // provenance tag of the evaluated weights

    void validate() const;
    friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

/// Columns: model, task, metric, value, n. Every model that reports all three
/// tasks gains an `overall` row holding the plain arithmetic mean of its three
/// task metrics (n = 3).
std::string emit_report(std::span<const MetricReport> reports, ReportFormat format);

/// Reads back the TSV written by emit_report (overall rows included).
std::vector<MetricReport> parse_report_tsv(std::string_view text);

/// Plain mean of the task metrics; the convention used for `overall`.
double overall_score(std::span<const double> task_metrics);

}  // namespace simcse
