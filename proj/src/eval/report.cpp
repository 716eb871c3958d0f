// SPDX-License-Identifier: Apache-2.0
#include "simcse/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <sstream>

#include "simcse/error.hpp"
#include "simcse/format.hpp"

namespace simcse {

void MetricReport::validate() const {
    if (metric == "pearson" && !(value >= -1.0 && value <= 1.0)) throw DataError("pearson value outside [-1,1]");
    if (metric == "accuracy" && !(value >= 0.0 && value <= 1.0)) throw DataError("accuracy value outside [0,1]");
}

double overall_score(std::span<const double> task_metrics) {
    if (task_metrics.empty()) throw DataError("overall_score: no task metrics");
    double total = 0.0;
    for (double v : task_metrics) total += v;
    return total / static_cast<double>(task_metrics.size());
}

namespace {

const char* kColumns[] = {"model", "task", "metric", "value", "n"};

std::vector<MetricReport> with_overall(std::span<const MetricReport> reports) {
    std::vector<MetricReport> rows(reports.begin(), reports.end());
    std::vector<std::string> models;
    for (const auto& r : reports) {
        if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
    }
    for (const auto& model : models) {
        std::map<std::string, double> by_task;
        std::string stage;
        for (const auto& r : reports) {
            if (r.model != model) continue;
            if (r.task == "sst" || r.task == "paraphrase" || r.task == "sts") by_task[r.task] = r.value;
            stage = r.stage;
        }
        if (by_task.size() == 3) {
            const std::vector<double> values = {by_task["paraphrase"], by_task["sst"], by_task["sts"]};
            rows.push_back({model, "overall", "mean", overall_score(values), 3, stage});
        }
    }
    return rows;
}

}  // namespace

std::string emit_report(std::span<const MetricReport> reports, ReportFormat format) {
    const auto rows = with_overall(reports);
    std::ostringstream out;
    if (format == ReportFormat::tsv) {
        out << "model\ttask\tmetric\tvalue\tn\n";
        for (const auto& r : rows) {
            out << r.model << '\t' << r.task << '\t' << r.metric << '\t' << format_double(r.value) << '\t' << r.n << '\n';
        }
        return out.str();
    }
    std::vector<std::array<std::string, 5>> cells;
    cells.push_back({kColumns[0], kColumns[1], kColumns[2], kColumns[3], kColumns[4]});
    for (const auto& r : rows) cells.push_back({r.model, r.task, r.metric, format_fixed(r.value, 4), std::to_string(r.n)});
    std::array<std::size_t, 5> width{};
    for (const auto& row : cells)
        for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], row[c].size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (std::size_t c = 0; c < 5; ++c) {
            out << cells[i][c];
            if (c + 1 < 5) out << std::string(width[c] - cells[i][c].size() + 2, ' ');
        }
        out << '\n';
        if (i == 0) {
            std::size_t total = 0;
            for (std::size_t c = 0; c < 5; ++c) total += width[c] + (c + 1 < 5 ? 2 : 0);
            out << std::string(total, '-') << '\n';
        }
    }
    return out.str();
}

std::vector<MetricReport> parse_report_tsv(std::string_view text) {
    std::vector<MetricReport> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != "model\ttask\tmetric\tvalue\tn") throw DataError("report TSV: bad header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t pos; (pos = line.find('\t', start)) != std::string::npos; start = pos + 1) {
            f.push_back(line.substr(start, pos - start));
        }
        f.push_back(line.substr(start));
        if (f.size() != 5) throw DataError("report TSV: expected 5 columns in '" + line + "'");
        MetricReport r{f[0], f[1], f[2], 0.0, 0, ""};
        auto [p1, e1] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), r.value);
        auto [p2, e2] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), r.n);
        if (e1 != std::errc() || e2 != std::errc()) throw DataError("report TSV: bad number in '" + line + "'");
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace simcse
