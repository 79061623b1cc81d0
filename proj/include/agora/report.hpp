#pragma once

#include <filesystem>

#include "agora/analysis.hpp"

namespace agora {

// Rendered tables (markdown) and machine-readable documents for the PGR and
// loading-contribution results, plus (x, y) series files for scatter plots.

std::string render_pgr_table(const PgrTable& table);
std::string render_contribution_table(const std::vector<FeatureContribution>& contributions);

void write_pgr_report_json(const PgrTable& table, const std::filesystem::path& path);

struct AnalysisDocument {
    StandardizeResult standardized;
    PcaResult components;
    std::vector<FeatureContribution> contributions;
    RegressionResult weighted_regression;
    std::optional<RegressionResult> simple_regression_fine;
    std::optional<RegressionResult> simple_regression_coarse;
    std::vector<std::string> row_labels;  // "<generator>/<setting>" per matrix row
    std::vector<double> target_pgr;       // regression target per row
    std::vector<double> problem_solving_x;  // per row; empty when unavailable
    std::vector<double> coarse_x, coarse_y;  // one point per generator
    std::vector<std::string> warnings;
};

void write_analysis_json(const AnalysisDocument& doc, const std::filesystem::path& path);

// Two-column series ("x,y" with a header) for regression scatter plots.
void write_plot_series_csv(const std::filesystem::path& path, const std::string& x_label,
                           const std::string& y_label, const std::vector<double>& x,
                           const std::vector<double>& y);

}  // namespace agora
