#include "agora/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace agora {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string fixed(double value, int decimals) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(decimals) << value;
    return out.str();
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace

std::string render_pgr_table(const PgrTable& table) {
    const std::vector<Method> methods = {Method::InstanceGeneration, Method::ResponseGeneration,
                                         Method::QualityEnhancement};
    const std::vector<Domain> domains = {Domain::Math, Domain::Code,
                                         Domain::InstructionFollowing};
    std::ostringstream out;
    out << "| Data Generator |";
    for (Method m : methods) {
        std::string label = to_string(m);
        out << " " << label << ": Math | Code | Inst. | Avg |";
    }
    out << "\n|---|";
    for (std::size_t i = 0; i < methods.size() * 4; ++i) out << "---|";
    out << "\n";
    for (const std::string& gen : table.generators) {
        out << "| " << gen << " |";
        for (Method m : methods) {
            for (Domain d : domains) {
                auto v = table.domain_value(gen, SettingKey{d, m});
                out << " " << (v ? fixed(*v, 1) : "-") << " |";
            }
            auto avg_it = table.method_avg.find(gen);
            bool have = avg_it != table.method_avg.end() && avg_it->second.count(m);
            out << " " << (have ? fixed(avg_it->second.at(m), 1) : "-") << " |";
        }
        out << "\n";
    }
    out << "\n| Data Generator | Overall Avg |\n|---|---|\n";
    for (const std::string& gen : table.generators) {
        auto it = table.overall_avg.find(gen);
        out << "| " << gen << " | " << (it != table.overall_avg.end() ? fixed(it->second, 1) : "-")
            << " |\n";
    }
    return out.str();
}

std::string render_contribution_table(const std::vector<FeatureContribution>& contributions) {
    std::ostringstream out;
    out << "| Intrinsic Metric | Loading Strength | Contribution |\n|---|---|---|\n";
    for (const FeatureContribution& c : contributions)
        out << "| " << c.feature << " | " << fixed(c.loading_strength, 3) << " | "
            << fixed(c.contribution_percent, 2) << "% |\n";
    return out.str();
}

void write_pgr_report_json(const PgrTable& table, const std::filesystem::path& path) {
    ordered_json j;
    j["cells"] = ordered_json::array();
    for (const PgrCell& c : table.cells) {
        ordered_json cell;
        cell["generator_id"] = c.generator_id;
        cell["setting"] = c.setting.slug();
        cell["domain_pgr"] = c.domain_pgr;
        cell["domain_pgr_rounded"] = std::round(c.domain_pgr * 10.0) / 10.0;
        ordered_json per_bench = ordered_json::object();
        for (const auto& [bench, value] : c.per_benchmark) per_bench[bench] = value;
        cell["per_benchmark"] = per_bench;
        j["cells"].push_back(cell);
    }
    j["method_avg"] = ordered_json::object();
    for (const auto& [gen, by_method] : table.method_avg) {
        ordered_json row = ordered_json::object();
        for (const auto& [method, value] : by_method) {
            row[to_string(method)] = value;
            row[to_string(method) + "_rounded"] = std::round(value * 10.0) / 10.0;
        }
        j["method_avg"][gen] = row;
    }
    j["overall_avg"] = ordered_json::object();
    for (const auto& [gen, value] : table.overall_avg) j["overall_avg"][gen] = value;
    j["warnings"] = table.warnings;
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

namespace {

ordered_json regression_to_json(const RegressionResult& r) {
    ordered_json j;
    j["coefficients"] = r.coefficients;
    j["intercept"] = r.intercept;
    j["r_squared"] = r.r_squared;
    j["p_value"] = r.p_value;
    return j;
}

}  // namespace

void write_analysis_json(const AnalysisDocument& doc, const std::filesystem::path& path) {
    ordered_json j;
    j["rows"] = doc.row_labels;
    j["features"] = doc.standardized.kept_features;
    j["dropped_features"] = doc.standardized.dropped_features;
    j["explained_variance_ratios"] = doc.components.explained_variance_ratios;
    j["eigenvalues"] = doc.components.eigenvalues;
    j["components"] = doc.components.components;
    ordered_json contributions = ordered_json::array();
    for (const FeatureContribution& c : doc.contributions) {
        contributions.push_back({{"feature", c.feature},
                                 {"loading_strength", c.loading_strength},
                                 {"contribution_percent", c.contribution_percent}});
    }
    j["contributions"] = contributions;
    j["weighted_regression"] = regression_to_json(doc.weighted_regression);
    if (doc.simple_regression_fine)
        j["simple_regression_fine"] = regression_to_json(*doc.simple_regression_fine);
    if (doc.simple_regression_coarse)
        j["simple_regression_coarse"] = regression_to_json(*doc.simple_regression_coarse);
    j["target_pgr"] = doc.target_pgr;
    j["weighted_predictor"] = doc.weighted_regression.weighted_predictor;
    j["problem_solving_x"] = doc.problem_solving_x;
    j["coarse_x"] = doc.coarse_x;
    j["coarse_y"] = doc.coarse_y;
    j["warnings"] = doc.warnings;
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

void write_plot_series_csv(const std::filesystem::path& path, const std::string& x_label,
                           const std::string& y_label, const std::vector<double>& x,
                           const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error(ErrorKind::Precondition, "plot series length mismatch");
    auto out = open_output(path);
    out << x_label << "," << y_label << "\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < x.size(); ++i) out << x[i] << "," << y[i] << "\n";
}

}  // namespace agora
