#pragma once

#include <map>
#include <optional>

#include "agora/dataset.hpp"

namespace agora {

// Performance gap recovered, in percent:
//   (trained - base) / (ref - base) * 100
// Base scores come from few-shot prompting; trained/reference are zero-shot.
double pgr(double score_trained, double score_base, double score_ref);

struct PgrCell {
    std::string generator_id;
    SettingKey setting;
    std::vector<std::pair<std::string, double>> per_benchmark;  // (benchmark, pgr)
    double domain_pgr = 0.0;  // arithmetic mean of the per-benchmark values
    std::vector<ScoreRecord> provenance;
};

// Groups score records into (generator, setting) cells. Per-benchmark PGR is
// computed first; the domain value is their mean.
std::vector<PgrCell> pgr_cells(const std::vector<ScoreRecord>& records);

struct PgrTable {
    std::vector<std::string> generators;  // first-seen order
    std::vector<PgrCell> cells;
    // keyed by generator, then method; means skip missing domains
    std::map<std::string, std::map<Method, double>> method_avg;
    std::map<std::string, double> overall_avg;  // mean of the method averages
    std::vector<std::string> warnings;          // missing grid cells

    std::optional<double> domain_value(const std::string& generator, const SettingKey& key) const;
};

PgrTable aggregate(const std::vector<PgrCell>& cells);

struct StandardizeResult {
    std::vector<std::vector<double>> matrix;  // rows x kept columns, z-scored
    std::vector<std::string> kept_features;
    std::vector<std::string> dropped_features;  // constant columns
    std::vector<std::string> warnings;
};

// Column-wise z-scoring with the sample (n-1) standard deviation. Constant
// columns are dropped with a warning; needs at least two rows.
StandardizeResult standardize(const std::vector<std::vector<double>>& rows,
                              const std::vector<std::string>& feature_names);

struct PcaResult {
    std::vector<std::vector<double>> components;  // k loading vectors (rows)
    std::vector<double> eigenvalues;              // descending
    std::vector<double> explained_variance_ratios;  // eigenvalue / trace
    std::vector<std::vector<double>> scores;        // rows x k projections
    std::vector<std::string> feature_names;
};

// Eigendecomposition of the sample covariance of an already-standardized
// matrix, components ordered by descending eigenvalue. Sign convention: each
// component's largest-magnitude loading is positive.
PcaResult pca(const std::vector<std::vector<double>>& standardized, std::size_t k,
              const std::vector<std::string>& feature_names = {});

struct FeatureContribution {
    std::string feature;
    double loading_strength = 0.0;      // mean |loading| across retained components
    double contribution_percent = 0.0;  // strength / sum of strengths * 100
};

std::vector<FeatureContribution> contributions_from_strengths(
    const std::vector<std::string>& features, const std::vector<double>& strengths);
std::vector<FeatureContribution> loading_contributions(const PcaResult& result);

struct RegressionResult {
    std::vector<double> coefficients;
    double intercept = 0.0;
    double r_squared = 0.0;
    double p_value = 1.0;  // overall F-test
    std::vector<double> weighted_predictor;  // sum_j beta_j * x_j per row
};

// Ordinary least squares of y on the given predictor columns (adds an
// intercept). rows x predictors design; errors on singular designs and on
// zero variance in the target.
RegressionResult ols(const std::vector<std::vector<double>>& predictors,
                     const std::vector<double>& y);

// OLS of PGR values on the top-k principal-component scores.
RegressionResult regress_on_components(const std::vector<double>& pgr_values,
                                       const PcaResult& components, std::size_t k = 5);

// Univariate OLS (problem-solving score vs PGR), either one point per
// generator or one per cell.
RegressionResult regress_simple(const std::vector<double>& x, const std::vector<double>& y);

// Upper-tail probability of an F(d1, d2) statistic, via the regularized
// incomplete beta function. Clamped into (0, 1].
double f_test_p_value(double f_statistic, double d1, double d2);

}  // namespace agora
