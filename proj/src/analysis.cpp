#include "agora/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "agora/errors.hpp"

namespace agora {

double pgr(double score_trained, double score_base, double score_ref) {
    double gap = score_ref - score_base;
    if (gap == 0.0)
        throw Error(ErrorKind::Analysis, "degenerate reference gap (score_ref == score_base)");
    return (score_trained - score_base) / gap * 100.0;
}

std::vector<PgrCell> pgr_cells(const std::vector<ScoreRecord>& records) {
    std::vector<PgrCell> cells;
    auto find_cell = [&](const std::string& generator, const SettingKey& key) -> PgrCell& {
        for (PgrCell& c : cells)
            if (c.generator_id == generator && c.setting == key) return c;
        cells.push_back(PgrCell{generator, key, {}, 0.0, {}});
        return cells.back();
    };
    for (const ScoreRecord& r : records) {
        if (!std::isfinite(r.score_base) || !std::isfinite(r.score_trained) ||
            !std::isfinite(r.score_ref))
            throw Error(ErrorKind::Analysis,
                        "non-finite score in record for benchmark '" + r.benchmark + "'");
        PgrCell& cell = find_cell(r.generator_id, r.setting);
        cell.per_benchmark.emplace_back(r.benchmark, pgr(r.score_trained, r.score_base, r.score_ref));
        cell.provenance.push_back(r);
    }
    for (PgrCell& cell : cells) {
        double sum = 0.0;
        for (const auto& [bench, value] : cell.per_benchmark) sum += value;
        cell.domain_pgr = sum / static_cast<double>(cell.per_benchmark.size());
    }
    return cells;
}

std::optional<double> PgrTable::domain_value(const std::string& generator,
                                             const SettingKey& key) const {
    for (const PgrCell& c : cells)
        if (c.generator_id == generator && c.setting == key) return c.domain_pgr;
    return std::nullopt;
}

PgrTable aggregate(const std::vector<PgrCell>& cells) {
    PgrTable table;
    table.cells = cells;
    for (const PgrCell& c : cells) {
        if (std::find(table.generators.begin(), table.generators.end(), c.generator_id) ==
            table.generators.end())
            table.generators.push_back(c.generator_id);
    }
    const std::vector<Domain> domains = {Domain::Math, Domain::Code,
                                         Domain::InstructionFollowing};
    const std::vector<Method> methods = {Method::InstanceGeneration, Method::ResponseGeneration,
                                         Method::QualityEnhancement};
    for (const std::string& gen : table.generators) {
        std::vector<double> method_means;
        for (Method m : methods) {
            double sum = 0.0;
            int count = 0;
            for (Domain d : domains) {
                auto v = table.domain_value(gen, SettingKey{d, m});
                if (v.has_value()) {
                    sum += *v;
                    ++count;
                } else {
                    table.warnings.push_back("missing cell: " + gen + " / " +
                                             SettingKey{d, m}.slug());
                }
            }
            if (count > 0) {
                table.method_avg[gen][m] = sum / count;
                method_means.push_back(sum / count);
            }
        }
        if (!method_means.empty()) {
            double sum = 0.0;
            for (double v : method_means) sum += v;
            table.overall_avg[gen] = sum / static_cast<double>(method_means.size());
        }
    }
    return table;
}

StandardizeResult standardize(const std::vector<std::vector<double>>& rows,
                              const std::vector<std::string>& feature_names) {
    const std::size_t n = rows.size();
    if (n < 2) throw Error(ErrorKind::Analysis, "standardize needs at least two rows");
    const std::size_t cols = rows.front().size();
    for (const auto& r : rows)
        if (r.size() != cols) throw Error(ErrorKind::Analysis, "ragged matrix");
    if (!feature_names.empty() && feature_names.size() != cols)
        throw Error(ErrorKind::Analysis, "feature name count does not match columns");

    StandardizeResult result;
    std::vector<std::size_t> kept;
    std::vector<double> means, sds;
    for (std::size_t c = 0; c < cols; ++c) {
        double mean = 0.0;
        for (const auto& r : rows) mean += r[c];
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (const auto& r : rows) ss += (r[c] - mean) * (r[c] - mean);
        double sd = std::sqrt(ss / static_cast<double>(n - 1));
        std::string name = feature_names.empty() ? "col" + std::to_string(c) : feature_names[c];
        // relative tolerance: summation round-off must not disguise a
        // constant column as informative
        if (sd <= 1e-12 * std::max(1.0, std::fabs(mean))) {
            result.dropped_features.push_back(name);
            result.warnings.push_back("dropped constant column '" + name + "'");
            continue;
        }
        kept.push_back(c);
        result.kept_features.push_back(name);
        means.push_back(mean);
        sds.push_back(sd);
    }
    result.matrix.assign(n, std::vector<double>(kept.size()));
    for (std::size_t kc = 0; kc < kept.size(); ++kc) {
        std::size_t c = kept[kc];
        for (std::size_t i = 0; i < n; ++i)
            result.matrix[i][kc] = (rows[i][c] - means[kc]) / sds[kc];
    }
    return result;
}

PcaResult pca(const std::vector<std::vector<double>>& standardized, std::size_t k,
              const std::vector<std::string>& feature_names) {
    const std::size_t n = standardized.size();
    if (n < 2) throw Error(ErrorKind::Analysis, "pca needs at least two rows");
    const std::size_t cols = standardized.front().size();
    if (k == 0 || k > std::min(n - 1, cols))
        throw Error(ErrorKind::Analysis,
                    "k out of range: " + std::to_string(k) + " (rows " + std::to_string(n) +
                        ", cols " + std::to_string(cols) + ")");

    Eigen::MatrixXd X(n, cols);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < cols; ++c) X(i, c) = standardized[i][c];
    Eigen::RowVectorXd mean = X.colwise().mean();
    Eigen::MatrixXd centered = X.rowwise() - mean;
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::Analysis, "eigendecomposition did not converge");

    // Eigen returns ascending eigenvalues; we want descending.
    std::vector<std::size_t> order(cols);
    for (std::size_t i = 0; i < cols; ++i) order[i] = cols - 1 - i;

    double trace = cov.trace();
    if (trace <= 0.0) throw Error(ErrorKind::Analysis, "covariance has non-positive trace");

    PcaResult result;
    result.feature_names = feature_names;
    for (std::size_t j = 0; j < k; ++j) {
        Eigen::VectorXd v = solver.eigenvectors().col(order[j]);
        // Sign convention: largest-magnitude loading positive.
        Eigen::Index argmax = 0;
        v.cwiseAbs().maxCoeff(&argmax);
        if (v(argmax) < 0) v = -v;
        result.components.emplace_back(v.data(), v.data() + v.size());
        double ev = solver.eigenvalues()(order[j]);
        result.eigenvalues.push_back(ev);
        result.explained_variance_ratios.push_back(ev / trace);
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(k);
        for (std::size_t j = 0; j < k; ++j) {
            double dot = 0.0;
            for (std::size_t c = 0; c < cols; ++c) dot += centered(i, c) * result.components[j][c];
            row[j] = dot;
        }
        result.scores.push_back(std::move(row));
    }
    return result;
}

std::vector<FeatureContribution> contributions_from_strengths(
    const std::vector<std::string>& features, const std::vector<double>& strengths) {
    if (features.size() != strengths.size())
        throw Error(ErrorKind::Analysis, "feature/strength count mismatch");
    double total = 0.0;
    for (double s : strengths) total += s;
    if (total <= 0.0) throw Error(ErrorKind::Analysis, "loading strengths sum to zero");
    std::vector<FeatureContribution> out;
    for (std::size_t i = 0; i < features.size(); ++i)
        out.push_back({features[i], strengths[i], strengths[i] / total * 100.0});
    return out;
}

std::vector<FeatureContribution> loading_contributions(const PcaResult& result) {
    if (result.components.empty()) throw Error(ErrorKind::Analysis, "empty PCA result");
    const std::size_t cols = result.components.front().size();
    std::vector<double> strengths(cols, 0.0);
    for (const auto& comp : result.components)
        for (std::size_t c = 0; c < cols; ++c) strengths[c] += std::abs(comp[c]);
    for (double& s : strengths) s /= static_cast<double>(result.components.size());
    std::vector<std::string> names = result.feature_names;
    if (names.empty())
        for (std::size_t c = 0; c < cols; ++c) names.push_back("col" + std::to_string(c));
    return contributions_from_strengths(names, strengths);
}

double f_test_p_value(double f_statistic, double d1, double d2) {
    if (!(d1 > 0) || !(d2 > 0)) throw Error(ErrorKind::Analysis, "invalid F degrees of freedom");
    if (!std::isfinite(f_statistic) || f_statistic <= 0.0)
        return std::isfinite(f_statistic) ? 1.0 : 1e-300;

    // Regularized incomplete beta via Lentz's continued fraction.
    auto betacf = [](double a, double b, double x) {
        const int max_iter = 300;
        const double fpmin = 1e-300;
        double qab = a + b, qap = a + 1.0, qam = a - 1.0;
        double c = 1.0, d = 1.0 - qab * x / qap;
        if (std::fabs(d) < fpmin) d = fpmin;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= max_iter; ++m) {
            int m2 = 2 * m;
            double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if (std::fabs(d) < fpmin) d = fpmin;
            c = 1.0 + aa / c;
            if (std::fabs(c) < fpmin) c = fpmin;
            d = 1.0 / d;
            h *= d * c;
            aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if (std::fabs(d) < fpmin) d = fpmin;
            c = 1.0 + aa / c;
            if (std::fabs(c) < fpmin) c = fpmin;
            d = 1.0 / d;
            double del = d * c;
            h *= del;
            if (std::fabs(del - 1.0) < 3e-12) break;
        }
        return h;
    };
    auto betai = [&](double a, double b, double x) {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                    b * std::log(1.0 - x);
        double front = std::exp(ln);
        if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
        return 1.0 - front * betacf(b, a, 1.0 - x) / b;
    };

    double x = d2 / (d2 + d1 * f_statistic);
    double p = betai(d2 / 2.0, d1 / 2.0, x);
    return std::clamp(p, 1e-300, 1.0);
}

RegressionResult ols(const std::vector<std::vector<double>>& predictors,
                     const std::vector<double>& y) {
    const std::size_t n = predictors.size();
    if (n != y.size()) throw Error(ErrorKind::Analysis, "design/target size mismatch");
    if (n == 0) throw Error(ErrorKind::Analysis, "empty design");
    const std::size_t k = predictors.front().size();
    if (n <= k + 1)
        throw Error(ErrorKind::Analysis, "insufficient degrees of freedom (" + std::to_string(n) +
                                             " rows for " + std::to_string(k) + " predictors)");

    double y_mean = 0.0;
    for (double v : y) y_mean += v;
    y_mean /= static_cast<double>(n);
    double ss_tot = 0.0;
    for (double v : y) ss_tot += (v - y_mean) * (v - y_mean);
    if (ss_tot == 0.0) throw Error(ErrorKind::Analysis, "zero variance in target");

    Eigen::MatrixXd X(n, k + 1);
    Eigen::VectorXd Y(n);
    for (std::size_t i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        for (std::size_t j = 0; j < k; ++j) X(i, j + 1) = predictors[i][j];
        Y(i) = y[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < static_cast<Eigen::Index>(k + 1))
        throw Error(ErrorKind::Analysis, "singular design matrix");
    Eigen::VectorXd beta = qr.solve(Y);

    Eigen::VectorXd residuals = Y - X * beta;
    double ss_res = residuals.squaredNorm();

    RegressionResult result;
    result.intercept = beta(0);
    for (std::size_t j = 0; j < k; ++j) result.coefficients.push_back(beta(j + 1));
    result.r_squared = 1.0 - ss_res / ss_tot;
    // guard tiny negative round-off
    if (result.r_squared < 0 && result.r_squared > -1e-12) result.r_squared = 0.0;

    double df2 = static_cast<double>(n - k - 1);
    if (ss_res <= ss_tot * 1e-15) {
        result.p_value = 1e-300;  // perfect fit: below any representable threshold
        result.r_squared = std::min(result.r_squared, 1.0);
    } else {
        double f = (result.r_squared / static_cast<double>(k)) /
                   ((1.0 - result.r_squared) / df2);
        result.p_value = f_test_p_value(f, static_cast<double>(k), df2);
    }

    result.weighted_predictor.resize(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) acc += result.coefficients[j] * predictors[i][j];
        result.weighted_predictor[i] = acc;
    }
    return result;
}

RegressionResult regress_on_components(const std::vector<double>& pgr_values,
                                       const PcaResult& components, std::size_t k) {
    if (components.scores.empty()) throw Error(ErrorKind::Analysis, "PCA result has no scores");
    if (pgr_values.size() != components.scores.size())
        throw Error(ErrorKind::Analysis, "one PGR value per matrix row is required");
    if (k == 0 || k > components.components.size())
        throw Error(ErrorKind::Analysis, "k exceeds available components");
    std::vector<std::vector<double>> predictors(components.scores.size());
    for (std::size_t i = 0; i < components.scores.size(); ++i)
        predictors[i].assign(components.scores[i].begin(), components.scores[i].begin() + k);
    return ols(predictors, pgr_values);
}

RegressionResult regress_simple(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw Error(ErrorKind::Analysis, "x/y size mismatch");
    if (x.size() < 3) throw Error(ErrorKind::Analysis, "simple regression needs >= 3 points");
    std::vector<std::vector<double>> predictors(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) predictors[i] = {x[i]};
    return ols(predictors, y);
}

}  // namespace agora
