#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "panelcf/ensemble.hpp"
#include "panelcf/methods.hpp"
#include "panelcf/panel.hpp"

namespace panelcf {

struct SyntheticSpec {
    Eigen::Index n_units = 10;
    Eigen::Index n_periods = 10;
    int rank = 0;
    double factor_scale = 1.0;
    double noise_scale = 0.0;
    double fe_scale = 1.0;
    std::uint64_t seed = kDefaultSeed;
};

/// Y_it = fe_scale*(a_i + b_t) + factor_scale * sum_r u_ir*v_tr
///        + noise_scale * eps_it, with every draw i.i.d. standard normal from
/// the seeded generator. Deterministic given the seed.
Panel generate_synthetic_panel(const SyntheticSpec& spec);

struct BenchmarkConfig {
    std::vector<Method> methods = {Method::VR, Method::HZ, Method::MC, Method::EnsVC,
                                   Method::EnsHC};
    /// Last non-pseudo period, 1-based; < 0 means the default ceil(0.8*T).
    int t0 = -1;
    OutcomeTransform transform = OutcomeTransform::Level;
    /// Stacking periods for the horizontal-CV ensemble; < 0 means the
    /// per-cell default min(10, t* - 3).
    int hc_periods = -1;
    std::uint64_t seed = kDefaultSeed;
    bool fast_mode = false;
    /// Worker threads over evaluation cells. The report is byte-identical for
    /// any value, so it is not echoed in the report.
    int jobs = 1;
    /// Leakage-test hook: before each cell (i, t) is evaluated, every value
    /// in a period after t is replaced by this sentinel. Reports must not
    /// change, since no estimator may read past the evaluation period.
    std::optional<double> poison_sentinel;
};

struct MethodSummary {
    std::optional<double> rmse;            // empty if every cell failed
    int n_cells = 0;                       // cells that produced a value
    int n_failed = 0;
    std::optional<double> avg_complexity;  // VR/HZ/MC only

    bool operator==(const MethodSummary&) const = default;
};

struct BenchmarkReport {
    Eigen::Index n_units = 0;
    Eigen::Index n_periods = 0;  // after the transform
    int t0 = 0;                  // 1-based, resolved
    OutcomeTransform transform = OutcomeTransform::Level;
    std::uint64_t seed = 0;
    int hc_periods = -1;  // as configured; -1 = per-cell default
    bool fast_mode = false;
    int n_cells_total = 0;
    std::vector<std::pair<Method, MethodSummary>> methods;  // config order
    std::optional<EnsembleWeights> avg_weights_vc;

    bool operator==(const BenchmarkReport& o) const;
    const MethodSummary* summary(Method m) const;
};

/// Pseudo-treatment evaluation: every unit is pretended treated at every
/// period t in t0+1..T; each configured method imputes the hidden cell from
/// the data up to t, and errors against the known truth are aggregated into
/// per-method RMSEs on the transformed scale.
BenchmarkReport pseudo_treatment_eval(const Panel& panel, const BenchmarkConfig& cfg);

enum class ReportFormat { Json, Csv, Table };

std::string emit_report(const BenchmarkReport& report, ReportFormat format);
BenchmarkReport parse_report_json(const std::string& text);

}  // namespace panelcf
