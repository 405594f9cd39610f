#pragma once

#include "sga/eigencore.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sga
{

/// One calibration cell: panel shape and the empirical eigengap quantile
/// observed there.
struct CalibrationCell
{
    int n = 0;
    int p = 0;
    double quantile_value = 0.0;
};

/// Null-eigengap threshold surface f(n, p) = a + b/n + c/p.
///
/// The default coefficients approximate the 99th quantile of the first null
/// eigengap of the normalized Laplacian for homogeneous panels;
/// calibrate_threshold refits them by simulation.
struct ThresholdModel
{
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double quantile = 0.99;
    double fit_max_abs_residual = 0.0;
    double fit_rms_residual = 0.0;
    std::vector<CalibrationCell> cells;  // empty for the built-in default
    int reps = 0;
    std::uint64_t seed = 0;

    double threshold(int n, int p) const
    {
        return a + b / static_cast<double>(n) + c / static_cast<double>(p);
    }

    static ThresholdModel builtin_default()
    {
        ThresholdModel m;
        m.a = -0.00016;
        m.b = 2.7;
        m.c = 2.3;
        m.quantile = 0.99;
        return m;
    }
};

/// Eigengap scan of a Laplacian spectrum.
struct EigengapReport
{
    Eigen::VectorXd gaps;  // gaps(i) = |nu_{i+2} - nu_{i+1}| in 0-based storage
    double threshold = 0.0;
    int d_selected = 1;
    int n = 0;
    int p = 0;
    bool degenerate = false;  // no gap cleared the threshold
};

/// d = max{ i : |nu_{i+1} - nu_i| > f(n, p) }. When no gap clears the
/// threshold the report flags the data as structureless and returns d = 1.
EigengapReport select_dimension(const Spectrum& lap_spectrum, int n, int p,
                                const ThresholdModel& model = ThresholdModel::builtin_default());

/// Refits the threshold surface: for every (n, p) grid cell, simulates
/// `reps` homogeneous panels, runs them to the Laplacian spectrum, records
/// the first null eigengap delta_2 = |nu_3 - nu_2|, and least-squares fits
/// a + b/n + c/p to the per-cell empirical quantiles. Deterministic in
/// `seed` regardless of `threads`.
ThresholdModel calibrate_threshold(const std::vector<std::pair<int, int>>& grid, int reps,
                                   double quantile, std::uint64_t seed, int threads = 1);

std::string threshold_model_to_json(const ThresholdModel& model);
ThresholdModel threshold_model_from_json(const std::string& text);

}  // namespace sga
