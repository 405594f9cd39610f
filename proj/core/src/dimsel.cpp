#include "sga/dimsel.hpp"

#include "sga/common.hpp"
#include "sga/kernels.hpp"
#include "sga/parallel.hpp"
#include "sga/rng.hpp"
#include "sga/simulate.hpp"
#include "sga/standardize.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace sga
{

EigengapReport select_dimension(const Spectrum& lap_spectrum, int n, int p,
                                const ThresholdModel& model)
{
    if (lap_spectrum.source != SpectrumSource::laplacian)
        throw ValidationError("select_dimension expects a Laplacian spectrum");
    if (n < 2 || p < 2)
        throw ValidationError("select_dimension requires n >= 2 and p >= 2");
    const Eigen::Index len = lap_spectrum.eigenvalues.size();
    if (len < 2)
        throw ValidationError("select_dimension needs at least two eigenvalues");

    EigengapReport report;
    report.n = n;
    report.p = p;
    report.threshold = model.threshold(n, p);
    report.gaps.resize(len - 1);
    for (Eigen::Index i = 0; i + 1 < len; ++i)
        report.gaps(i) = std::abs(lap_spectrum.eigenvalues(i + 1) - lap_spectrum.eigenvalues(i));

    int d = 0;
    for (Eigen::Index i = 0; i < report.gaps.size(); ++i)
        if (report.gaps(i) > report.threshold)
            d = static_cast<int>(i) + 1;
    if (d == 0)
    {
        report.d_selected = 1;
        report.degenerate = true;
    }
    else
    {
        report.d_selected = d;
    }
    return report;
}

namespace
{

double null_eigengap(int n, int p, std::uint64_t seed)
{
    GenotypeMatrix g = gen_homogeneous(n, p, seed);
    StandardizedMatrix x = standardize(g, true);
    WeightMatrix w = spectral_weights(x);
    Eigen::MatrixXd lap = normalized_laplacian(w);
    Spectrum spec = eigendecompose(lap, SpectrumSource::laplacian);
    return std::abs(spec.eigenvalues(2) - spec.eigenvalues(1));
}

double nearest_rank_quantile(std::vector<double> values, double q)
{
    std::sort(values.begin(), values.end());
    const auto n = static_cast<long>(values.size());
    long rank = static_cast<long>(std::ceil(q * static_cast<double>(n)));
    rank = std::max(1L, std::min(rank, n));
    return values[static_cast<std::size_t>(rank - 1)];
}

}  // namespace

ThresholdModel calibrate_threshold(const std::vector<std::pair<int, int>>& grid, int reps,
                                   double quantile, std::uint64_t seed, int threads)
{
    if (quantile <= 0.0 || quantile >= 1.0)
        throw ValidationError("calibration quantile must lie in (0, 1)");
    if (reps < 100)
        throw ValidationError("calibration needs reps >= 100");
    if (grid.size() < 3)
        throw ValidationError("calibration grid needs at least 3 (n, p) cells");
    for (const auto& [n, p] : grid)
        if (n < 4 || p < 2)
            throw ValidationError("calibration grid cells require n >= 4 and p >= 2");

    const int cells = static_cast<int>(grid.size());
    std::vector<std::vector<double>> gaps(static_cast<std::size_t>(cells),
                                          std::vector<double>(static_cast<std::size_t>(reps)));
    parallel_for(cells * reps, threads, [&](int job) {
        const int cell = job / reps;
        const int rep = job % reps;
        const auto [n, p] = grid[static_cast<std::size_t>(cell)];
        gaps[static_cast<std::size_t>(cell)][static_cast<std::size_t>(rep)] =
            null_eigengap(n, p, derive_seed(seed, static_cast<std::uint64_t>(cell),
                                            static_cast<std::uint64_t>(rep)));
    });

    Eigen::MatrixXd design(cells, 3);
    Eigen::VectorXd target(cells);
    ThresholdModel model;
    model.quantile = quantile;
    model.reps = reps;
    model.seed = seed;
    for (int c = 0; c < cells; ++c)
    {
        const auto [n, p] = grid[static_cast<std::size_t>(c)];
        const double q = nearest_rank_quantile(gaps[static_cast<std::size_t>(c)], quantile);
        design(c, 0) = 1.0;
        design(c, 1) = 1.0 / static_cast<double>(n);
        design(c, 2) = 1.0 / static_cast<double>(p);
        target(c) = q;
        model.cells.push_back(CalibrationCell{n, p, q});
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 3)
        throw ValidationError("calibration grid is degenerate: cannot identify a, b, c");
    const Eigen::Vector3d coef = qr.solve(target);
    model.a = coef(0);
    model.b = coef(1);
    model.c = coef(2);

    const Eigen::VectorXd resid = target - design * coef;
    model.fit_max_abs_residual = resid.cwiseAbs().maxCoeff();
    model.fit_rms_residual = std::sqrt(resid.squaredNorm() / static_cast<double>(cells));
    return model;
}

std::string threshold_model_to_json(const ThresholdModel& model)
{
    nlohmann::json j;
    j["a"] = model.a;
    j["b"] = model.b;
    j["c"] = model.c;
    j["quantile"] = model.quantile;
    j["fit_max_abs_residual"] = model.fit_max_abs_residual;
    j["fit_rms_residual"] = model.fit_rms_residual;
    j["reps"] = model.reps;
    j["seed"] = model.seed;
    j["cells"] = nlohmann::json::array();
    for (const auto& cell : model.cells)
        j["cells"].push_back({{"n", cell.n}, {"p", cell.p}, {"quantile_value", cell.quantile_value}});
    return j.dump(2) + "\n";
}

ThresholdModel threshold_model_from_json(const std::string& text)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw ParseError(std::string("threshold model JSON: ") + e.what());
    }
    ThresholdModel model;
    try
    {
        model.a = j.at("a").get<double>();
        model.b = j.at("b").get<double>();
        model.c = j.at("c").get<double>();
        model.quantile = j.value("quantile", 0.99);
        model.fit_max_abs_residual = j.value("fit_max_abs_residual", 0.0);
        model.fit_rms_residual = j.value("fit_rms_residual", 0.0);
        model.reps = j.value("reps", 0);
        model.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("cells"))
            for (const auto& cell : j.at("cells"))
                model.cells.push_back(CalibrationCell{cell.at("n").get<int>(),
                                                      cell.at("p").get<int>(),
                                                      cell.at("quantile_value").get<double>()});
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ParseError(std::string("threshold model JSON: ") + e.what());
    }
    if (model.quantile <= 0.0 || model.quantile >= 1.0)
        throw ValidationError("threshold model quantile must lie in (0, 1)");
    return model;
}

}  // namespace sga
