#include "sga/common.hpp"
#include "sga/dimsel.hpp"
#include "sga/eigencore.hpp"
#include "sga/kernels.hpp"
#include "sga/rng.hpp"
#include "sga/simulate.hpp"
#include "sga/standardize.hpp"

#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

using namespace sga;

namespace
{

Spectrum fake_laplacian_spectrum(const std::vector<double>& nus)
{
    Spectrum s;
    const int n = static_cast<int>(nus.size());
    s.eigenvalues = Eigen::Map<const Eigen::VectorXd>(nus.data(), n);
    s.eigenvectors = Eigen::MatrixXd::Identity(n, n);
    s.source = SpectrumSource::laplacian;
    return s;
}

}  // namespace

TEST_CASE("threshold surface evaluates a + b/n + c/p")
{
    const ThresholdModel m = ThresholdModel::builtin_default();
    CHECK(m.threshold(1000, 21743) ==
          doctest::Approx(-0.00016 + 2.7 / 1000.0 + 2.3 / 21743.0).epsilon(1e-12));
    CHECK(m.threshold(200, 2000) == doctest::Approx(0.014490).epsilon(1e-4));
}

TEST_CASE("select_dimension takes the largest gap index above threshold")
{
    // nu = 0, .1, .6, .62, .6201: gaps .1, .5, .02, .0001
    const Spectrum s = fake_laplacian_spectrum({0.0, 0.1, 0.6, 0.62, 0.6201});

    ThresholdModel m;
    m.a = 0.0145;  // gaps 1..3 clear it -> d = 3
    m.b = 0.0;
    m.c = 0.0;
    const EigengapReport r = select_dimension(s, 200, 2000, m);
    CHECK(r.d_selected == 3);
    CHECK_FALSE(r.degenerate);
    CHECK(r.threshold == doctest::Approx(0.0145));
    REQUIRE(r.gaps.size() == 4);
    CHECK(r.gaps(0) == doctest::Approx(0.1));
    CHECK(r.gaps(1) == doctest::Approx(0.5));
    CHECK(r.gaps(2) == doctest::Approx(0.02));
    CHECK(r.gaps(3) == doctest::Approx(0.0001));

    m.a = 0.03;  // gaps 1 and 2 clear -> d = 2
    CHECK(select_dimension(s, 200, 2000, m).d_selected == 2);

    m.a = 0.15;  // only gap 2 clears -> still d = 2
    CHECK(select_dimension(s, 200, 2000, m).d_selected == 2);

    m.a = 0.6;  // nothing clears -> degenerate, d = 1
    const EigengapReport deg = select_dimension(s, 200, 2000, m);
    CHECK(deg.d_selected == 1);
    CHECK(deg.degenerate);

    m.a = 0.00005;  // everything clears -> d = 4
    CHECK(select_dimension(s, 200, 2000, m).d_selected == 4);
}

TEST_CASE("homogeneous panels select d = 1")
{
    int hits = 0;
    const int reps = 50;
    for (int rep = 0; rep < reps; ++rep)
    {
        const GenotypeMatrix g = gen_homogeneous(200, 2000, derive_seed(4242, rep));
        const StandardizedMatrix s = standardize(g, true);
        const Spectrum lap =
            eigendecompose(normalized_laplacian(spectral_weights(s)), SpectrumSource::laplacian);
        const EigengapReport r = select_dimension(lap, 200, 2000);
        if (r.d_selected == 1)
        {
            ++hits;
        }
    }
    CHECK(hits >= 47);  // threshold targets the 99th null quantile
}

TEST_CASE("structured panels select d = k")
{
    // k populations: trivial dimension plus k - 1 contrasts
    const StructuredPanel panel = gen_structured(3, 0.05, 150, 3000, 909);
    const StandardizedMatrix s = standardize(panel.genotypes, true);
    const Spectrum lap =
        eigendecompose(normalized_laplacian(spectral_weights(s)), SpectrumSource::laplacian);
    const EigengapReport r = select_dimension(lap, 150, 3000);
    CHECK(r.d_selected == 3);
}

TEST_CASE("calibrate_threshold fits the surface and is thread invariant")
{
    const std::vector<std::pair<int, int>> grid{{40, 300}, {60, 500}, {80, 800}};
    const ThresholdModel m1 = calibrate_threshold(grid, 120, 0.99, 77, 1);
    const ThresholdModel m2 = calibrate_threshold(grid, 120, 0.99, 77, 4);

    CHECK(m1.a == m2.a);
    CHECK(m1.b == m2.b);
    CHECK(m1.c == m2.c);
    REQUIRE(m1.cells.size() == 3);
    CHECK(m1.reps == 120);
    CHECK(m1.seed == 77);

    // the fitted surface reproduces the cell quantiles it was fit to
    for (const CalibrationCell& cell : m1.cells)
    {
        CHECK(cell.quantile_value > 0.0);
        CHECK(std::abs(m1.threshold(cell.n, cell.p) - cell.quantile_value) <=
              m1.fit_max_abs_residual + 1e-12);
    }

    CHECK_THROWS_AS(calibrate_threshold(grid, 10, 0.99, 1, 1), ValidationError);
    CHECK_THROWS_AS(calibrate_threshold(grid, 120, 1.2, 1, 1), ValidationError);
    CHECK_THROWS_AS(calibrate_threshold({}, 120, 0.99, 1, 1), ValidationError);
}

TEST_CASE("threshold model JSON round trip")
{
    ThresholdModel m;
    m.a = -0.0002;
    m.b = 2.9;
    m.c = 2.1;
    m.quantile = 0.975;
    m.reps = 321;
    m.seed = 99;
    m.fit_max_abs_residual = 1e-4;
    m.fit_rms_residual = 5e-5;
    m.cells.push_back({100, 1000, 0.0271});

    const ThresholdModel r = threshold_model_from_json(threshold_model_to_json(m));
    CHECK(r.a == m.a);
    CHECK(r.b == m.b);
    CHECK(r.c == m.c);
    CHECK(r.quantile == m.quantile);
    CHECK(r.reps == m.reps);
    CHECK(r.seed == m.seed);
    REQUIRE(r.cells.size() == 1);
    CHECK(r.cells[0].n == 100);
    CHECK(r.cells[0].quantile_value == m.cells[0].quantile_value);

    CHECK_THROWS_AS(threshold_model_from_json("{ not json"), ParseError);
    CHECK_THROWS_AS(threshold_model_from_json("{\"a\": 1.0}"), ParseError);
}
