#include "sga/common.hpp"
#include "sga/kernels.hpp"
#include "sga/standardize.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace sga;

TEST_CASE("spectral weights agree with a triple-loop oracle")
{
    const GenotypeMatrix g = test::make_panel(12, 20, 101);
    const StandardizedMatrix s = standardize(g, true);
    const WeightMatrix w = spectral_weights(s);

    const int n = static_cast<int>(s.x.rows());
    REQUIRE(w.w.rows() == n);
    for (int i = 0; i < n; ++i)
    {
        for (int j = 0; j < n; ++j)
        {
            double dot = 0.0;
            for (int k = 0; k < s.x.cols(); ++k)
            {
                dot += s.x(i, k) * s.x(j, k);
            }
            const double expect = dot > 0.0 ? std::sqrt(dot) : 0.0;
            CHECK(w.w(i, j) == doctest::Approx(expect).epsilon(1e-10));
        }
        CHECK(w.w(i, i) == doctest::Approx(s.x.row(i).norm()));
        CHECK(w.degrees(i) == doctest::Approx(w.w.row(i).sum()));
    }
    CHECK((w.w - w.w.transpose()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("pca kernel is the standardized gram matrix")
{
    const GenotypeMatrix g = test::make_panel(9, 15, 55);
    const StandardizedMatrix s = standardize(g, true);
    const KernelMatrix k = pca_kernel(s);
    CHECK(k.kind == KernelKind::pca);
    const Eigen::MatrixXd expect = s.x * s.x.transpose();
    CHECK((k.h - expect).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ibs weights match per-pair hand computation")
{
    GenotypeMatrix g = test::make_panel(3, 4, 9);
    g.missing.setConstant(false);
    g.counts.row(0) << 0, 1, 2, 0;
    g.counts.row(1) << 0, 1, 0, 2;
    g.counts.row(2) << 2, 1, 2, 1;
    g.missing(1, 3) = true;

    const double sigma2 = 0.04;
    const WeightMatrix w = ibs_weights(g, sigma2);

    // pair (0,1): jointly observed SNPs 0,1,2 -> sims 1, 1, 0 -> s = 2/3
    const double s01 = 2.0 / 3.0;
    // pair (0,2): all 4 -> sims 0, 1, 1, 0.5 -> s = 2.5/4
    const double s02 = 2.5 / 4.0;
    // pair (1,2): SNPs 0,1,2 -> sims 0, 1, 0 -> s = 1/3
    const double s12 = 1.0 / 3.0;

    CHECK(w.w(0, 1) == doctest::Approx(std::exp(-(1 - s01) * (1 - s01) / sigma2)));
    CHECK(w.w(0, 2) == doctest::Approx(std::exp(-(1 - s02) * (1 - s02) / sigma2)));
    CHECK(w.w(1, 2) == doctest::Approx(std::exp(-(1 - s12) * (1 - s12) / sigma2)));
    CHECK(w.w(0, 0) == doctest::Approx(1.0));
    CHECK(w.w(1, 0) == doctest::Approx(w.w(0, 1)));
}

TEST_CASE("ibs weights need a jointly observed SNP per pair")
{
    GenotypeMatrix g = test::make_panel(2, 2, 10);
    g.missing.setConstant(false);
    g.missing(0, 0) = true;
    g.missing(1, 1) = true;
    CHECK_THROWS_AS(ibs_weights(g, 0.1), ValidationError);
    CHECK_THROWS_AS(ibs_weights(test::make_panel(3, 3, 2), 0.0), ValidationError);
}

TEST_CASE("negative dot products are clipped to zero weight")
{
    StandardizedMatrix s;
    s.x.resize(2, 2);
    s.x << 1.0, 0.0,
          -1.0, 0.0;
    const WeightMatrix w = spectral_weights(s);
    CHECK(w.w(0, 1) == 0.0);
    CHECK(w.w(0, 0) == doctest::Approx(1.0));
}
