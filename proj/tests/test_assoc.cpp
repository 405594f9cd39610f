#include "sga/assoc.hpp"
#include "sga/common.hpp"
#include "sga/eigencore.hpp"
#include "sga/kernels.hpp"
#include "sga/simulate.hpp"
#include "sga/standardize.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace sga;

namespace
{

/// Log-likelihood of a logistic model with intercept, computed directly.
double loglik(const Eigen::VectorXi& y, const Eigen::MatrixXd& covariates,
              const Eigen::VectorXd& beta)
{
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i)
    {
        double eta = beta(0);
        for (Eigen::Index j = 0; j < covariates.cols(); ++j)
        {
            eta += beta(j + 1) * covariates(i, j);
        }
        ll += y(i) * eta - std::log1p(std::exp(eta));
    }
    return ll;
}

/// Exact conditional log-likelihood by brute-force enumeration of all
/// case subsets of each stratum.
double cond_loglik(const MatchedStrata& strata, const Eigen::VectorXd& x,
                   const Eigen::VectorXi& y, double beta)
{
    double ll = 0.0;
    for (std::size_t s = 0; s < strata.strata.size(); ++s)
    {
        const std::vector<int>& members = strata.strata[s];
        const int size = static_cast<int>(members.size());
        int m = 0;
        double observed = 0.0;
        for (int member : members)
        {
            if (y(member) == 1)
            {
                ++m;
                observed += x(member);
            }
        }
        // skip strata with constant x: every subset sum is equal
        bool constant = true;
        for (int member : members)
        {
            if (x(member) != x(members[0]))
            {
                constant = false;
                break;
            }
        }
        if (constant)
        {
            continue;
        }
        std::vector<bool> mask(static_cast<std::size_t>(size), false);
        std::fill(mask.begin(), mask.begin() + m, true);
        std::sort(mask.begin(), mask.end());  // canonical start for next_permutation
        double denom = 0.0;
        do
        {
            double subset = 0.0;
            for (int i = 0; i < size; ++i)
            {
                if (mask[static_cast<std::size_t>(i)])
                {
                    subset += x(members[static_cast<std::size_t>(i)]);
                }
            }
            denom += std::exp(beta * subset);
        } while (std::next_permutation(mask.begin(), mask.end()));
        ll += beta * observed - std::log(denom);
    }
    return ll;
}

/// Golden-section maximizer for a concave scalar function.
template <typename F>
double maximize(F f, double lo, double hi)
{
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    while (b - a > 1e-11)
    {
        if (f(c) > f(d))
        {
            b = d;
        }
        else
        {
            a = c;
        }
        c = b - phi * (b - a);
        d = a + phi * (b - a);
    }
    return (a + b) / 2.0;
}

MatchedStrata make_strata(const std::vector<std::vector<int>>& groups, const Eigen::VectorXi& y)
{
    MatchedStrata m;
    m.strata = groups;
    for (const std::vector<int>& g : groups)
    {
        int cases = 0;
        for (int member : g)
        {
            cases += y(member);
        }
        m.case_count.push_back(cases);
        m.control_count.push_back(static_cast<int>(g.size()) - cases);
    }
    return m;
}

}  // namespace

TEST_CASE("intercept-only fit is the analytic MLE")
{
    Eigen::VectorXi y(8);
    y << 1, 1, 0, 0, 0, 0, 0, 0;  // mean 0.25
    const LogisticFit fit = logistic_fit(y, Eigen::MatrixXd(8, 0));
    REQUIRE(fit.converged);
    REQUIRE(fit.beta.size() == 1);
    CHECK(fit.beta(0) == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-9));
}

TEST_CASE("2x2 fit equals the closed-form log odds ratio")
{
    // x = 0: 10 cases / 20 controls; x = 1: 20 cases / 10 controls
    const int n = 60;
    Eigen::VectorXi y(n);
    Eigen::MatrixXd x(n, 1);
    int row = 0;
    for (int i = 0; i < 10; ++i, ++row) { x(row, 0) = 0; y(row) = 1; }
    for (int i = 0; i < 20; ++i, ++row) { x(row, 0) = 0; y(row) = 0; }
    for (int i = 0; i < 20; ++i, ++row) { x(row, 0) = 1; y(row) = 1; }
    for (int i = 0; i < 10; ++i, ++row) { x(row, 0) = 1; y(row) = 0; }

    const LogisticFit fit = logistic_fit(y, x);
    REQUIRE(fit.converged);
    CHECK_FALSE(fit.separation);
    CHECK(std::abs(fit.beta(1) - std::log(4.0)) <= 1e-6);
    const double woolf = std::sqrt(1.0 / 10 + 1.0 / 20 + 1.0 / 20 + 1.0 / 10);
    CHECK(std::sqrt(fit.covariance(1, 1)) == doctest::Approx(woolf).epsilon(1e-6));
    CHECK(fit.beta(0) == doctest::Approx(std::log(10.0 / 20.0)).epsilon(1e-6));

    const AssocResult r = wald_test(fit, 0, "rs1", AssocMethod::uncorrected);
    CHECK(r.beta == doctest::Approx(std::log(4.0)));
    CHECK(r.se == doctest::Approx(woolf).epsilon(1e-6));
    CHECK(r.wald == doctest::Approx(std::pow(std::log(4.0) / woolf, 2)).epsilon(1e-6));
    CHECK(r.p_value > 0.0);
    CHECK(r.p_value < 0.05);
    CHECK(r.converged);
}

TEST_CASE("logistic_fit input validation")
{
    Eigen::VectorXi ones = Eigen::VectorXi::Ones(6);
    CHECK_THROWS_AS(logistic_fit(ones, Eigen::MatrixXd(6, 0)), ValidationError);

    Eigen::VectorXi y(3);
    y << 0, 1, 2;
    CHECK_THROWS_AS(logistic_fit(y, Eigen::MatrixXd(3, 0)), ValidationError);

    Eigen::VectorXi small(2);
    small << 0, 1;
    CHECK_THROWS_AS(logistic_fit(small, Eigen::MatrixXd(2, 2)), ValidationError);

    Eigen::VectorXi ok(6);
    ok << 0, 1, 0, 1, 0, 1;
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(6, 1);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(logistic_fit(ok, bad), ValidationError);
}

TEST_CASE("separation is flagged, not thrown")
{
    Eigen::VectorXi y(8);
    Eigen::MatrixXd x(8, 1);
    for (int i = 0; i < 8; ++i)
    {
        x(i, 0) = i;
        y(i) = i < 4 ? 0 : 1;  // perfectly separated at x = 3.5
    }
    const LogisticFit fit = logistic_fit(y, x);
    CHECK(fit.separation);
    CHECK_FALSE(fit.converged);

    const AssocResult r = wald_test(fit, 0, "rs1", AssocMethod::uncorrected);
    CHECK_FALSE(r.converged);
    CHECK(std::isnan(r.p_value));
}

TEST_CASE("logistic optimum passes gradient, curvature, and grid checks")
{
    const int n = 120;
    Rng rng(31);
    Eigen::VectorXi y(n);
    Eigen::MatrixXd x(n, 2);
    for (int i = 0; i < n; ++i)
    {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.uniform(0.0, 2.0);
        const double eta = -0.3 + 0.8 * x(i, 0) - 0.5 * x(i, 1);
        y(i) = rng.bernoulli(1.0 / (1.0 + std::exp(-eta))) ? 1 : 0;
    }
    const LogisticFit fit = logistic_fit(y, x);
    REQUIRE(fit.converged);

    // score at the optimum
    Eigen::VectorXd score = Eigen::VectorXd::Zero(3);
    for (int i = 0; i < n; ++i)
    {
        const double eta = fit.beta(0) + fit.beta(1) * x(i, 0) + fit.beta(2) * x(i, 1);
        const double resid = y(i) - 1.0 / (1.0 + std::exp(-eta));
        score(0) += resid;
        score(1) += resid * x(i, 0);
        score(2) += resid * x(i, 1);
    }
    CHECK(score.cwiseAbs().maxCoeff() <= 1e-6);

    // covariance (inverse observed information) is positive definite
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fit.covariance);
    CHECK(es.eigenvalues().minCoeff() > 0.0);

    // no grid point around the optimum improves the likelihood
    const double at_opt = loglik(y, x, fit.beta);
    Rng pert(77);
    for (int g = 0; g < 21; ++g)
    {
        Eigen::VectorXd b = fit.beta;
        for (int j = 0; j < 3; ++j)
        {
            b(j) += 0.5 * (pert.uniform() - 0.5);
        }
        CHECK(loglik(y, x, b) <= at_opt + 1e-12);
    }
}

TEST_CASE("wald p-values follow the chi-square(1) tail")
{
    CHECK(std::abs(chisq1_upper(3.841) - 0.05) <= 1e-4);
    CHECK(chisq1_upper(1.96 * 1.96) == doctest::Approx(0.05).epsilon(2e-3));
    CHECK(chisq1_upper(0.0) == doctest::Approx(1.0));
    CHECK(chisq1_upper(100.0) < 1e-20);
    CHECK_THROWS_AS(chisq1_upper(-0.5), ValidationError);

    // beta-hat = 0 by symmetry: wald 0, p 1
    Eigen::VectorXi y(4);
    Eigen::MatrixXd x(4, 1);
    y << 0, 1, 0, 1;
    x << 0, 0, 1, 1;
    const LogisticFit fit = logistic_fit(y, x);
    const AssocResult r = wald_test(fit, 0, "rs0", AssocMethod::uncorrected);
    CHECK(r.wald == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(r.p_value == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("conditional logistic reproduces the matched-pairs closed form")
{
    // 10 discordant pairs with the case exposed, 5 with the control
    // exposed, 3 concordant pairs (uninformative, dropped)
    const int n = 36;
    Eigen::VectorXd x(n);
    Eigen::VectorXi y(n);
    std::vector<std::vector<int>> groups;
    int row = 0;
    for (int p = 0; p < 10; ++p)
    {
        x(row) = 1; y(row) = 1;
        x(row + 1) = 0; y(row + 1) = 0;
        groups.push_back({row, row + 1});
        row += 2;
    }
    for (int p = 0; p < 5; ++p)
    {
        x(row) = 0; y(row) = 1;
        x(row + 1) = 1; y(row + 1) = 0;
        groups.push_back({row, row + 1});
        row += 2;
    }
    for (int p = 0; p < 3; ++p)
    {
        x(row) = 1; y(row) = 1;
        x(row + 1) = 1; y(row + 1) = 0;
        groups.push_back({row, row + 1});
        row += 2;
    }
    const MatchedStrata strata = make_strata(groups, y);
    const LogisticFit fit = conditional_logistic_fit(strata, x, y);
    REQUIRE(fit.converged);
    CHECK(std::abs(fit.beta(0) - std::log(2.0)) <= 1e-6);
    CHECK_FALSE(fit.has_intercept);

    // matched-pairs information: 15 pairs contributing p(1-p), p = 2/3
    const double info = 15.0 * (2.0 / 3.0) * (1.0 / 3.0);
    CHECK(fit.covariance(0, 0) == doctest::Approx(1.0 / info).epsilon(1e-6));
}

TEST_CASE("conditional logistic agrees with brute-force enumeration")
{
    // three mixed strata, allele-count covariate
    Rng rng(92);
    const int n = 12;
    Eigen::VectorXd x(n);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i)
    {
        x(i) = static_cast<double>(rng.uniform_int(3));
    }
    y << 1, 0, 0, /**/ 1, 1, 0, 0, /**/ 1, 0, 1, 0, 0;
    const MatchedStrata strata =
        make_strata({{0, 1, 2}, {3, 4, 5, 6}, {7, 8, 9, 10, 11}}, y);

    const LogisticFit fit = conditional_logistic_fit(strata, x, y);
    REQUIRE(fit.converged);

    const double oracle = maximize(
        [&](double b) { return cond_loglik(strata, x, y, b); }, -10.0, 10.0);
    CHECK(std::abs(fit.beta(0) - oracle) <= 1e-6);

    // numeric score at the reported optimum vanishes
    const double h = 1e-5;
    const double d1 = (cond_loglik(strata, x, y, fit.beta(0) + h) -
                       cond_loglik(strata, x, y, fit.beta(0) - h)) /
                      (2.0 * h);
    CHECK(std::abs(d1) <= 1e-5);
}

TEST_CASE("single whole-panel stratum matches the enumeration oracle")
{
    Rng rng(414);
    const int n = 9;
    Eigen::VectorXd x(n);
    Eigen::VectorXi y(n);
    y << 1, 1, 0, 0, 1, 0, 0, 0, 1;
    for (int i = 0; i < n; ++i)
    {
        x(i) = static_cast<double>(rng.uniform_int(3));
    }
    std::vector<int> everyone(n);
    std::iota(everyone.begin(), everyone.end(), 0);
    const MatchedStrata strata = make_strata({everyone}, y);

    const LogisticFit fit = conditional_logistic_fit(strata, x, y);
    REQUIRE(fit.converged);
    const double oracle = maximize(
        [&](double b) { return cond_loglik(strata, x, y, b); }, -10.0, 10.0);
    CHECK(std::abs(fit.beta(0) - oracle) <= 1e-6);
}

TEST_CASE("uninformative strata are dropped; all dropped is an error")
{
    Eigen::VectorXd x(4);
    Eigen::VectorXi y(4);
    x << 1, 1, 2, 2;  // constant within each stratum
    y << 1, 0, 1, 0;
    const MatchedStrata strata = make_strata({{0, 1}, {2, 3}}, y);
    CHECK_THROWS_AS(conditional_logistic_fit(strata, x, y), ValidationError);
}

TEST_CASE("cmh statistic is zero on balanced tables")
{
    // single stratum, all four allele cells equal
    Eigen::VectorXi strata(4);
    Eigen::VectorXd x(4);
    Eigen::VectorXi y(4);
    strata << 0, 0, 0, 0;
    x << 2, 0, 2, 0;
    y << 1, 1, 0, 0;
    const AssocResult r = cmh_test(strata, x, y, "rs7");
    CHECK(r.wald == doctest::Approx(0.0));
    CHECK(r.p_value == doctest::Approx(1.0));
    CHECK(r.converged);
    CHECK(r.snp == "rs7");
    CHECK(std::isnan(r.beta));

    // two identical strata with allele odds ratio 1
    Eigen::VectorXi strata2(6);
    Eigen::VectorXd x2(6);
    Eigen::VectorXi y2(6);
    strata2 << 0, 0, 0, 1, 1, 1;
    x2 << 2, 0, 1, 2, 0, 1;
    y2 << 1, 1, 0, 1, 1, 0;
    const AssocResult r2 = cmh_test(strata2, x2, y2);
    CHECK(r2.wald == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("cmh matches a direct formula computation")
{
    // five random two-stratum tables vs an independent accumulation
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
        Rng rng(seed * 1234);
        const int n = 40;
        Eigen::VectorXi strata(n);
        Eigen::VectorXd x(n);
        Eigen::VectorXi y(n);
        for (int i = 0; i < n; ++i)
        {
            strata(i) = i < n / 2 ? 0 : 1;
            x(i) = static_cast<double>(rng.uniform_int(3));
            y(i) = static_cast<int>(rng.bernoulli(0.5));
        }

        double sum_a = 0.0;
        double sum_e = 0.0;
        double sum_v = 0.0;
        bool any = false;
        for (int k = 0; k < 2; ++k)
        {
            double n11 = 0.0, t1 = 0.0, m1 = 0.0, total = 0.0;
            for (int i = 0; i < n; ++i)
            {
                if (strata(i) != k)
                {
                    continue;
                }
                total += 2.0;
                m1 += x(i);
                if (y(i) == 1)
                {
                    t1 += 2.0;
                    n11 += x(i);
                }
            }
            const double t0 = total - t1;
            const double m0 = total - m1;
            if (t1 == 0.0 || t0 == 0.0 || m1 == 0.0 || m0 == 0.0)
            {
                continue;
            }
            any = true;
            sum_a += n11;
            sum_e += t1 * m1 / total;
            sum_v += t1 * t0 * m1 * m0 / (total * total * (total - 1.0));
        }
        REQUIRE(any);
        const double stat = (sum_a - sum_e) * (sum_a - sum_e) / sum_v;

        const AssocResult r = cmh_test(strata, x, y);
        CHECK(std::abs(r.wald - stat) <= 1e-8);
        CHECK(r.p_value == doctest::Approx(chisq1_upper(stat)));
    }
}

TEST_CASE("cmh skips degenerate strata and negative labels")
{
    Eigen::VectorXi strata(8);
    Eigen::VectorXd x(8);
    Eigen::VectorXi y(8);
    // stratum 0: informative; stratum 1: all cases (degenerate margin);
    // label -1: ignored entirely
    strata << 0, 0, 0, 0, 1, 1, -1, -1;
    x << 2, 1, 0, 1, 1, 2, 2, 2;
    y << 1, 1, 0, 0, 1, 1, 1, 0;

    Eigen::VectorXi informative(4);
    Eigen::VectorXd xi(4);
    Eigen::VectorXi yi(4);
    informative << 0, 0, 0, 0;
    xi << 2, 1, 0, 1;
    yi << 1, 1, 0, 0;

    const AssocResult full = cmh_test(strata, x, y);
    const AssocResult only = cmh_test(informative, xi, yi);
    CHECK(full.wald == doctest::Approx(only.wald));

    // every stratum degenerate -> error
    Eigen::VectorXi bad_strata(4);
    Eigen::VectorXd bad_x(4);
    Eigen::VectorXi bad_y(4);
    bad_strata << 0, 0, 1, 1;
    bad_x << 1, 2, 1, 2;
    bad_y << 1, 1, 0, 0;  // no controls in stratum 0, no cases in stratum 1
    CHECK_THROWS_AS(cmh_test(bad_strata, bad_x, bad_y), ValidationError);

    Eigen::VectorXd out_of_range(4);
    out_of_range << 1, 2, 3, 1;
    CHECK_THROWS_AS(cmh_test(informative, out_of_range, yi), ValidationError);
}

TEST_CASE("assoc_scan equals per-SNP direct fits and handles missingness")
{
    GenotypeMatrix g = test::make_panel(50, 6, 808, true);
    g.counts(3, 2) = 0.0;
    g.missing(3, 2) = true;
    g.counts(11, 2) = 0.0;
    g.missing(11, 2) = true;
    g.counts.col(4).setConstant(1.0);  // constant SNP: fit cannot converge

    const std::vector<AssocResult> results =
        assoc_scan(g, AssocMethod::uncorrected, AssocScanContext{}, 1);
    REQUIRE(results.size() == 6);

    for (int j = 0; j < 6; ++j)
    {
        CHECK(results[static_cast<std::size_t>(j)].snp == g.snps[static_cast<std::size_t>(j)]);
        CHECK(results[static_cast<std::size_t>(j)].method == AssocMethod::uncorrected);
    }

    // SNP 2: direct fit on the 48 subjects with an observed genotype
    std::vector<int> keep;
    for (int i = 0; i < 50; ++i)
    {
        if (!g.missing(i, 2))
        {
            keep.push_back(i);
        }
    }
    Eigen::VectorXi y(static_cast<Eigen::Index>(keep.size()));
    Eigen::MatrixXd x(static_cast<Eigen::Index>(keep.size()), 1);
    for (std::size_t r = 0; r < keep.size(); ++r)
    {
        y(static_cast<Eigen::Index>(r)) = (*g.phenotype)(keep[r]);
        x(static_cast<Eigen::Index>(r), 0) = g.counts(keep[r], 2);
    }
    const AssocResult direct =
        wald_test(logistic_fit(y, x), 0, g.snps[2], AssocMethod::uncorrected);
    CHECK(results[2].beta == doctest::Approx(direct.beta).epsilon(1e-12));
    CHECK(results[2].p_value == doctest::Approx(direct.p_value).epsilon(1e-12));

    // constant SNP is flagged, not thrown
    CHECK_FALSE(results[4].converged);
    CHECK(std::isnan(results[4].p_value));

    // phenotype is required
    GenotypeMatrix no_pheno = test::make_panel(20, 3, 9);
    CHECK_THROWS_AS(assoc_scan(no_pheno, AssocMethod::uncorrected, AssocScanContext{}, 1),
                    ValidationError);
}

TEST_CASE("assoc_scan covariate methods match direct construction")
{
    const StructuredPanel panel = gen_structured(2, 0.1, 80, 400, 5150);
    GenotypeMatrix g = panel.genotypes;
    ScenarioSpec spec;
    spec.cluster_prob = {0.5, 0.5};
    spec.case_prob = {0.3, 0.7};
    spec.seed = 99;
    g.phenotype = assign_phenotypes(panel.labels, spec);

    const StandardizedMatrix s = standardize(g, true);
    const Spectrum lap =
        eigendecompose(normalized_laplacian(spectral_weights(s)), SpectrumSource::laplacian);
    const Embedding e = embed(psd_kernel(lap).spectrum, 2, true);

    AssocScanContext ctx;
    ctx.embedding = &e;
    const std::vector<AssocResult> scan = assoc_scan(g, AssocMethod::spectral_r, ctx, 1);

    const int j = 5;
    Eigen::MatrixXd cov(80, 1 + e.coords.cols());
    cov.col(0) = g.counts.col(j);
    cov.rightCols(e.coords.cols()) = e.coords;
    const AssocResult direct =
        wald_test(logistic_fit(*g.phenotype, cov), 0, g.snps[static_cast<std::size_t>(j)],
                  AssocMethod::spectral_r);
    CHECK(scan[j].beta == doctest::Approx(direct.beta).epsilon(1e-12));
    CHECK(scan[j].se == doctest::Approx(direct.se).epsilon(1e-12));
    CHECK(scan[j].method == AssocMethod::spectral_r);

    // spectralGEM on a complete panel equals a direct conditional fit
    const MatchedStrata strata = match_strata(e, *g.phenotype, 8);
    AssocScanContext gem_ctx;
    gem_ctx.strata = &strata;
    const std::vector<AssocResult> gem = assoc_scan(g, AssocMethod::spectral_gem, gem_ctx, 1);
    const LogisticFit cond = conditional_logistic_fit(strata, g.counts.col(j), *g.phenotype);
    CHECK(gem[j].beta == doctest::Approx(cond.beta(0)).epsilon(1e-10));

    // cmh via scan equals cmh_test with the same labels
    AssocScanContext cmh_ctx;
    const Eigen::VectorXi labels = panel.labels;
    cmh_ctx.cluster_labels = &labels;
    const std::vector<AssocResult> cmh = assoc_scan(g, AssocMethod::cmh, cmh_ctx, 1);
    const AssocResult direct_cmh =
        cmh_test(labels, g.counts.col(j), *g.phenotype, g.snps[static_cast<std::size_t>(j)]);
    CHECK(cmh[j].wald == doctest::Approx(direct_cmh.wald).epsilon(1e-12));

    // missing context objects are rejected
    CHECK_THROWS_AS(assoc_scan(g, AssocMethod::spectral_r, AssocScanContext{}, 1),
                    ValidationError);
    CHECK_THROWS_AS(assoc_scan(g, AssocMethod::spectral_gem, AssocScanContext{}, 1),
                    ValidationError);
    CHECK_THROWS_AS(assoc_scan(g, AssocMethod::cmh, AssocScanContext{}, 1), ValidationError);
}

TEST_CASE("assoc_scan is thread invariant")
{
    GenotypeMatrix g = test::make_panel(60, 25, 2718, true);
    const std::vector<AssocResult> one =
        assoc_scan(g, AssocMethod::uncorrected, AssocScanContext{}, 1);
    const std::vector<AssocResult> four =
        assoc_scan(g, AssocMethod::uncorrected, AssocScanContext{}, 4);
    REQUIRE(one.size() == four.size());
    for (std::size_t j = 0; j < one.size(); ++j)
    {
        CHECK(one[j].beta == four[j].beta);
        CHECK(one[j].se == four[j].se);
        CHECK(one[j].wald == four[j].wald);
        // NaN-safe comparison for flagged results
        CHECK(((one[j].p_value == four[j].p_value) ||
               (std::isnan(one[j].p_value) && std::isnan(four[j].p_value))));
    }
}

TEST_CASE("assoc_scan_block tests external causal genotypes")
{
    GenotypeMatrix g = test::make_panel(40, 3, 606, true);
    Rng rng(5);
    Eigen::MatrixXd block(40, 2);
    for (int i = 0; i < 40; ++i)
    {
        block(i, 0) = static_cast<double>(rng.uniform_int(3));
        block(i, 1) = static_cast<double>(rng.uniform_int(3));
    }
    const std::vector<AssocResult> results = assoc_scan_block(
        block, *g.phenotype, AssocMethod::uncorrected, AssocScanContext{}, 1, "c");
    REQUIRE(results.size() == 2);
    CHECK(results[0].snp == "c_1");
    CHECK(results[1].snp == "c_2");

    const AssocResult direct =
        wald_test(logistic_fit(*g.phenotype, block.col(0)), 0, "c_1", AssocMethod::uncorrected);
    CHECK(results[0].beta == doctest::Approx(direct.beta).epsilon(1e-12));
}

TEST_CASE("method names round trip")
{
    for (AssocMethod m : {AssocMethod::uncorrected, AssocMethod::spectral_r,
                          AssocMethod::spectral_gem, AssocMethod::cmh, AssocMethod::pca_r})
    {
        CHECK(assoc_method_from_name(assoc_method_name(m)) == m);
    }
    CHECK(assoc_method_name(AssocMethod::spectral_r) == "spectralR");
    CHECK(assoc_method_name(AssocMethod::spectral_gem) == "spectralGEM");
    CHECK_THROWS_AS(assoc_method_from_name("bogus"), ValidationError);
}
