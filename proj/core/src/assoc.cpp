#include "sga/assoc.hpp"

#include "sga/common.hpp"
#include "sga/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace sga
{

namespace
{

constexpr double kScoreTol = 1e-8;
constexpr double kDevianceTol = 1e-10;
constexpr double kSeparationBound = 15.0;
constexpr int kMaxIter = 50;

double log1pexp(double eta)
{
    if (eta > 0.0)
        return eta + std::log1p(std::exp(-eta));
    return std::log1p(std::exp(eta));
}

}  // namespace

double chisq1_upper(double w)
{
    if (w < 0.0)
        throw ValidationError("chi-square statistic must be non-negative");
    return std::erfc(std::sqrt(w / 2.0));
}

std::string assoc_method_name(AssocMethod m)
{
    switch (m)
    {
        case AssocMethod::uncorrected: return "uncorrected";
        case AssocMethod::spectral_r: return "spectralR";
        case AssocMethod::spectral_gem: return "spectralGEM";
        case AssocMethod::cmh: return "cmh";
        case AssocMethod::pca_r: return "pcaR";
    }
    throw ValidationError("unknown association method");
}

AssocMethod assoc_method_from_name(const std::string& name)
{
    if (name == "uncorrected")
        return AssocMethod::uncorrected;
    if (name == "spectralR")
        return AssocMethod::spectral_r;
    if (name == "spectralGEM")
        return AssocMethod::spectral_gem;
    if (name == "cmh")
        return AssocMethod::cmh;
    if (name == "pcaR")
        return AssocMethod::pca_r;
    throw ValidationError("unknown association method '" + name + "'");
}

LogisticFit logistic_fit(const Eigen::VectorXi& y, const Eigen::MatrixXd& covariates)
{
    const Eigen::Index n = y.size();
    if (covariates.rows() != n)
        throw ValidationError("covariate rows must match the outcome length");
    const Eigen::Index q = covariates.cols() + 1;
    if (n <= q)
        throw ValidationError("logistic fit needs more observations than coefficients");

    double mean_y = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (y(i) != 0 && y(i) != 1)
            throw ValidationError("logistic outcome must be 0/1");
        mean_y += y(i);
    }
    mean_y /= static_cast<double>(n);
    if (mean_y == 0.0 || mean_y == 1.0)
        throw ValidationError("logistic outcome is constant");

    Eigen::MatrixXd design(n, q);
    design.col(0).setOnes();
    design.rightCols(q - 1) = covariates;
    if (!design.allFinite())
        throw ValidationError("covariates contain non-finite values");

    // Fit on centered, unit-variance covariates: Newton steps are affine
    // invariant, the information matrix is better conditioned, and the
    // divergence bound below acts on a scale-free parameterization.
    Eigen::VectorXd shift = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(q);
    for (Eigen::Index k = 1; k < q; ++k)
    {
        shift(k) = design.col(k).mean();
        design.col(k).array() -= shift(k);
        const double sd = std::sqrt(design.col(k).squaredNorm() / static_cast<double>(n));
        if (sd > 0.0)
        {
            scale(k) = sd;
            design.col(k) /= sd;
        }
    }

    Eigen::MatrixXd back = Eigen::MatrixXd::Zero(q, q);
    back(0, 0) = 1.0;
    for (Eigen::Index k = 1; k < q; ++k)
    {
        back(k, k) = 1.0 / scale(k);
        back(0, k) = -shift(k) / scale(k);
    }

    Eigen::VectorXd yd = y.cast<double>();
    LogisticFit fit;
    fit.beta = Eigen::VectorXd::Zero(q);
    double deviance = std::numeric_limits<double>::infinity();

    const auto finish = [&](LogisticFit f) {
        f.beta = back * f.beta;
        if (f.covariance.size() > 0)
            f.covariance = back * f.covariance * back.transpose();
        return f;
    };

    Eigen::VectorXd mu(n);
    Eigen::VectorXd wts(n);
    Eigen::MatrixXd info(q, q);
    for (int iter = 1; iter <= kMaxIter; ++iter)
    {
        fit.iterations = iter;
        const Eigen::VectorXd eta = design * fit.beta;
        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            mu(i) = 1.0 / (1.0 + std::exp(-eta(i)));
            wts(i) = mu(i) * (1.0 - mu(i));
            ll += yd(i) * eta(i) - log1pexp(eta(i));
        }
        const double new_deviance = -2.0 * ll;
        const Eigen::VectorXd score = design.transpose() * (yd - mu);
        fit.max_score = score.cwiseAbs().maxCoeff();

        const double rel_change = std::abs(new_deviance - deviance) /
                                  (std::abs(new_deviance) + kDevianceTol);
        deviance = new_deviance;
        fit.deviance = deviance;
        if (fit.max_score <= kScoreTol || (iter > 1 && rel_change <= kDevianceTol))
        {
            fit.converged = true;
            break;
        }

        info.noalias() = design.transpose() * wts.asDiagonal() * design;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
        if (!lu.isInvertible())
        {
            fit.converged = false;
            fit.separation = true;
            return finish(fit);
        }
        fit.beta += lu.solve(score);
        // Divergence bound on the standardized scale (scale-free).
        if (fit.beta.cwiseAbs().maxCoeff() > kSeparationBound)
        {
            fit.converged = false;
            fit.separation = true;
            return finish(fit);
        }
    }

    if (fit.converged)
    {
        info.noalias() = design.transpose() * wts.asDiagonal() * design;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
        if (!lu.isInvertible())
        {
            fit.converged = false;
            fit.separation = true;
            return finish(fit);
        }
        fit.covariance = lu.inverse();
    }
    return finish(fit);
}

AssocResult wald_test(const LogisticFit& fit, int covariate_index, const std::string& snp,
                      AssocMethod method)
{
    AssocResult r;
    r.snp = snp;
    r.method = method;
    const int offset = fit.has_intercept ? 1 : 0;
    const int idx = offset + covariate_index;
    if (covariate_index < 0 || idx >= fit.beta.size())
        throw ValidationError("covariate index out of range in wald_test");
    if (!fit.converged)
    {
        r.converged = false;
        return r;
    }
    r.converged = true;
    r.beta = fit.beta(idx);
    r.se = std::sqrt(fit.covariance(idx, idx));
    if (!(r.se > 0.0) || !std::isfinite(r.se))
    {
        r.converged = false;
        r.se = std::numeric_limits<double>::quiet_NaN();
        r.beta = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    const double z = r.beta / r.se;
    r.wald = z * z;
    r.p_value = chisq1_upper(r.wald);
    return r;
}

namespace
{

/// Per-stratum sufficient statistics of the conditional likelihood at beta:
/// log denominator, E[S], Var[S] for S = sum of case x-values over all
/// case-subsets of the stratum's case count.
struct StratumMoments
{
    double log_denom = 0.0;
    double mean = 0.0;
    double var = 0.0;
};

StratumMoments stratum_moments(const std::vector<double>& v, int m, double beta)
{
    const int c = static_cast<int>(v.size());
    // A_k: sum over k-subsets of exp(beta * sum v); B, C carry the first two
    // moments of sum v alongside.
    std::vector<double> a(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<double> b(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<double> cc(static_cast<std::size_t>(m) + 1, 0.0);
    a[0] = 1.0;
    for (int j = 0; j < c; ++j)
    {
        const double z = std::exp(beta * v[static_cast<std::size_t>(j)]);
        const double vj = v[static_cast<std::size_t>(j)];
        for (int k = std::min(j + 1, m); k >= 1; --k)
        {
            cc[static_cast<std::size_t>(k)] +=
                z * (cc[static_cast<std::size_t>(k - 1)] +
                     2.0 * vj * b[static_cast<std::size_t>(k - 1)] +
                     vj * vj * a[static_cast<std::size_t>(k - 1)]);
            b[static_cast<std::size_t>(k)] +=
                z * (b[static_cast<std::size_t>(k - 1)] + vj * a[static_cast<std::size_t>(k - 1)]);
            a[static_cast<std::size_t>(k)] += z * a[static_cast<std::size_t>(k - 1)];
        }
    }
    const double denom = a[static_cast<std::size_t>(m)];
    if (!(denom > 0.0) || !std::isfinite(denom))
        throw NumericError("conditional likelihood denominator overflowed");
    StratumMoments out;
    out.log_denom = std::log(denom);
    out.mean = b[static_cast<std::size_t>(m)] / denom;
    out.var = cc[static_cast<std::size_t>(m)] / denom - out.mean * out.mean;
    return out;
}

struct CondStratum
{
    std::vector<double> x;  // centered within the stratum
    int n_cases = 0;
    double observed = 0.0;  // case x-sum after centering
};

}  // namespace

LogisticFit conditional_logistic_fit(const MatchedStrata& strata, const Eigen::VectorXd& x,
                                     const Eigen::VectorXi& y)
{
    std::vector<CondStratum> informative;
    for (const auto& members : strata.strata)
    {
        if (members.empty())
            continue;
        CondStratum s;
        double sum = 0.0;
        for (int i : members)
        {
            if (i < 0 || i >= x.size() || i >= y.size())
                throw ValidationError("stratum refers to a subject outside the data");
            if (y(i) != 0 && y(i) != 1)
                throw ValidationError("conditional logistic outcome must be 0/1");
            sum += x(i);
        }
        const double mean = sum / static_cast<double>(members.size());
        bool constant = true;
        for (int i : members)
        {
            const double centered = x(i) - mean;
            s.x.push_back(centered);
            if (centered != 0.0)
                constant = false;
            if (y(i) == 1)
            {
                ++s.n_cases;
                s.observed += centered;
            }
        }
        if (constant)
            continue;
        if (s.n_cases == 0 || s.n_cases == static_cast<int>(members.size()))
            continue;  // no case/control contrast, likelihood term is 1
        informative.push_back(std::move(s));
    }
    if (informative.empty())
        throw ValidationError("all strata are uninformative for the conditional fit");

    LogisticFit fit;
    fit.has_intercept = false;
    fit.beta = Eigen::VectorXd::Zero(1);
    double loglik = -std::numeric_limits<double>::infinity();

    double info = 0.0;
    for (int iter = 1; iter <= kMaxIter; ++iter)
    {
        fit.iterations = iter;
        double ll = 0.0;
        double score = 0.0;
        info = 0.0;
        for (const auto& s : informative)
        {
            const StratumMoments m = stratum_moments(s.x, s.n_cases, fit.beta(0));
            ll += fit.beta(0) * s.observed - m.log_denom;
            score += s.observed - m.mean;
            info += m.var;
        }
        fit.max_score = std::abs(score);
        fit.deviance = -2.0 * ll;
        const double rel_change = std::abs(ll - loglik) / (std::abs(ll) + kDevianceTol);
        loglik = ll;
        if (fit.max_score <= kScoreTol || (iter > 1 && rel_change <= kDevianceTol))
        {
            fit.converged = true;
            break;
        }
        if (!(info > 0.0) || !std::isfinite(info))
        {
            fit.separation = true;
            return fit;
        }
        fit.beta(0) += score / info;
        if (std::abs(fit.beta(0)) > kSeparationBound)
        {
            fit.separation = true;
            return fit;
        }
    }

    if (fit.converged)
    {
        if (!(info > 0.0))
        {
            fit.converged = false;
            fit.separation = true;
            return fit;
        }
        fit.covariance = Eigen::MatrixXd::Constant(1, 1, 1.0 / info);
    }
    return fit;
}

AssocResult cmh_test(const Eigen::VectorXi& strata, const Eigen::VectorXd& x,
                     const Eigen::VectorXi& y, const std::string& snp)
{
    const Eigen::Index n = x.size();
    if (strata.size() != n || y.size() != n)
        throw ValidationError("cmh_test inputs must have equal length");

    const int n_strata = n > 0 ? strata.maxCoeff() + 1 : 0;
    double num = 0.0;
    double var = 0.0;
    int used = 0;
    for (int k = 0; k < n_strata; ++k)
    {
        double case_alleles = 0.0;
        double minor_alleles = 0.0;
        long n_cases = 0;
        long n_controls = 0;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            if (strata(i) != k)
                continue;
            if (y(i) != 0 && y(i) != 1)
                throw ValidationError("cmh_test outcome must be 0/1");
            if (x(i) < 0.0 || x(i) > 2.0)
                throw ValidationError("cmh_test allele counts must lie in [0, 2]");
            minor_alleles += x(i);
            if (y(i) == 1)
            {
                ++n_cases;
                case_alleles += x(i);
            }
            else
            {
                ++n_controls;
            }
        }
        const double n1 = 2.0 * static_cast<double>(n_cases);
        const double n0 = 2.0 * static_cast<double>(n_controls);
        const double big_n = n1 + n0;
        const double m1 = minor_alleles;
        const double m0 = big_n - m1;
        if (n1 <= 0.0 || n0 <= 0.0 || m1 <= 0.0 || m0 <= 0.0 || big_n < 2.0)
            continue;  // degenerate margin
        num += case_alleles - n1 * m1 / big_n;
        var += n1 * n0 * m1 * m0 / (big_n * big_n * (big_n - 1.0));
        ++used;
    }
    if (used == 0 || !(var > 0.0))
        throw ValidationError("cmh_test: every stratum has a degenerate margin");

    AssocResult r;
    r.snp = snp;
    r.method = AssocMethod::cmh;
    r.converged = true;
    r.wald = num * num / var;
    r.p_value = chisq1_upper(r.wald);
    return r;
}

namespace
{

AssocResult scan_one(const Eigen::VectorXd& x_all, const std::vector<bool>& observed,
                     const Eigen::VectorXi& y_all, AssocMethod method,
                     const AssocScanContext& ctx, const std::string& snp)
{
    std::vector<int> obs;
    obs.reserve(static_cast<std::size_t>(x_all.size()));
    for (Eigen::Index i = 0; i < x_all.size(); ++i)
        if (observed[static_cast<std::size_t>(i)])
            obs.push_back(static_cast<int>(i));

    const auto gather_x = [&]() {
        Eigen::VectorXd x(static_cast<Eigen::Index>(obs.size()));
        for (std::size_t r = 0; r < obs.size(); ++r)
            x(static_cast<Eigen::Index>(r)) = x_all(obs[r]);
        return x;
    };
    const auto gather_y = [&]() {
        Eigen::VectorXi y(static_cast<Eigen::Index>(obs.size()));
        for (std::size_t r = 0; r < obs.size(); ++r)
            y(static_cast<Eigen::Index>(r)) = y_all(obs[r]);
        return y;
    };

    switch (method)
    {
        case AssocMethod::uncorrected:
        {
            const LogisticFit fit = logistic_fit(gather_y(), gather_x());
            return wald_test(fit, 0, snp, method);
        }
        case AssocMethod::spectral_r:
        case AssocMethod::pca_r:
        {
            if (ctx.embedding == nullptr)
                throw ValidationError("assoc_scan needs an embedding for this method");
            const Eigen::MatrixXd& coords = ctx.embedding->coords;
            if (coords.rows() != x_all.size())
                throw ValidationError("embedding rows must match the subject count");
            Eigen::MatrixXd cov(static_cast<Eigen::Index>(obs.size()), 1 + coords.cols());
            for (std::size_t r = 0; r < obs.size(); ++r)
            {
                cov(static_cast<Eigen::Index>(r), 0) = x_all(obs[r]);
                cov.row(static_cast<Eigen::Index>(r)).tail(coords.cols()) = coords.row(obs[r]);
            }
            const LogisticFit fit = logistic_fit(gather_y(), cov);
            return wald_test(fit, 0, snp, method);
        }
        case AssocMethod::spectral_gem:
        {
            if (ctx.strata == nullptr)
                throw ValidationError("assoc_scan needs matched strata for spectralGEM");
            MatchedStrata filtered;
            for (const auto& members : ctx.strata->strata)
            {
                std::vector<int> kept;
                int cases = 0;
                int controls = 0;
                for (int i : members)
                {
                    if (i < 0 || i >= static_cast<int>(observed.size()))
                        throw ValidationError("stratum refers to a subject outside the data");
                    if (!observed[static_cast<std::size_t>(i)])
                        continue;
                    kept.push_back(i);
                    (y_all(i) == 1 ? cases : controls)++;
                }
                if (cases >= 1 && controls >= 1)
                    filtered.strata.push_back(std::move(kept));
            }
            const LogisticFit fit = conditional_logistic_fit(filtered, x_all, y_all);
            return wald_test(fit, 0, snp, method);
        }
        case AssocMethod::cmh:
        {
            if (ctx.cluster_labels == nullptr)
                throw ValidationError("assoc_scan needs cluster labels for cmh");
            if (ctx.cluster_labels->size() != x_all.size())
                throw ValidationError("cluster labels must match the subject count");
            Eigen::VectorXi strata(static_cast<Eigen::Index>(obs.size()));
            for (std::size_t r = 0; r < obs.size(); ++r)
                strata(static_cast<Eigen::Index>(r)) = (*ctx.cluster_labels)(obs[r]);
            return cmh_test(strata, gather_x(), gather_y(), snp);
        }
    }
    throw ValidationError("unknown association method");
}

AssocResult scan_one_guarded(const Eigen::VectorXd& x_all, const std::vector<bool>& observed,
                             const Eigen::VectorXi& y_all, AssocMethod method,
                             const AssocScanContext& ctx, const std::string& snp)
{
    try
    {
        return scan_one(x_all, observed, y_all, method, ctx, snp);
    }
    catch (const ValidationError&)
    {
    }
    catch (const NumericError&)
    {
    }
    AssocResult r;
    r.snp = snp;
    r.method = method;
    r.converged = false;
    return r;
}

// Missing context members are caller errors that would flag every single
// test; report them once up front instead.
void require_context(AssocMethod method, const AssocScanContext& ctx, Eigen::Index n)
{
    switch (method)
    {
        case AssocMethod::uncorrected:
            return;
        case AssocMethod::spectral_r:
        case AssocMethod::pca_r:
            if (ctx.embedding == nullptr)
                throw ValidationError("assoc_scan needs an embedding for this method");
            if (ctx.embedding->coords.rows() != n)
                throw ValidationError("embedding rows must match the subject count");
            return;
        case AssocMethod::spectral_gem:
            if (ctx.strata == nullptr)
                throw ValidationError("assoc_scan needs matched strata for spectralGEM");
            for (const auto& members : ctx.strata->strata)
                for (int i : members)
                    if (i < 0 || i >= static_cast<int>(n))
                        throw ValidationError("stratum refers to a subject outside the data");
            return;
        case AssocMethod::cmh:
            if (ctx.cluster_labels == nullptr)
                throw ValidationError("assoc_scan needs cluster labels for cmh");
            if (ctx.cluster_labels->size() != n)
                throw ValidationError("cluster labels must match the subject count");
            return;
    }
    throw ValidationError("unknown association method");
}

}  // namespace

std::vector<AssocResult> assoc_scan(const GenotypeMatrix& g, AssocMethod method,
                                    const AssocScanContext& ctx, int threads)
{
    if (!g.has_complete_phenotype())
        throw ValidationError("assoc_scan needs a complete phenotype");
    require_context(method, ctx, g.n_subjects());
    const Eigen::VectorXi& y = *g.phenotype;
    const Eigen::Index p = g.n_snps();
    std::vector<AssocResult> results(static_cast<std::size_t>(p));
    parallel_for(static_cast<int>(p), threads, [&](int j) {
        const Eigen::VectorXd x = g.counts.col(j);
        std::vector<bool> observed(static_cast<std::size_t>(g.n_subjects()));
        for (Eigen::Index i = 0; i < g.n_subjects(); ++i)
            observed[static_cast<std::size_t>(i)] = !g.missing(i, j);
        results[static_cast<std::size_t>(j)] =
            scan_one_guarded(x, observed, y, method, ctx, g.snps[static_cast<std::size_t>(j)]);
    });
    return results;
}

std::vector<AssocResult> assoc_scan_block(const Eigen::MatrixXd& block, const Eigen::VectorXi& y,
                                          AssocMethod method, const AssocScanContext& ctx,
                                          int threads, const std::string& snp_prefix)
{
    if (block.rows() != y.size())
        throw ValidationError("genotype block rows must match the phenotype length");
    require_context(method, ctx, block.rows());
    const Eigen::Index p = block.cols();
    std::vector<AssocResult> results(static_cast<std::size_t>(p));
    const std::vector<bool> observed(static_cast<std::size_t>(block.rows()), true);
    parallel_for(static_cast<int>(p), threads, [&](int j) {
        const Eigen::VectorXd x = block.col(j);
        results[static_cast<std::size_t>(j)] = scan_one_guarded(
            x, observed, y, method, ctx, snp_prefix + "_" + std::to_string(j + 1));
    });
    return results;
}

}  // namespace sga
