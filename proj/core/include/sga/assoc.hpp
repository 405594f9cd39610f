#pragma once

#include "sga/eigencore.hpp"
#include "sga/genotype.hpp"
#include "sga/matching.hpp"

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

namespace sga
{

enum class AssocMethod
{
    uncorrected,
    spectral_r,
    spectral_gem,
    cmh,
    pca_r,
};

std::string assoc_method_name(AssocMethod m);
AssocMethod assoc_method_from_name(const std::string& name);

/// One SNP's test. beta/se/p_value are NaN when unavailable (CMH has no
/// estimate; non-converged fits have no p-value).
struct AssocResult
{
    std::string snp;
    AssocMethod method = AssocMethod::uncorrected;
    double beta = std::numeric_limits<double>::quiet_NaN();
    double se = std::numeric_limits<double>::quiet_NaN();
    double wald = std::numeric_limits<double>::quiet_NaN();
    double p_value = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
};

struct LogisticFit
{
    Eigen::VectorXd beta;        // intercept first when has_intercept
    Eigen::MatrixXd covariance;  // inverse observed information
    double deviance = 0.0;
    double max_score = 0.0;
    int iterations = 0;
    bool converged = false;
    bool separation = false;
    bool has_intercept = true;
};

/// Maximum-likelihood logistic regression of y on [1, covariates] by IRLS.
/// Converges when max |score| <= 1e-8 or the relative deviance change
/// <= 1e-10, capped at 50 iterations. |beta| > 15 on any coordinate is
/// treated as separation: the fit is flagged, not errored.
LogisticFit logistic_fit(const Eigen::VectorXi& y, const Eigen::MatrixXd& covariates);

/// Wald test of covariate `covariate_index` (0 = the first caller-supplied
/// column; the intercept is not addressable). p = upper tail of chi^2(1).
AssocResult wald_test(const LogisticFit& fit, int covariate_index, const std::string& snp,
                      AssocMethod method);

/// Exact conditional logistic regression of the scalar allele-count effect
/// on matched strata, by Newton on the conditional log likelihood. Strata
/// with constant x are uninformative and dropped; all dropped is an error.
LogisticFit conditional_logistic_fit(const MatchedStrata& strata, const Eigen::VectorXd& x,
                                     const Eigen::VectorXi& y);

/// Cochran-Mantel-Haenszel test on 2x2xK allele-count tables (each subject
/// contributes 2 alleles), no continuity correction. Subjects with stratum
/// < 0 are ignored; strata with a degenerate margin are skipped; all
/// skipped is an error.
AssocResult cmh_test(const Eigen::VectorXi& strata, const Eigen::VectorXd& x,
                     const Eigen::VectorXi& y, const std::string& snp = "");

/// Side inputs for assoc_scan; only the member needed by the method has to
/// be set.
struct AssocScanContext
{
    const Embedding* embedding = nullptr;       // spectral_r, pca_r
    const MatchedStrata* strata = nullptr;      // spectral_gem
    const Eigen::VectorXi* cluster_labels = nullptr;  // cmh
};

/// One AssocResult per SNP of g, in SNP order. Subjects with a missing
/// genotype are dropped from that SNP's test only. Per-SNP failures are
/// returned as non-converged results, never thrown.
std::vector<AssocResult> assoc_scan(const GenotypeMatrix& g, AssocMethod method,
                                    const AssocScanContext& ctx, int threads = 1);

/// Same scan over an external block of complete genotypes (columns are
/// SNPs) sharing the panel's subjects.
std::vector<AssocResult> assoc_scan_block(const Eigen::MatrixXd& block, const Eigen::VectorXi& y,
                                          AssocMethod method, const AssocScanContext& ctx,
                                          int threads = 1,
                                          const std::string& snp_prefix = "causal");

/// Upper tail of the chi-square distribution with 1 degree of freedom.
double chisq1_upper(double w);

}  // namespace sga
