#pragma once

#include "sga/assoc.hpp"
#include "sga/genotype.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace sga
{

/// Disease scenario: sampling proportion and case probability per cluster.
struct ScenarioSpec
{
    std::vector<std::string> cluster_names;
    std::vector<double> cluster_prob;    // sums to 1
    std::vector<double> case_prob;       // P(case | cluster), each in [0,1]
    std::uint64_t seed = 0;

    int n_clusters() const { return static_cast<int>(cluster_prob.size()); }
    void validate() const;
};

struct StructuredPanel
{
    GenotypeMatrix genotypes;
    Eigen::VectorXi labels;          // true cluster per subject, 0..k-1
    Eigen::MatrixXd cluster_freqs;   // k x p per-population allele frequencies
};

/// Homogeneous panel: f_j ~ Uniform(0.05, 0.5), genotypes Binomial(2, f_j).
GenotypeMatrix gen_homogeneous(int n, int p, std::uint64_t seed);

/// Balding-Nichols structured panel. Ancestral f_j ~ Uniform(0.05, 0.5);
/// population frequencies Beta(f(1-fst)/fst, (1-f)(1-fst)/fst); genotypes
/// Binomial(2, pop frequency). Subjects are partitioned by largest-remainder
/// rounding of `proportions` (equal shares when empty).
StructuredPanel gen_structured(int k, double fst, int n, int p, std::uint64_t seed,
                               const std::vector<double>& proportions = {});

/// Independent Bernoulli(P(case | cluster)) phenotype draws.
Eigen::VectorXi assign_phenotypes(const Eigen::VectorXi& labels, const ScenarioSpec& spec);

/// Per-cluster empirical allele frequencies of a panel, k x p.
Eigen::MatrixXd cluster_allele_freqs(const GenotypeMatrix& g, const Eigen::VectorXi& labels, int k);

/// n x m block of causal genotypes. Baseline frequency p_k for each causal
/// SNP comes from a randomly chosen column of `panel_cluster_freqs`. Controls
/// draw HWE probabilities ((1-p)^2, 2p(1-p), p^2); cases draw probabilities
/// proportional to ((1-p)^2, 2Rp(1-p), R^2 p^2).
Eigen::MatrixXd gen_causal_snps(const Eigen::VectorXi& y, const Eigen::VectorXi& labels,
                                double relative_risk, int m,
                                const Eigen::MatrixXd& panel_cluster_freqs, std::uint64_t seed);

/// Case genotype distribution ((1-p)^2, 2Rp(1-p), R^2 p^2) normalized.
Eigen::Vector3d case_genotype_probs(double relative_risk, double p);

struct ExperimentConfig
{
    ScenarioSpec scenario;
    double fst = 0.01;
    int n = 0;
    int p = 0;
    int n_causal = 0;
    double relative_risk = 1.0;
    std::vector<AssocMethod> methods;
    std::vector<double> alphas{0.05};
    int reps = 1;
    std::uint64_t seed = 0;
    int threads = 1;
    int pca_dims = 10;  // fixed d for the PCA baseline

    void validate() const;
};

/// One method x alpha cell of an experiment table.
struct ExperimentCell
{
    AssocMethod method{};
    double alpha = 0.0;
    double type1_rate = 0.0;   // fraction of null-SNP tests with p < alpha
    double power = 0.0;        // fraction of causal-SNP tests with p < alpha
    long null_tests = 0;
    long null_rejections = 0;
    long causal_tests = 0;
    long causal_rejections = 0;
    long flagged = 0;          // tests that returned no p-value
};

struct ExperimentResult
{
    std::vector<ExperimentCell> cells;
    int reps = 0;
};

/// Runs `reps` independent replicates: structured panel, phenotypes, causal
/// block, then every requested association scan on the null panel and the
/// causal block. Outliers are not removed. Deterministic in (config, seed)
/// regardless of thread count.
ExperimentResult run_experiment(const ExperimentConfig& config);

ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& config);

}  // namespace sga
