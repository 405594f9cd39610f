#pragma once

#include "sga/genotype.hpp"
#include "sga/standardize.hpp"

#include <Eigen/Dense>

namespace sga
{

enum class KernelKind
{
    pca,
    spectral_psd,
};

/// Symmetric n x n similarity kernel (Gram matrix of the embedding).
struct KernelMatrix
{
    Eigen::MatrixXd h;
    KernelKind kind = KernelKind::pca;
};

/// Symmetric non-negative graph weights over subjects, with vertex degrees.
struct WeightMatrix
{
    Eigen::MatrixXd w;
    Eigen::VectorXd degrees;
};

/// H = X X^t. Rejects non-finite output.
KernelMatrix pca_kernel(const StandardizedMatrix& x);

/// w_ij = sqrt(x_i . x_j) when the inner product is non-negative, else 0.
/// The diagonal w_ii = ||x_i|| is kept.
WeightMatrix spectral_weights(const StandardizedMatrix& x);

/// Same construction on arbitrary row features (used when re-testing subsets
/// of an embedding for homogeneity).
WeightMatrix spectral_weights(const Eigen::MatrixXd& rows);

/// Identity-by-state kernel w_ij = exp(-(1 - s_ij)^2 / sigma2), where s_ij
/// averages the per-SNP allele sharing 1 - |c_i - c_j|/2 over SNPs
/// non-missing in both subjects. w_ii = 1. Errors if a pair has no jointly
/// observed SNP.
WeightMatrix ibs_weights(const GenotypeMatrix& g, double sigma2);

}  // namespace sga
