#pragma once

#include "sga/kernels.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>

namespace sga
{

enum class SpectrumSource
{
    laplacian,
    kernel,
};

/// Full eigendecomposition of a symmetric matrix.
///
/// Ordering depends on the source: Laplacian eigenvalues ascending
/// (nu_1 = 0 first), kernel eigenvalues descending (lambda_1 largest).
/// Columns of `eigenvectors` align with `eigenvalues` and are orthonormal.
/// Each eigenvector is oriented so its largest-magnitude entry is positive,
/// which pins the output files down to a reproducible choice.
struct Spectrum
{
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    SpectrumSource source = SpectrumSource::kernel;

    Eigen::Index size() const { return eigenvalues.size(); }
};

/// Eigenvalue-rescaled coordinates: column j holds lambda_j^{1/2} u_j.
/// `includes_trivial` marks embeddings whose first column is the rescaled
/// degree vector (lambda_1 = 1 direction of a normalized-Laplacian kernel);
/// display output skips that column, distances keep it.
struct Embedding
{
    Eigen::MatrixXd coords;
    int d = 0;
    Eigen::VectorXd eigenvalues_used;
    bool includes_trivial = false;
};

/// Normalized graph Laplacian I - D^{-1/2} W D^{-1/2}, equal to
/// D^{-1/2} (D - W) D^{-1/2}. Requires every degree positive; an isolated
/// vertex is reported by subject ID when IDs are supplied.
Eigen::MatrixXd normalized_laplacian(const WeightMatrix& w,
                                     std::span<const std::string> subject_ids = {});

/// Dense symmetric eigendecomposition with the Spectrum ordering/sign
/// contract. Rejects matrices that are not symmetric within 1e-10.
/// For source = laplacian, eigenvalues within 1e-8 of zero are clamped to
/// exactly zero and the [0, 2] range is verified.
Spectrum eigendecompose(const Eigen::MatrixXd& a, SpectrumSource source);

struct PsdKernel
{
    KernelMatrix kernel;
    Spectrum spectrum;  // kernel ordering (descending)
};

/// PSD surrogate of I - Laplacian: eigenvalues lambda_i = max(0, 1 - nu_i)
/// with the Laplacian's eigenvectors.
PsdKernel psd_kernel(const Spectrum& lap_spectrum);

/// Top-d rescaled eigenvector coordinates (columns lambda_j^{1/2} u_j).
/// d must not exceed the number of nonzero eigenvalues.
Embedding embed(const Spectrum& spec, int d, bool includes_trivial = false);

/// Kernel-induced distance sqrt(h_ii + h_jj - 2 h_ij). Squared distances
/// in [-1e-8, 0) are clamped to 0; anything lower is a PSD violation.
double mds_distance(const KernelMatrix& h, Eigen::Index i, Eigen::Index j);

}  // namespace sga
