#include "sga/eigencore.hpp"

#include "sga/common.hpp"

#include <Eigen/Eigenvalues>

namespace sga
{

namespace
{

constexpr double kSymTol = 1e-10;
constexpr double kZeroTol = 1e-8;

void fix_signs(Eigen::MatrixXd& vectors)
{
    for (Eigen::Index j = 0; j < vectors.cols(); ++j)
    {
        Eigen::Index argmax = 0;
        vectors.col(j).cwiseAbs().maxCoeff(&argmax);
        if (vectors(argmax, j) < 0.0)
        {
            vectors.col(j) = -vectors.col(j);
        }
    }
}

}  // namespace

Eigen::MatrixXd normalized_laplacian(const WeightMatrix& w, std::span<const std::string> subject_ids)
{
    const Eigen::Index n = w.w.rows();
    if (w.w.cols() != n || w.degrees.size() != n)
    {
        throw ValidationError("weight matrix is not square or degrees are stale");
    }
    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (!(w.degrees(i) > 0.0))
        {
            const std::string who = i < static_cast<Eigen::Index>(subject_ids.size())
                                        ? subject_ids[static_cast<std::size_t>(i)]
                                        : ("#" + std::to_string(i));
            throw NumericError("isolated vertex (zero degree) at subject " + who);
        }
    }
    const Eigen::VectorXd dinv_sqrt = w.degrees.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd lap(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        for (Eigen::Index j = i; j < n; ++j)
        {
            const double off = -w.w(i, j) * dinv_sqrt(i) * dinv_sqrt(j);
            const double v = (i == j) ? 1.0 + off : off;
            lap(i, j) = v;
            lap(j, i) = v;
        }
    }
    return lap;
}

Spectrum eigendecompose(const Eigen::MatrixXd& a, SpectrumSource source)
{
    const Eigen::Index n = a.rows();
    if (a.cols() != n || n == 0)
    {
        throw ValidationError("eigendecompose requires a non-empty square matrix");
    }
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > kSymTol * scale)
    {
        throw NumericError("eigendecompose: input is not symmetric within tolerance");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success)
    {
        const double residual = (a - solver.eigenvectors() * solver.eigenvalues().asDiagonal() *
                                         solver.eigenvectors().transpose())
                                    .norm();
        throw NumericError("symmetric eigendecomposition did not converge, reconstruction residual " +
                           format_value(residual));
    }

    Spectrum s;
    s.source = source;
    s.eigenvalues = solver.eigenvalues();  // ascending
    s.eigenvectors = solver.eigenvectors();

    if (source == SpectrumSource::kernel)
    {
        // descending order
        s.eigenvalues.reverseInPlace();
        s.eigenvectors = s.eigenvectors.rowwise().reverse().eval();
    }
    else
    {
        // Laplacian contract: 0 <= nu <= 2, nu_1 = 0 up to round-off.
        const double lo = s.eigenvalues.minCoeff();
        const double hi = s.eigenvalues.maxCoeff();
        if (lo < -kZeroTol || hi > 2.0 + kZeroTol)
        {
            throw NumericError("Laplacian eigenvalues outside [0, 2]: min " + format_value(lo) +
                               ", max " + format_value(hi));
        }
        for (Eigen::Index i = 0; i < n; ++i)
        {
            if (std::abs(s.eigenvalues(i)) <= kZeroTol)
            {
                s.eigenvalues(i) = 0.0;
            }
        }
    }
    fix_signs(s.eigenvectors);
    return s;
}

PsdKernel psd_kernel(const Spectrum& lap_spectrum)
{
    if (lap_spectrum.source != SpectrumSource::laplacian)
    {
        throw ValidationError("psd_kernel expects a Laplacian spectrum");
    }
    PsdKernel out;
    out.spectrum.source = SpectrumSource::kernel;
    // nu ascending implies lambda = max(0, 1 - nu) already descending.
    out.spectrum.eigenvalues = (1.0 - lap_spectrum.eigenvalues.array()).max(0.0).matrix();
    out.spectrum.eigenvectors = lap_spectrum.eigenvectors;
    out.kernel.kind = KernelKind::spectral_psd;
    out.kernel.h.noalias() = out.spectrum.eigenvectors *
                             out.spectrum.eigenvalues.asDiagonal() *
                             out.spectrum.eigenvectors.transpose();
    out.kernel.h = 0.5 * (out.kernel.h + out.kernel.h.transpose()).eval();
    return out;
}

Embedding embed(const Spectrum& spec, int d, bool includes_trivial)
{
    if (d < 1)
    {
        throw ValidationError("embedding dimension must be >= 1");
    }
    Eigen::Index nonzero = 0;
    for (Eigen::Index i = 0; i < spec.size(); ++i)
    {
        if (spec.eigenvalues(i) != 0.0)
        {
            ++nonzero;
        }
    }
    if (d > nonzero)
    {
        throw ValidationError("embedding dimension " + std::to_string(d) +
                              " exceeds the kernel rank " + std::to_string(nonzero));
    }
    Embedding e;
    e.d = d;
    e.includes_trivial = includes_trivial;
    e.eigenvalues_used = spec.eigenvalues.head(d);
    e.coords = spec.eigenvectors.leftCols(d) *
               e.eigenvalues_used.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    if (!e.coords.allFinite())
    {
        throw NumericError("embedding contains non-finite coordinates");
    }
    return e;
}

double mds_distance(const KernelMatrix& h, Eigen::Index i, Eigen::Index j)
{
    const double sq = h.h(i, i) + h.h(j, j) - 2.0 * h.h(i, j);
    if (sq < -kZeroTol)
    {
        throw NumericError("negative squared kernel distance " + format_value(sq) +
                           ": kernel is not PSD");
    }
    return std::sqrt(std::max(sq, 0.0));
}

}  // namespace sga
