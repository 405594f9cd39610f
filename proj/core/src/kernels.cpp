#include "sga/kernels.hpp"

#include "sga/common.hpp"

namespace sga
{

KernelMatrix pca_kernel(const StandardizedMatrix& x)
{
    KernelMatrix k;
    k.kind = KernelKind::pca;
    k.h.noalias() = x.x * x.x.transpose();
    // force exact symmetry against rounding in the product
    k.h = 0.5 * (k.h + k.h.transpose()).eval();
    if (!k.h.allFinite())
    {
        throw NumericError("PCA kernel contains non-finite entries");
    }
    return k;
}

WeightMatrix spectral_weights(const StandardizedMatrix& x)
{
    return spectral_weights(x.x);
}

WeightMatrix spectral_weights(const Eigen::MatrixXd& rows)
{
    const Eigen::MatrixXd dot = (rows * rows.transpose()).eval();
    const Eigen::Index n = dot.rows();
    WeightMatrix wm;
    wm.w.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        for (Eigen::Index j = i; j < n; ++j)
        {
            const double v = 0.5 * (dot(i, j) + dot(j, i));
            const double w = v > 0.0 ? std::sqrt(v) : 0.0;
            wm.w(i, j) = w;
            wm.w(j, i) = w;
        }
    }
    if (!wm.w.allFinite())
    {
        throw NumericError("spectral weight matrix contains non-finite entries");
    }
    wm.degrees = wm.w.rowwise().sum();
    return wm;
}

WeightMatrix ibs_weights(const GenotypeMatrix& g, double sigma2)
{
    if (sigma2 <= 0.0)
    {
        throw ValidationError("ibs_weights requires sigma2 > 0");
    }
    g.validate();
    const Eigen::Index n = g.n_subjects();
    const Eigen::Index p = g.n_snps();
    WeightMatrix wm;
    wm.w.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        wm.w(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j)
        {
            double share = 0.0;
            Eigen::Index observed = 0;
            for (Eigen::Index k = 0; k < p; ++k)
            {
                if (g.missing(i, k) || g.missing(j, k))
                {
                    continue;
                }
                share += 1.0 - std::abs(g.counts(i, k) - g.counts(j, k)) / 2.0;
                ++observed;
            }
            if (observed == 0)
            {
                throw ValidationError("subjects " + g.subjects[static_cast<std::size_t>(i)] + " and " +
                                      g.subjects[static_cast<std::size_t>(j)] +
                                      " share no jointly observed SNP");
            }
            const double s = share / static_cast<double>(observed);
            const double w = std::exp(-(1.0 - s) * (1.0 - s) / sigma2);
            wm.w(i, j) = w;
            wm.w(j, i) = w;
        }
    }
    wm.degrees = wm.w.rowwise().sum();
    return wm;
}

}  // namespace sga
