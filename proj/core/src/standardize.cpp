#include "sga/standardize.hpp"

#include "sga/common.hpp"

namespace sga
{

StandardizedMatrix standardize(const GenotypeMatrix& g, bool scale)
{
    g.validate();
    const Eigen::Index n = g.n_subjects();
    const Eigen::Index p = g.n_snps();

    std::vector<Eigen::Index> keep;
    std::vector<double> means, sds;
    keep.reserve(static_cast<std::size_t>(p));

    Eigen::MatrixXd imputed(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
    {
        double sum = 0.0;
        Eigen::Index count = 0;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            if (!g.missing(i, j))
            {
                sum += g.counts(i, j);
                ++count;
            }
        }
        if (count == 0)
        {
            continue;  // all-missing column, treat as monomorphic
        }
        const double mean = sum / static_cast<double>(count);
        double ss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const double v = g.missing(i, j) ? mean : g.counts(i, j);
            imputed(i, j) = v - mean;
            ss += (v - mean) * (v - mean);
        }
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (sd <= 0.0)
        {
            continue;
        }
        keep.push_back(j);
        means.push_back(mean);
        sds.push_back(sd);
    }

    if (keep.empty())
    {
        throw ValidationError("all SNP columns are monomorphic after imputation");
    }

    StandardizedMatrix out;
    out.scaled = scale;
    out.dropped_monomorphic = static_cast<int>(p - static_cast<Eigen::Index>(keep.size()));
    out.x.resize(n, static_cast<Eigen::Index>(keep.size()));
    out.col_means = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
    out.col_sds = Eigen::Map<Eigen::VectorXd>(sds.data(), static_cast<Eigen::Index>(sds.size()));
    out.source_snps.reserve(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k)
    {
        const Eigen::Index j = keep[k];
        out.source_snps.push_back(g.snps[static_cast<std::size_t>(j)]);
        out.x.col(static_cast<Eigen::Index>(k)) = imputed.col(j);
        if (scale)
        {
            out.x.col(static_cast<Eigen::Index>(k)) /= sds[k];
        }
    }
    return out;
}

}  // namespace sga
