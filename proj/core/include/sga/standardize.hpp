#pragma once

#include "sga/genotype.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace sga
{

/// Centered (optionally scaled) feature matrix derived from allele counts.
/// Monomorphic columns are dropped; `source_snps` names the survivors.
struct StandardizedMatrix
{
    Eigen::MatrixXd x;
    Eigen::VectorXd col_means;
    Eigen::VectorXd col_sds;
    std::vector<std::string> source_snps;
    int dropped_monomorphic = 0;
    bool scaled = true;
};

/// Imputes missing entries to the column mean of the non-missing entries
/// (exactly 0 after centering), centers every column, and when `scale` is
/// set divides by the sample standard deviation (n-1 denominator, computed
/// on the imputed column). Columns with zero variance are dropped.
StandardizedMatrix standardize(const GenotypeMatrix& g, bool scale = true);

}  // namespace sga
