#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sga
{

/// Phenotype code for a subject with no recorded case/control status.
inline constexpr int kPhenotypeMissing = -1;

/// Subjects x SNPs table of minor-allele counts with a missingness mask.
/// Rows follow `subjects`, columns follow `snps`. Missing cells hold 0 in
/// `counts` and true in `missing`.
struct GenotypeMatrix
{
    std::vector<std::string> subjects;
    std::vector<std::string> snps;
    Eigen::MatrixXd counts;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> missing;
    std::optional<Eigen::VectorXi> phenotype;  // 1 case, 0 control, -1 missing

    Eigen::Index n_subjects() const { return counts.rows(); }
    Eigen::Index n_snps() const { return counts.cols(); }

    bool has_complete_phenotype() const;

    /// Checks all structural invariants; throws ValidationError.
    void validate() const;

    /// Row subset preserving order of `rows`.
    GenotypeMatrix subset_subjects(const std::vector<int>& rows) const;
};

/// Reads a whitespace/tab separated table: header row with the subject-ID
/// column name, an optional "phenotype" column, then SNP IDs; one row per
/// subject with cells 0/1/2/NA (phenotype cells 0/1/NA).
GenotypeMatrix read_genotypes(const std::filesystem::path& path);

/// Writes the same format read_genotypes accepts.
void write_genotypes(const GenotypeMatrix& g, const std::filesystem::path& path);

/// Keeps SNPs with minor allele frequency >= maf_min (MAF computed over
/// non-missing entries) and missing rate <= miss_max. Subjects unchanged.
GenotypeMatrix qc_filter(const GenotypeMatrix& g, double maf_min, double miss_max);

/// Per-SNP minor allele frequency min(f, 1-f), f = mean(count)/2 over
/// non-missing entries; NaN for all-missing columns.
Eigen::VectorXd snp_maf(const GenotypeMatrix& g);

/// Per-SNP fraction of missing entries.
Eigen::VectorXd snp_missing_rate(const GenotypeMatrix& g);

}  // namespace sga
