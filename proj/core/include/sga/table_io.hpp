#pragma once

#include "sga/assoc.hpp"
#include "sga/cluster.hpp"
#include "sga/dimsel.hpp"
#include "sga/eigencore.hpp"
#include "sga/matching.hpp"
#include "sga/simulate.hpp"

#include <string>
#include <vector>

namespace sga
{

/// All writers emit TSV with a one-line header; floats carry 12 significant
/// digits and NaN prints as NA.

void write_embedding_tsv(const std::string& path, const std::vector<std::string>& subjects,
                         const Embedding& e);

void write_eigenvalues_tsv(const std::string& path, const Spectrum& spectrum);

void write_eigengap_tsv(const std::string& path, const EigengapReport& report);

/// subject, cluster: cluster is the assignment index, -1 for outliers.
void write_clusters_tsv(const std::string& path, const std::vector<std::string>& subjects,
                        const ClusterModel& c);

/// subject, stratum, phenotype for every subject placed in a stratum.
void write_strata_tsv(const std::string& path, const std::vector<std::string>& subjects,
                      const MatchedStrata& strata, const Eigen::VectorXi& phenotype);

void write_assoc_tsv(const std::string& path, const std::vector<AssocResult>& results);

void write_experiment_tsv(const std::string& path, const ExperimentResult& result);

void write_text_file(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

}  // namespace sga
