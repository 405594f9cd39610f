#pragma once

#include "sga/assoc.hpp"
#include "sga/cluster.hpp"
#include "sga/dimsel.hpp"
#include "sga/eigencore.hpp"
#include "sga/genotype.hpp"
#include "sga/kernels.hpp"
#include "sga/matching.hpp"
#include "sga/standardize.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sga
{

enum class KernelChoice
{
    spectral,
    pca,
    ibs,
};

std::string kernel_choice_name(KernelChoice k);
KernelChoice kernel_choice_from_name(const std::string& name);

struct AnalysisConfig
{
    KernelChoice kernel = KernelChoice::spectral;
    bool scale = true;
    double ibs_sigma2 = 0.0;  // required iff kernel == ibs
    ThresholdModel threshold = ThresholdModel::builtin_default();
    int pca_dims = 10;
    int min_cluster_size = 5;
    // Small strata keep case:control ratios near the local mix; large ones
    // concentrate one phenotype and dilute the conditional likelihood.
    int max_stratum_size = 8;
    std::optional<int> n_clusters;  // explicit Ward cut; nullopt = auto
    std::string output_dir;         // empty: keep everything in memory
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const;
};

/// Shared first half of Algorithm runs: weights, Laplacian spectrum, PSD
/// kernel, eigengap report, and the d-dimensional embedding (d clamped to
/// the kernel rank). Writes stage TSVs when output_dir is set.
struct SpectralFrontEnd
{
    WeightMatrix weights;
    Spectrum lap_spectrum;
    PsdKernel kernel;
    EigengapReport report;
    Embedding embedding;
};

SpectralFrontEnd spectral_front_end(const GenotypeMatrix& g, const AnalysisConfig& config,
                                    const std::string& artifact_prefix = "");

struct SpectralRResult
{
    EigengapReport report;
    Embedding embedding;
    std::vector<AssocResult> results;
};

struct SpectralGemResult
{
    EigengapReport report;
    Embedding embedding;           // full panel
    ClusterModel clusters;
    UnmatchableReport unmatchable;
    Embedding matched_embedding;   // recomputed on the retained subjects
    MatchedStrata strata;          // indices into the retained subject order
    std::vector<std::string> retained_subjects;
    std::vector<AssocResult> results;
};

struct PcaResult
{
    Embedding embedding;
    std::vector<AssocResult> results;
};

SpectralRResult run_spectral_r(const GenotypeMatrix& g, const AnalysisConfig& config);

SpectralGemResult run_spectral_gem(const GenotypeMatrix& g, const AnalysisConfig& config);

PcaResult run_pca_baseline(const GenotypeMatrix& g, const AnalysisConfig& config);

/// PCA embedding without association (no phenotype needed).
Embedding pca_embedding(const GenotypeMatrix& g, const AnalysisConfig& config);

/// Largest usable embedding dimension of a kernel spectrum.
int kernel_rank(const Spectrum& kernel_spectrum);

std::string analysis_config_to_json(const AnalysisConfig& config);

/// FNV-1a hash of the canonical config JSON, as fixed-width hex.
std::string config_hash(const std::string& canonical_json);

/// Writes manifest.json (tool version, config, config hash, seed; no
/// timestamps) into output_dir. No-op when output_dir is empty.
void write_manifest(const AnalysisConfig& config);

}  // namespace sga
