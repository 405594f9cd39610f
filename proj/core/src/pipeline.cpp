#include "sga/pipeline.hpp"

#include "sga/common.hpp"
#include "sga/table_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>

namespace sga
{

std::string kernel_choice_name(KernelChoice k)
{
    switch (k)
    {
        case KernelChoice::spectral: return "spectral";
        case KernelChoice::pca: return "pca";
        case KernelChoice::ibs: return "ibs";
    }
    throw ValidationError("unknown kernel choice");
}

KernelChoice kernel_choice_from_name(const std::string& name)
{
    if (name == "spectral")
        return KernelChoice::spectral;
    if (name == "pca")
        return KernelChoice::pca;
    if (name == "ibs")
        return KernelChoice::ibs;
    throw ValidationError("unknown kernel '" + name + "'");
}

void AnalysisConfig::validate() const
{
    if (kernel == KernelChoice::ibs)
    {
        if (ibs_sigma2 <= 0.0)
            throw ValidationError("the ibs kernel needs sigma2 > 0");
    }
    else if (ibs_sigma2 != 0.0)
    {
        throw ValidationError("sigma2 is only meaningful with the ibs kernel");
    }
    if (pca_dims < 1)
        throw ValidationError("pca_dims must be >= 1");
    if (min_cluster_size < 1)
        throw ValidationError("min_cluster_size must be >= 1");
    if (max_stratum_size < 2)
        throw ValidationError("max_stratum_size must be >= 2");
    if (threads < 1)
        throw ValidationError("threads must be >= 1");
    if (n_clusters && *n_clusters < 1)
        throw ValidationError("n_clusters must be >= 1 when given");
}

int kernel_rank(const Spectrum& kernel_spectrum)
{
    const double top = kernel_spectrum.eigenvalues.size() > 0
                           ? std::abs(kernel_spectrum.eigenvalues.maxCoeff())
                           : 0.0;
    const double tol = 1e-10 * std::max(1.0, top);
    int rank = 0;
    for (Eigen::Index i = 0; i < kernel_spectrum.eigenvalues.size(); ++i)
        if (kernel_spectrum.eigenvalues(i) > tol)
            ++rank;
    return rank;
}

namespace
{

std::filesystem::path artifact_path(const AnalysisConfig& config, const std::string& name)
{
    return std::filesystem::path(config.output_dir) / name;
}

void ensure_output_dir(const AnalysisConfig& config)
{
    if (config.output_dir.empty())
        return;
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec)
        throw ValidationError("cannot create output directory '" + config.output_dir +
                              "': " + ec.message());
}

nlohmann::json config_json(const AnalysisConfig& config)
{
    nlohmann::json j;
    j["kernel"] = kernel_choice_name(config.kernel);
    j["scale"] = config.scale;
    if (config.kernel == KernelChoice::ibs)
        j["sigma2"] = config.ibs_sigma2;
    j["threshold"] = {{"a", config.threshold.a},
                      {"b", config.threshold.b},
                      {"c", config.threshold.c},
                      {"quantile", config.threshold.quantile}};
    j["pca_dims"] = config.pca_dims;
    j["min_cluster_size"] = config.min_cluster_size;
    j["max_stratum_size"] = config.max_stratum_size;
    if (config.n_clusters)
        j["n_clusters"] = *config.n_clusters;
    j["seed"] = config.seed;
    return j;
}

}  // namespace

std::string analysis_config_to_json(const AnalysisConfig& config)
{
    return config_json(config).dump(2) + "\n";
}

std::string config_hash(const std::string& canonical_json)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : canonical_json)
    {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void write_manifest(const AnalysisConfig& config)
{
    if (config.output_dir.empty())
        return;
    ensure_output_dir(config);
    const nlohmann::json cfg = config_json(config);
    nlohmann::json manifest;
    manifest["tool"] = "spectral_ancestry";
    manifest["version"] = kVersion;
    manifest["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                                std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION);
    manifest["seed"] = config.seed;
    manifest["config"] = cfg;
    manifest["config_hash"] = config_hash(analysis_config_to_json(config));
    write_text_file(artifact_path(config, "manifest.json").string(), manifest.dump(2) + "\n");
}

SpectralFrontEnd spectral_front_end(const GenotypeMatrix& g, const AnalysisConfig& config,
                                    const std::string& artifact_prefix)
{
    config.validate();
    g.validate();
    if (config.kernel == KernelChoice::pca)
        throw ValidationError("the pca kernel has no Laplacian front end; use the pca baseline");
    ensure_output_dir(config);

    SpectralFrontEnd fe;
    if (config.kernel == KernelChoice::spectral)
    {
        const StandardizedMatrix x = standardize(g, config.scale);
        fe.weights = spectral_weights(x);
    }
    else
    {
        fe.weights = ibs_weights(g, config.ibs_sigma2);
    }

    const Eigen::MatrixXd lap = normalized_laplacian(fe.weights, g.subjects);
    fe.lap_spectrum = eigendecompose(lap, SpectrumSource::laplacian);
    if (!config.output_dir.empty())
        write_eigenvalues_tsv(artifact_path(config, artifact_prefix + "laplacian_eigenvalues.tsv").string(),
                              fe.lap_spectrum);

    fe.kernel = psd_kernel(fe.lap_spectrum);
    fe.report = select_dimension(fe.lap_spectrum, static_cast<int>(g.n_subjects()),
                                 static_cast<int>(g.n_snps()), config.threshold);
    if (!config.output_dir.empty())
        write_eigengap_tsv(artifact_path(config, artifact_prefix + "eigengap.tsv").string(),
                           fe.report);

    const int d = std::max(1, std::min(fe.report.d_selected, kernel_rank(fe.kernel.spectrum)));
    fe.embedding = embed(fe.kernel.spectrum, d, true);
    if (!config.output_dir.empty())
        write_embedding_tsv(artifact_path(config, artifact_prefix + "embedding.tsv").string(),
                            g.subjects, fe.embedding);
    return fe;
}

SpectralRResult run_spectral_r(const GenotypeMatrix& g, const AnalysisConfig& config)
{
    write_manifest(config);
    const SpectralFrontEnd fe = spectral_front_end(g, config);

    AssocScanContext ctx;
    ctx.embedding = &fe.embedding;
    SpectralRResult out;
    out.report = fe.report;
    out.embedding = fe.embedding;
    out.results = assoc_scan(g, AssocMethod::spectral_r, ctx, config.threads);
    if (!config.output_dir.empty())
        write_assoc_tsv(artifact_path(config, "assoc_spectralR.tsv").string(), out.results);
    return out;
}

SpectralGemResult run_spectral_gem(const GenotypeMatrix& g, const AnalysisConfig& config)
{
    if (!g.has_complete_phenotype())
        throw ValidationError("spectralGEM needs a complete phenotype");
    write_manifest(config);

    SpectralGemResult out;
    const SpectralFrontEnd fe = spectral_front_end(g, config);
    out.report = fe.report;
    out.embedding = fe.embedding;

    out.clusters = ward_cluster(fe.embedding, config.n_clusters, config.min_cluster_size,
                                static_cast<int>(g.n_snps()), config.threshold);
    if (!config.output_dir.empty())
    {
        write_clusters_tsv(artifact_path(config, "clusters.tsv").string(), g.subjects,
                           out.clusters);
        write_text_file(artifact_path(config, "dendrogram.txt").string(),
                        dendrogram_export(out.clusters));
    }

    const Eigen::VectorXi& y = *g.phenotype;
    out.unmatchable = remove_unmatchable(out.clusters, y, fe.embedding);
    if (!config.output_dir.empty())
    {
        std::string removed = "subject\n";
        for (int i : out.unmatchable.removed)
            removed += g.subjects[static_cast<std::size_t>(i)] + "\n";
        write_text_file(artifact_path(config, "unmatchable.tsv").string(), removed);
    }

    const GenotypeMatrix retained = g.subset_subjects(out.unmatchable.retained);
    out.retained_subjects = retained.subjects;
    const SpectralFrontEnd fe2 = spectral_front_end(retained, config, "matched_");
    out.matched_embedding = fe2.embedding;

    const Eigen::VectorXi& y_retained = *retained.phenotype;
    out.strata = match_strata(fe2.embedding, y_retained, config.max_stratum_size);
    out.strata.removed = out.unmatchable.removed;
    if (!config.output_dir.empty())
        write_strata_tsv(artifact_path(config, "strata.tsv").string(), retained.subjects,
                         out.strata, y_retained);

    AssocScanContext ctx;
    ctx.strata = &out.strata;
    out.results = assoc_scan(retained, AssocMethod::spectral_gem, ctx, config.threads);
    if (!config.output_dir.empty())
        write_assoc_tsv(artifact_path(config, "assoc_spectralGEM.tsv").string(), out.results);
    return out;
}

Embedding pca_embedding(const GenotypeMatrix& g, const AnalysisConfig& config)
{
    config.validate();
    g.validate();
    const StandardizedMatrix x = standardize(g, config.scale);
    const KernelMatrix kernel = pca_kernel(x);
    const Spectrum spec = eigendecompose(kernel.h, SpectrumSource::kernel);
    const int d = std::max(1, std::min(config.pca_dims, kernel_rank(spec)));
    return embed(spec, d, false);
}

PcaResult run_pca_baseline(const GenotypeMatrix& g, const AnalysisConfig& config)
{
    write_manifest(config);
    ensure_output_dir(config);

    PcaResult out;
    const StandardizedMatrix x = standardize(g, config.scale);
    const KernelMatrix kernel = pca_kernel(x);
    const Spectrum spec = eigendecompose(kernel.h, SpectrumSource::kernel);
    if (!config.output_dir.empty())
        write_eigenvalues_tsv(artifact_path(config, "pca_eigenvalues.tsv").string(), spec);
    const int d = std::max(1, std::min(config.pca_dims, kernel_rank(spec)));
    out.embedding = embed(spec, d, false);
    if (!config.output_dir.empty())
        write_embedding_tsv(artifact_path(config, "pca_embedding.tsv").string(), g.subjects,
                            out.embedding);

    AssocScanContext ctx;
    ctx.embedding = &out.embedding;
    out.results = assoc_scan(g, AssocMethod::pca_r, ctx, config.threads);
    if (!config.output_dir.empty())
        write_assoc_tsv(artifact_path(config, "assoc_pcaR.tsv").string(), out.results);
    return out;
}

}  // namespace sga
