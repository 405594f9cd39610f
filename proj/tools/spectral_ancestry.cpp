#include "sga/assoc.hpp"
#include "sga/cluster.hpp"
#include "sga/common.hpp"
#include "sga/dimsel.hpp"
#include "sga/genotype.hpp"
#include "sga/parallel.hpp"
#include "sga/pipeline.hpp"
#include "sga/simulate.hpp"
#include "sga/table_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace
{

nlohmann::json load_json_file(const std::string& path)
{
    try
    {
        return nlohmann::json::parse(sga::read_text_file(path));
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw sga::ParseError("config '" + path + "': " + e.what());
    }
}

/// Fills fields that were not passed on the command line from the JSON
/// config, implementing "flags override config".
template <typename T>
void merge(const CLI::App& sub, const std::string& flag, const nlohmann::json& cfg,
           const std::string& key, T& value)
{
    if (sub.count(flag) > 0)
        return;
    if (cfg.contains(key))
    {
        try
        {
            value = cfg.at(key).get<T>();
        }
        catch (const nlohmann::json::exception& e)
        {
            throw sga::ParseError("config key '" + key + "': " + e.what());
        }
    }
}

/// Required settings may come from the flag or the config file, so they are
/// checked after merging rather than by the parser.
void require_setting(const std::string& value, const std::string& flag)
{
    if (value.empty())
        throw sga::ValidationError(flag + " is required (flag or config key)");
}

struct CommonOpts
{
    std::string config_path;
    int threads = 0;  // 0: resolve from env, then 1
    std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, CommonOpts& o)
{
    sub->add_option("--config", o.config_path, "JSON config file; flags override its keys");
    sub->add_option("--threads", o.threads,
                    "worker threads (default: SPECTRAL_ANCESTRY_THREADS, then 1)");
    sub->add_option("--seed", o.seed, "random seed recorded in the manifest");
}

struct PanelOpts
{
    std::string in;
    bool qc = false;
    double maf_min = 0.05;
    double miss_max = 0.01;
};

void add_panel(CLI::App* sub, PanelOpts& o)
{
    sub->add_option("--in", o.in, "genotype TSV (subjects x SNPs, cells 0/1/2/NA)");
    sub->add_flag("--qc", o.qc, "apply MAF/missingness SNP filters before analysis");
    sub->add_option("--maf-min", o.maf_min, "QC minimum minor allele frequency");
    sub->add_option("--miss-max", o.miss_max, "QC maximum per-SNP missing rate");
}

struct KernelOpts
{
    std::string kernel = "spectral";
    double sigma2 = 0.0;
    bool no_scale = false;
    std::string threshold_model_path;
    int pca_dims = 10;
};

void add_kernel(CLI::App* sub, KernelOpts& o)
{
    sub->add_option("--kernel", o.kernel, "kernel: spectral, pca, or ibs")
        ->check(CLI::IsMember({"spectral", "pca", "ibs"}));
    sub->add_option("--sigma2", o.sigma2, "ibs kernel bandwidth (required for --kernel ibs)");
    sub->add_flag("--no-scale", o.no_scale, "center but do not scale allele counts");
    sub->add_option("--threshold-model", o.threshold_model_path,
                    "eigengap ThresholdModel JSON from `calibrate`");
    sub->add_option("--pca-dims", o.pca_dims, "fixed dimension of the PCA baseline");
}

sga::GenotypeMatrix load_panel(const PanelOpts& o)
{
    sga::GenotypeMatrix g = sga::read_genotypes(o.in);
    if (o.qc)
        g = sga::qc_filter(g, o.maf_min, o.miss_max);
    return g;
}

sga::AnalysisConfig make_analysis_config(const CommonOpts& common, const KernelOpts& kernel,
                                         const std::string& out_dir)
{
    sga::AnalysisConfig cfg;
    cfg.kernel = sga::kernel_choice_from_name(kernel.kernel);
    cfg.scale = !kernel.no_scale;
    if (cfg.kernel == sga::KernelChoice::ibs)
        cfg.ibs_sigma2 = kernel.sigma2;
    if (!kernel.threshold_model_path.empty())
        cfg.threshold = sga::threshold_model_from_json(
            sga::read_text_file(kernel.threshold_model_path));
    cfg.pca_dims = kernel.pca_dims;
    cfg.output_dir = out_dir;
    cfg.seed = common.seed;
    cfg.threads = sga::resolve_threads(common.threads);
    return cfg;
}

void echo_resolved(const std::string& subcommand, const nlohmann::json& extra,
                   const sga::AnalysisConfig& cfg)
{
    nlohmann::json j = nlohmann::json::parse(sga::analysis_config_to_json(cfg));
    j["subcommand"] = subcommand;
    j["threads"] = cfg.threads;
    j["output_dir"] = cfg.output_dir;
    for (const auto& [key, value] : extra.items())
        j[key] = value;
    std::cout << j.dump(2) << "\n";
}

struct EmbedOpts
{
    CommonOpts common;
    PanelOpts panel;
    KernelOpts kernel;
    std::string out;
};

int run_embed(const CLI::App& sub, EmbedOpts& o)
{
    if (!o.common.config_path.empty())
    {
        const nlohmann::json cfg = load_json_file(o.common.config_path);
        merge(sub, "--in", cfg, "in", o.panel.in);
        merge(sub, "--qc", cfg, "qc", o.panel.qc);
        merge(sub, "--maf-min", cfg, "maf_min", o.panel.maf_min);
        merge(sub, "--miss-max", cfg, "miss_max", o.panel.miss_max);
        merge(sub, "--kernel", cfg, "kernel", o.kernel.kernel);
        merge(sub, "--sigma2", cfg, "sigma2", o.kernel.sigma2);
        merge(sub, "--no-scale", cfg, "no_scale", o.kernel.no_scale);
        merge(sub, "--threshold-model", cfg, "threshold_model", o.kernel.threshold_model_path);
        merge(sub, "--pca-dims", cfg, "pca_dims", o.kernel.pca_dims);
        merge(sub, "--out", cfg, "out", o.out);
        merge(sub, "--threads", cfg, "threads", o.common.threads);
        merge(sub, "--seed", cfg, "seed", o.common.seed);
    }
    require_setting(o.panel.in, "--in");
    require_setting(o.out, "--out");
    const sga::GenotypeMatrix g = load_panel(o.panel);
    const sga::AnalysisConfig cfg = make_analysis_config(o.common, o.kernel, o.out);
    echo_resolved("embed", {{"in", o.panel.in}}, cfg);
    sga::write_manifest(cfg);
    if (cfg.kernel == sga::KernelChoice::pca)
    {
        const sga::Embedding e = sga::pca_embedding(g, cfg);
        sga::write_embedding_tsv((std::filesystem::path(cfg.output_dir) / "pca_embedding.tsv").string(),
                                 g.subjects, e);
    }
    else
    {
        sga::spectral_front_end(g, cfg);
    }
    return 0;
}

struct ClusterOpts
{
    CommonOpts common;
    PanelOpts panel;
    KernelOpts kernel;
    std::string out;
    int k = 0;  // 0: auto
    int min_cluster_size = 5;
};

int run_cluster(const CLI::App& sub, ClusterOpts& o)
{
    if (!o.common.config_path.empty())
    {
        const nlohmann::json cfg = load_json_file(o.common.config_path);
        merge(sub, "--in", cfg, "in", o.panel.in);
        merge(sub, "--qc", cfg, "qc", o.panel.qc);
        merge(sub, "--maf-min", cfg, "maf_min", o.panel.maf_min);
        merge(sub, "--miss-max", cfg, "miss_max", o.panel.miss_max);
        merge(sub, "--kernel", cfg, "kernel", o.kernel.kernel);
        merge(sub, "--sigma2", cfg, "sigma2", o.kernel.sigma2);
        merge(sub, "--no-scale", cfg, "no_scale", o.kernel.no_scale);
        merge(sub, "--threshold-model", cfg, "threshold_model", o.kernel.threshold_model_path);
        merge(sub, "--out", cfg, "out", o.out);
        merge(sub, "--k", cfg, "k", o.k);
        merge(sub, "--min-cluster-size", cfg, "min_cluster_size", o.min_cluster_size);
        merge(sub, "--threads", cfg, "threads", o.common.threads);
        merge(sub, "--seed", cfg, "seed", o.common.seed);
    }
    require_setting(o.panel.in, "--in");
    require_setting(o.out, "--out");
    const sga::GenotypeMatrix g = load_panel(o.panel);
    sga::AnalysisConfig cfg = make_analysis_config(o.common, o.kernel, o.out);
    cfg.min_cluster_size = o.min_cluster_size;
    if (o.k > 0)
        cfg.n_clusters = o.k;
    echo_resolved("cluster", {{"in", o.panel.in}, {"k", o.k}}, cfg);
    sga::write_manifest(cfg);
    const sga::SpectralFrontEnd fe = sga::spectral_front_end(g, cfg);
    const sga::ClusterModel model =
        sga::ward_cluster(fe.embedding, cfg.n_clusters, cfg.min_cluster_size,
                          static_cast<int>(g.n_snps()), cfg.threshold);
    if (!cfg.output_dir.empty())
    {
        sga::write_clusters_tsv((std::filesystem::path(cfg.output_dir) / "clusters.tsv").string(),
                                g.subjects, model);
        sga::write_text_file((std::filesystem::path(cfg.output_dir) / "dendrogram.txt").string(),
                             sga::dendrogram_export(model));
    }
    return 0;
}

struct AssocOpts
{
    CommonOpts common;
    PanelOpts panel;
    KernelOpts kernel;
    std::string out;
    std::string method;
    int k = 0;
    int min_cluster_size = 5;
    int max_stratum_size = 20;
};

int run_assoc(const CLI::App& sub, AssocOpts& o)
{
    if (!o.common.config_path.empty())
    {
        const nlohmann::json cfg = load_json_file(o.common.config_path);
        merge(sub, "--in", cfg, "in", o.panel.in);
        merge(sub, "--qc", cfg, "qc", o.panel.qc);
        merge(sub, "--maf-min", cfg, "maf_min", o.panel.maf_min);
        merge(sub, "--miss-max", cfg, "miss_max", o.panel.miss_max);
        merge(sub, "--kernel", cfg, "kernel", o.kernel.kernel);
        merge(sub, "--sigma2", cfg, "sigma2", o.kernel.sigma2);
        merge(sub, "--no-scale", cfg, "no_scale", o.kernel.no_scale);
        merge(sub, "--threshold-model", cfg, "threshold_model", o.kernel.threshold_model_path);
        merge(sub, "--pca-dims", cfg, "pca_dims", o.kernel.pca_dims);
        merge(sub, "--out", cfg, "out", o.out);
        merge(sub, "--method", cfg, "method", o.method);
        merge(sub, "--k", cfg, "k", o.k);
        merge(sub, "--min-cluster-size", cfg, "min_cluster_size", o.min_cluster_size);
        merge(sub, "--max-stratum-size", cfg, "max_stratum_size", o.max_stratum_size);
        merge(sub, "--threads", cfg, "threads", o.common.threads);
        merge(sub, "--seed", cfg, "seed", o.common.seed);
    }
    require_setting(o.panel.in, "--in");
    require_setting(o.out, "--out");
    require_setting(o.method, "--method");
    const sga::AssocMethod method = sga::assoc_method_from_name(o.method);
    const sga::GenotypeMatrix g = load_panel(o.panel);
    if (!g.has_complete_phenotype())
        throw sga::ValidationError("association testing needs a phenotype column");

    sga::AnalysisConfig cfg = make_analysis_config(o.common, o.kernel, o.out);
    cfg.min_cluster_size = o.min_cluster_size;
    cfg.max_stratum_size = o.max_stratum_size;
    if (o.k > 0)
        cfg.n_clusters = o.k;
    echo_resolved("assoc", {{"in", o.panel.in}, {"method", o.method}}, cfg);

    const auto out_path = [&](const std::string& name) {
        return (std::filesystem::path(cfg.output_dir) / name).string();
    };
    switch (method)
    {
        case sga::AssocMethod::uncorrected:
        {
            sga::write_manifest(cfg);
            const auto results =
                sga::assoc_scan(g, method, sga::AssocScanContext{}, cfg.threads);
            if (!cfg.output_dir.empty())
                sga::write_assoc_tsv(out_path("assoc_uncorrected.tsv"), results);
            break;
        }
        case sga::AssocMethod::spectral_r:
            sga::run_spectral_r(g, cfg);
            break;
        case sga::AssocMethod::spectral_gem:
            sga::run_spectral_gem(g, cfg);
            break;
        case sga::AssocMethod::pca_r:
            sga::run_pca_baseline(g, cfg);
            break;
        case sga::AssocMethod::cmh:
        {
            sga::write_manifest(cfg);
            const sga::SpectralFrontEnd fe = sga::spectral_front_end(g, cfg);
            const sga::ClusterModel model =
                sga::ward_cluster(fe.embedding, cfg.n_clusters, cfg.min_cluster_size,
                                  static_cast<int>(g.n_snps()), cfg.threshold);
            if (!cfg.output_dir.empty())
                sga::write_clusters_tsv(out_path("clusters.tsv"), g.subjects, model);
            const Eigen::VectorXi labels = model.assignment;
            sga::AssocScanContext ctx;
            ctx.cluster_labels = &labels;
            const auto results = sga::assoc_scan(g, method, ctx, cfg.threads);
            if (!cfg.output_dir.empty())
                sga::write_assoc_tsv(out_path("assoc_cmh.tsv"), results);
            break;
        }
    }
    return 0;
}

struct SimulateOpts
{
    CommonOpts common;
    std::string out;
    int reps = 0;  // 0: keep config value
};

int run_simulate(const CLI::App& sub, SimulateOpts& o)
{
    if (o.common.config_path.empty())
        throw sga::ValidationError("simulate needs --config with an experiment JSON");
    sga::ExperimentConfig config =
        sga::experiment_config_from_json(sga::read_text_file(o.common.config_path));
    if (sub.count("--seed") > 0)
        config.seed = o.common.seed;
    if (sub.count("--threads") > 0)
        config.threads = o.common.threads;
    config.threads = sga::resolve_threads(config.threads);
    if (o.reps > 0)
        config.reps = o.reps;
    config.validate();

    std::cout << sga::experiment_config_to_json(config);
    const sga::ExperimentResult result = sga::run_experiment(config);
    if (!o.out.empty())
    {
        std::error_code ec;
        std::filesystem::create_directories(o.out, ec);
        if (ec)
            throw sga::ValidationError("cannot create output directory '" + o.out +
                                       "': " + ec.message());
        sga::write_text_file((std::filesystem::path(o.out) / "experiment_config.json").string(),
                             sga::experiment_config_to_json(config));
        sga::write_experiment_tsv((std::filesystem::path(o.out) / "experiment.tsv").string(),
                                  result);
    }
    return 0;
}

struct CalibrateOpts
{
    CommonOpts common;
    std::string grid = "100x1000,200x2000,400x4000";
    int reps = 500;
    double quantile = 0.99;
    std::string out;
};

std::vector<std::pair<int, int>> parse_grid(const std::string& text)
{
    std::vector<std::pair<int, int>> grid;
    std::size_t pos = 0;
    while (pos < text.size())
    {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos)
            comma = text.size();
        const std::string cell = text.substr(pos, comma - pos);
        const std::size_t x = cell.find('x');
        if (x == std::string::npos)
            throw sga::ParseError("grid cell '" + cell + "' is not of the form NxP");
        try
        {
            grid.emplace_back(std::stoi(cell.substr(0, x)), std::stoi(cell.substr(x + 1)));
        }
        catch (const std::exception&)
        {
            throw sga::ParseError("grid cell '" + cell + "' is not of the form NxP");
        }
        pos = comma + 1;
    }
    return grid;
}

int run_calibrate(const CLI::App& sub, CalibrateOpts& o)
{
    if (!o.common.config_path.empty())
    {
        const nlohmann::json cfg = load_json_file(o.common.config_path);
        merge(sub, "--grid", cfg, "grid", o.grid);
        merge(sub, "--reps", cfg, "reps", o.reps);
        merge(sub, "--quantile", cfg, "quantile", o.quantile);
        merge(sub, "--out", cfg, "out", o.out);
        merge(sub, "--threads", cfg, "threads", o.common.threads);
        merge(sub, "--seed", cfg, "seed", o.common.seed);
    }
    if (o.out.empty())
        throw sga::ValidationError("calibrate needs --out for the ThresholdModel JSON");
    const int threads = sga::resolve_threads(o.common.threads);

    nlohmann::json echo;
    echo["subcommand"] = "calibrate";
    echo["grid"] = o.grid;
    echo["reps"] = o.reps;
    echo["quantile"] = o.quantile;
    echo["seed"] = o.common.seed;
    echo["threads"] = threads;
    echo["out"] = o.out;
    std::cout << echo.dump(2) << "\n";

    const sga::ThresholdModel model =
        sga::calibrate_threshold(parse_grid(o.grid), o.reps, o.quantile, o.common.seed, threads);
    sga::write_text_file(o.out, sga::threshold_model_to_json(model));
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"spectral ancestry estimation and stratification-corrected association"};
    app.require_subcommand(1);

    EmbedOpts embed_opts;
    auto* embed_cmd = app.add_subcommand("embed", "eigenmap embedding of a genotype panel");
    add_common(embed_cmd, embed_opts.common);
    add_panel(embed_cmd, embed_opts.panel);
    add_kernel(embed_cmd, embed_opts.kernel);
    embed_cmd->add_option("--out", embed_opts.out, "output directory");

    ClusterOpts cluster_opts;
    auto* cluster_cmd = app.add_subcommand("cluster", "Ward ancestry clustering");
    add_common(cluster_cmd, cluster_opts.common);
    add_panel(cluster_cmd, cluster_opts.panel);
    add_kernel(cluster_cmd, cluster_opts.kernel);
    cluster_cmd->add_option("--out", cluster_opts.out, "output directory");
    cluster_cmd->add_option("--k", cluster_opts.k, "cluster count (0 = automatic)");
    cluster_cmd->add_option("--min-cluster-size", cluster_opts.min_cluster_size,
                            "clusters smaller than this become outliers");

    AssocOpts assoc_opts;
    auto* assoc_cmd = app.add_subcommand("assoc", "per-SNP association scan");
    add_common(assoc_cmd, assoc_opts.common);
    add_panel(assoc_cmd, assoc_opts.panel);
    add_kernel(assoc_cmd, assoc_opts.kernel);
    assoc_cmd->add_option("--out", assoc_opts.out, "output directory");
    assoc_cmd->add_option("--method", assoc_opts.method,
                          "uncorrected, spectralR, spectralGEM, cmh, or pcaR");
    assoc_cmd->add_option("--k", assoc_opts.k, "cluster count for cmh (0 = automatic)");
    assoc_cmd->add_option("--min-cluster-size", assoc_opts.min_cluster_size,
                          "clusters smaller than this become outliers");
    assoc_cmd->add_option("--max-stratum-size", assoc_opts.max_stratum_size,
                          "matching stratum size cap");

    SimulateOpts simulate_opts;
    auto* simulate_cmd = app.add_subcommand("simulate", "Type-I-error and power experiment");
    add_common(simulate_cmd, simulate_opts.common);
    simulate_cmd->add_option("--out", simulate_opts.out, "output directory");
    simulate_cmd->add_option("--reps", simulate_opts.reps, "override replicate count");

    CalibrateOpts calibrate_opts;
    auto* calibrate_cmd =
        app.add_subcommand("calibrate", "Monte-Carlo refit of the eigengap threshold");
    add_common(calibrate_cmd, calibrate_opts.common);
    calibrate_cmd->add_option("--grid", calibrate_opts.grid,
                              "comma-separated NxP cells, e.g. 200x2000,500x5000");
    calibrate_cmd->add_option("--reps", calibrate_opts.reps, "replicates per cell");
    calibrate_cmd->add_option("--quantile", calibrate_opts.quantile, "null quantile to fit");
    calibrate_cmd->add_option("--out", calibrate_opts.out, "ThresholdModel JSON path");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e, std::cout, std::cerr);
        return 1;
    }

    try
    {
        if (embed_cmd->parsed())
            return run_embed(*embed_cmd, embed_opts);
        if (cluster_cmd->parsed())
            return run_cluster(*cluster_cmd, cluster_opts);
        if (assoc_cmd->parsed())
            return run_assoc(*assoc_cmd, assoc_opts);
        if (simulate_cmd->parsed())
            return run_simulate(*simulate_cmd, simulate_opts);
        if (calibrate_cmd->parsed())
            return run_calibrate(*calibrate_cmd, calibrate_opts);
        std::cerr << "no subcommand given\n";
        return 1;
    }
    catch (const sga::NumericError& e)
    {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    }
    catch (const sga::ValidationError& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    catch (const std::exception& e)
    {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 2;
    }
}
