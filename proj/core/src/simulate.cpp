#include "sga/simulate.hpp"

#include "sga/cluster.hpp"
#include "sga/common.hpp"
#include "sga/parallel.hpp"
#include "sga/pipeline.hpp"
#include "sga/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace sga
{

void ScenarioSpec::validate() const
{
    if (cluster_prob.empty())
        throw ValidationError("scenario needs at least one cluster");
    if (case_prob.size() != cluster_prob.size())
        throw ValidationError("scenario cluster_prob and case_prob lengths differ");
    if (!cluster_names.empty() && cluster_names.size() != cluster_prob.size())
        throw ValidationError("scenario cluster_names length does not match cluster_prob");
    double sum = 0.0;
    for (double w : cluster_prob)
    {
        if (w < 0.0)
            throw ValidationError("scenario cluster probabilities must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("scenario cluster probabilities must sum to 1");
    for (double q : case_prob)
        if (q < 0.0 || q > 1.0)
            throw ValidationError("scenario case probabilities must lie in [0, 1]");
}

namespace
{

std::vector<std::string> default_ids(const std::string& prefix, int count)
{
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(count));
    for (int i = 1; i <= count; ++i)
        ids.push_back(prefix + std::to_string(i));
    return ids;
}

/// Largest-remainder apportionment of n into weighted shares.
std::vector<int> apportion(int n, const std::vector<double>& weights)
{
    const int k = static_cast<int>(weights.size());
    std::vector<int> counts(static_cast<std::size_t>(k));
    std::vector<std::pair<double, int>> remainders;
    int assigned = 0;
    for (int i = 0; i < k; ++i)
    {
        const double target = static_cast<double>(n) * weights[static_cast<std::size_t>(i)];
        counts[static_cast<std::size_t>(i)] = static_cast<int>(std::floor(target));
        assigned += counts[static_cast<std::size_t>(i)];
        remainders.emplace_back(-(target - std::floor(target)), i);
    }
    std::sort(remainders.begin(), remainders.end());
    for (int r = 0; r < n - assigned; ++r)
        counts[static_cast<std::size_t>(remainders[static_cast<std::size_t>(r)].second)]++;
    return counts;
}

}  // namespace

GenotypeMatrix gen_homogeneous(int n, int p, std::uint64_t seed)
{
    if (n < 2)
        throw ValidationError("gen_homogeneous needs n >= 2");
    if (p < 1)
        throw ValidationError("gen_homogeneous needs p >= 1");
    Rng rng(seed);
    Eigen::VectorXd freq(p);
    for (int j = 0; j < p; ++j)
        freq(j) = rng.uniform(0.05, 0.5);

    GenotypeMatrix g;
    g.subjects = default_ids("S", n);
    g.snps = default_ids("rs", p);
    g.counts.resize(n, p);
    g.missing = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, p, false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j)
            g.counts(i, j) = static_cast<double>(rng.binom2(freq(j)));
    return g;
}

StructuredPanel gen_structured(int k, double fst, int n, int p, std::uint64_t seed,
                               const std::vector<double>& proportions)
{
    if (k < 2)
        throw ValidationError("gen_structured needs k >= 2");
    if (fst <= 0.0 || fst >= 1.0)
        throw ValidationError("gen_structured needs fst in (0, 1)");
    if (n < 2)
        throw ValidationError("gen_structured needs n >= 2");
    if (p < 1)
        throw ValidationError("gen_structured needs p >= 1");

    std::vector<double> weights = proportions;
    if (weights.empty())
        weights.assign(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k));
    if (static_cast<int>(weights.size()) != k)
        throw ValidationError("gen_structured proportions length must equal k");
    double sum = 0.0;
    for (double w : weights)
    {
        if (w < 0.0)
            throw ValidationError("gen_structured proportions must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("gen_structured proportions must sum to 1");

    const std::vector<int> counts = apportion(n, weights);

    StructuredPanel panel;
    panel.labels.resize(n);
    int pos = 0;
    for (int c = 0; c < k; ++c)
        for (int r = 0; r < counts[static_cast<std::size_t>(c)]; ++r)
            panel.labels(pos++) = c;

    Rng rng(seed);
    panel.cluster_freqs.resize(k, p);
    const double scale = (1.0 - fst) / fst;
    for (int j = 0; j < p; ++j)
    {
        const double f = rng.uniform(0.05, 0.5);
        for (int c = 0; c < k; ++c)
            panel.cluster_freqs(c, j) = rng.beta(f * scale, (1.0 - f) * scale);
    }

    panel.genotypes.subjects = default_ids("S", n);
    panel.genotypes.snps = default_ids("rs", p);
    panel.genotypes.counts.resize(n, p);
    panel.genotypes.missing =
        Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, p, false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j)
            panel.genotypes.counts(i, j) =
                static_cast<double>(rng.binom2(panel.cluster_freqs(panel.labels(i), j)));
    return panel;
}

Eigen::VectorXi assign_phenotypes(const Eigen::VectorXi& labels, const ScenarioSpec& spec)
{
    spec.validate();
    const int k = spec.n_clusters();
    Rng rng(spec.seed);
    Eigen::VectorXi y(labels.size());
    for (Eigen::Index i = 0; i < labels.size(); ++i)
    {
        if (labels(i) < 0 || labels(i) >= k)
            throw ValidationError("subject " + std::to_string(i + 1) +
                                  " has a cluster label not named in the scenario");
        y(i) = rng.bernoulli(spec.case_prob[static_cast<std::size_t>(labels(i))]) ? 1 : 0;
    }
    return y;
}

Eigen::MatrixXd cluster_allele_freqs(const GenotypeMatrix& g, const Eigen::VectorXi& labels,
                                     int k)
{
    if (labels.size() != g.n_subjects())
        throw ValidationError("labels length must match the panel");
    if (k < 1)
        throw ValidationError("cluster count must be positive");
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, g.n_snps());
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, g.n_snps());
    for (Eigen::Index i = 0; i < g.n_subjects(); ++i)
    {
        const int c = labels(i);
        if (c < 0 || c >= k)
            throw ValidationError("cluster label out of range");
        for (Eigen::Index j = 0; j < g.n_snps(); ++j)
        {
            if (g.missing(i, j))
                continue;
            sums(c, j) += g.counts(i, j);
            counts(c, j) += 2.0;
        }
    }
    return (sums.array() / counts.array()).matrix();
}

Eigen::Vector3d case_genotype_probs(double relative_risk, double p)
{
    if (relative_risk < 1.0)
        throw ValidationError("relative risk must be >= 1");
    if (p < 0.0 || p > 1.0)
        throw ValidationError("baseline allele frequency must lie in [0, 1]");
    const double q = 1.0 - p;
    Eigen::Vector3d probs(q * q, 2.0 * relative_risk * p * q,
                          relative_risk * relative_risk * p * p);
    return probs / probs.sum();
}

Eigen::MatrixXd gen_causal_snps(const Eigen::VectorXi& y, const Eigen::VectorXi& labels,
                                double relative_risk, int m,
                                const Eigen::MatrixXd& panel_cluster_freqs, std::uint64_t seed)
{
    const Eigen::Index n = y.size();
    if (labels.size() != n)
        throw ValidationError("phenotype and labels lengths differ");
    if (m < 1)
        throw ValidationError("gen_causal_snps needs m >= 1");
    if (relative_risk < 1.0)
        throw ValidationError("relative risk must be >= 1");
    if (panel_cluster_freqs.cols() < 1)
        throw ValidationError("frequency source panel is empty");

    const int k = static_cast<int>(panel_cluster_freqs.rows());
    Rng rng(seed);
    Eigen::MatrixXd block(n, m);
    for (int s = 0; s < m; ++s)
    {
        const auto source = static_cast<Eigen::Index>(
            rng.uniform_int(static_cast<std::uint64_t>(panel_cluster_freqs.cols())));
        for (Eigen::Index i = 0; i < n; ++i)
        {
            if (labels(i) < 0 || labels(i) >= k)
                throw ValidationError("cluster label out of range");
            double pk = panel_cluster_freqs(labels(i), source);
            if (!std::isfinite(pk))
                throw NumericError("frequency source has no data for a cluster");
            pk = std::min(1.0, std::max(0.0, pk));
            double p0;
            double p1;
            if (y(i) == 1)
            {
                const Eigen::Vector3d probs = case_genotype_probs(relative_risk, pk);
                p0 = probs(0);
                p1 = probs(1);
            }
            else
            {
                const double q = 1.0 - pk;
                p0 = q * q;
                p1 = 2.0 * pk * q;
            }
            const double u = rng.uniform();
            block(i, s) = u < p0 ? 0.0 : (u < p0 + p1 ? 1.0 : 2.0);
        }
    }
    return block;
}

void ExperimentConfig::validate() const
{
    scenario.validate();
    if (fst <= 0.0 || fst >= 1.0)
        throw ValidationError("experiment fst must lie in (0, 1)");
    if (n < 2 || p < 1)
        throw ValidationError("experiment panel needs n >= 2 and p >= 1");
    if (n_causal < 0)
        throw ValidationError("experiment n_causal must be >= 0");
    if (relative_risk < 1.0)
        throw ValidationError("experiment relative risk must be >= 1");
    if (methods.empty())
        throw ValidationError("experiment needs at least one method");
    if (alphas.empty())
        throw ValidationError("experiment needs at least one alpha level");
    for (double a : alphas)
        if (a <= 0.0 || a >= 1.0)
            throw ValidationError("experiment alpha levels must lie in (0, 1)");
    if (reps < 1)
        throw ValidationError("experiment needs reps >= 1");
    if (pca_dims < 1)
        throw ValidationError("experiment pca_dims must be >= 1");
}

namespace
{

struct MethodTally
{
    long null_tests = 0;
    std::vector<long> null_rejections;    // per alpha
    long causal_tests = 0;
    std::vector<long> causal_rejections;  // per alpha
    long flagged = 0;
};

void tally_results(const std::vector<AssocResult>& results, const std::vector<double>& alphas,
                   bool causal, MethodTally& tally)
{
    for (const auto& r : results)
    {
        if (!r.converged || !std::isfinite(r.p_value))
        {
            tally.flagged++;
            continue;
        }
        (causal ? tally.causal_tests : tally.null_tests)++;
        for (std::size_t a = 0; a < alphas.size(); ++a)
        {
            if (r.p_value < alphas[a])
                (causal ? tally.causal_rejections : tally.null_rejections)[a]++;
        }
    }
}

std::vector<MethodTally> run_replicate(const ExperimentConfig& config, int rep, int threads)
{
    const int k = config.scenario.n_clusters();
    StructuredPanel panel =
        gen_structured(k, config.fst, config.n, config.p,
                       derive_seed(config.seed, static_cast<std::uint64_t>(rep), 0),
                       config.scenario.cluster_prob);
    ScenarioSpec spec = config.scenario;
    spec.seed = derive_seed(config.seed, static_cast<std::uint64_t>(rep), 1);
    const Eigen::VectorXi y = assign_phenotypes(panel.labels, spec);
    panel.genotypes.phenotype = y;

    bool need_spectral = false;
    bool need_clusters = false;
    bool need_strata = false;
    bool need_pca = false;
    for (AssocMethod m : config.methods)
    {
        need_spectral |= m == AssocMethod::spectral_r || m == AssocMethod::spectral_gem ||
                         m == AssocMethod::cmh;
        need_clusters |= m == AssocMethod::cmh;
        need_strata |= m == AssocMethod::spectral_gem;
        need_pca |= m == AssocMethod::pca_r;
    }

    AnalysisConfig acfg;
    acfg.threads = threads;
    acfg.pca_dims = config.pca_dims;

    SpectralFrontEnd fe;
    Embedding pca_emb;
    ClusterModel clusters;
    Eigen::VectorXi cluster_labels;
    MatchedStrata strata;
    if (need_spectral)
        fe = spectral_front_end(panel.genotypes, acfg);
    if (need_clusters)
    {
        clusters = ward_cluster(fe.embedding, std::nullopt, acfg.min_cluster_size, config.p,
                                acfg.threshold);
        cluster_labels = clusters.assignment;
    }
    // outliers are deliberately not removed before matching here
    if (need_strata)
        strata = match_strata(fe.embedding, y, acfg.max_stratum_size);
    if (need_pca)
        pca_emb = pca_embedding(panel.genotypes, acfg);

    Eigen::MatrixXd causal_block;
    if (config.n_causal > 0)
    {
        const Eigen::MatrixXd freqs = cluster_allele_freqs(panel.genotypes, panel.labels, k);
        causal_block =
            gen_causal_snps(y, panel.labels, config.relative_risk, config.n_causal, freqs,
                            derive_seed(config.seed, static_cast<std::uint64_t>(rep), 2));
    }

    std::vector<MethodTally> tallies(config.methods.size());
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi)
    {
        const AssocMethod method = config.methods[mi];
        MethodTally& tally = tallies[mi];
        tally.null_rejections.assign(config.alphas.size(), 0);
        tally.causal_rejections.assign(config.alphas.size(), 0);

        AssocScanContext ctx;
        if (method == AssocMethod::spectral_r)
            ctx.embedding = &fe.embedding;
        if (method == AssocMethod::pca_r)
            ctx.embedding = &pca_emb;
        if (method == AssocMethod::spectral_gem)
            ctx.strata = &strata;
        if (method == AssocMethod::cmh)
            ctx.cluster_labels = &cluster_labels;

        tally_results(assoc_scan(panel.genotypes, method, ctx, threads), config.alphas, false,
                      tally);
        if (config.n_causal > 0)
            tally_results(assoc_scan_block(causal_block, y, method, ctx, threads),
                          config.alphas, true, tally);
    }
    return tallies;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    config.validate();

    std::vector<std::vector<MethodTally>> per_rep(static_cast<std::size_t>(config.reps));
    const bool across_reps = config.threads > 1 && config.reps > 1;
    if (across_reps)
    {
        parallel_for(config.reps, config.threads,
                     [&](int rep) { per_rep[static_cast<std::size_t>(rep)] =
                                        run_replicate(config, rep, 1); });
    }
    else
    {
        for (int rep = 0; rep < config.reps; ++rep)
            per_rep[static_cast<std::size_t>(rep)] = run_replicate(config, rep, config.threads);
    }

    ExperimentResult out;
    out.reps = config.reps;
    for (std::size_t mi = 0; mi < config.methods.size(); ++mi)
    {
        MethodTally total;
        total.null_rejections.assign(config.alphas.size(), 0);
        total.causal_rejections.assign(config.alphas.size(), 0);
        for (const auto& rep : per_rep)
        {
            const MethodTally& t = rep[mi];
            total.null_tests += t.null_tests;
            total.causal_tests += t.causal_tests;
            total.flagged += t.flagged;
            for (std::size_t a = 0; a < config.alphas.size(); ++a)
            {
                total.null_rejections[a] += t.null_rejections[a];
                total.causal_rejections[a] += t.causal_rejections[a];
            }
        }
        for (std::size_t a = 0; a < config.alphas.size(); ++a)
        {
            ExperimentCell cell;
            cell.method = config.methods[mi];
            cell.alpha = config.alphas[a];
            cell.null_tests = total.null_tests;
            cell.null_rejections = total.null_rejections[a];
            cell.causal_tests = total.causal_tests;
            cell.causal_rejections = total.causal_rejections[a];
            cell.flagged = total.flagged;
            cell.type1_rate = total.null_tests > 0
                                  ? static_cast<double>(total.null_rejections[a]) /
                                        static_cast<double>(total.null_tests)
                                  : std::numeric_limits<double>::quiet_NaN();
            cell.power = total.causal_tests > 0
                             ? static_cast<double>(total.causal_rejections[a]) /
                                   static_cast<double>(total.causal_tests)
                             : std::numeric_limits<double>::quiet_NaN();
            out.cells.push_back(cell);
        }
    }
    return out;
}

ExperimentConfig experiment_config_from_json(const std::string& text)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw ParseError(std::string("experiment config JSON: ") + e.what());
    }

    ExperimentConfig config;
    try
    {
        const auto& sc = j.at("scenario");
        if (sc.contains("cluster_names"))
            config.scenario.cluster_names = sc.at("cluster_names").get<std::vector<std::string>>();
        config.scenario.cluster_prob = sc.at("cluster_prob").get<std::vector<double>>();
        config.scenario.case_prob = sc.at("case_prob").get<std::vector<double>>();
        config.fst = j.at("fst").get<double>();
        config.n = j.at("n").get<int>();
        config.p = j.at("p").get<int>();
        config.n_causal = j.value("n_causal", 0);
        config.relative_risk = j.value("relative_risk", 1.0);
        for (const auto& name : j.at("methods"))
            config.methods.push_back(assoc_method_from_name(name.get<std::string>()));
        if (j.contains("alphas"))
            config.alphas = j.at("alphas").get<std::vector<double>>();
        config.reps = j.value("reps", 1);
        config.seed = j.value("seed", std::uint64_t{0});
        config.threads = j.value("threads", 0);
        config.pca_dims = j.value("pca_dims", 10);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ParseError(std::string("experiment config JSON: ") + e.what());
    }
    config.validate();
    return config;
}

std::string experiment_config_to_json(const ExperimentConfig& config)
{
    nlohmann::json j;
    j["scenario"]["cluster_names"] = config.scenario.cluster_names;
    j["scenario"]["cluster_prob"] = config.scenario.cluster_prob;
    j["scenario"]["case_prob"] = config.scenario.case_prob;
    j["fst"] = config.fst;
    j["n"] = config.n;
    j["p"] = config.p;
    j["n_causal"] = config.n_causal;
    j["relative_risk"] = config.relative_risk;
    j["methods"] = nlohmann::json::array();
    for (AssocMethod m : config.methods)
        j["methods"].push_back(assoc_method_name(m));
    j["alphas"] = config.alphas;
    j["reps"] = config.reps;
    j["seed"] = config.seed;
    j["threads"] = config.threads;
    j["pca_dims"] = config.pca_dims;
    return j.dump(2) + "\n";
}

}  // namespace sga
