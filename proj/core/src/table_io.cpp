#include "sga/table_io.hpp"

#include "sga/common.hpp"

#include <fstream>
#include <sstream>

namespace sga
{

namespace
{

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw ValidationError("cannot open '" + path + "' for writing");
    return out;
}

void finish(std::ofstream& out, const std::string& path)
{
    out.flush();
    if (!out)
        throw ValidationError("failed while writing '" + path + "'");
}

}  // namespace

void write_embedding_tsv(const std::string& path, const std::vector<std::string>& subjects,
                         const Embedding& e)
{
    if (static_cast<Eigen::Index>(subjects.size()) != e.coords.rows())
        throw ValidationError("subject list does not match the embedding rows");
    auto out = open_out(path);
    out << "subject";
    for (Eigen::Index j = 0; j < e.coords.cols(); ++j)
        out << "\tphi" << (j + 1);
    out << "\n";
    for (Eigen::Index i = 0; i < e.coords.rows(); ++i)
    {
        out << subjects[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < e.coords.cols(); ++j)
            out << "\t" << format_value(e.coords(i, j));
        out << "\n";
    }
    finish(out, path);
}

void write_eigenvalues_tsv(const std::string& path, const Spectrum& spectrum)
{
    auto out = open_out(path);
    out << "index\teigenvalue\n";
    for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i)
        out << (i + 1) << "\t" << format_value(spectrum.eigenvalues(i)) << "\n";
    finish(out, path);
}

void write_eigengap_tsv(const std::string& path, const EigengapReport& report)
{
    auto out = open_out(path);
    out << "index\tgap\tthreshold\texceeds\td_selected\tdegenerate\n";
    for (Eigen::Index i = 0; i < report.gaps.size(); ++i)
    {
        out << (i + 1) << "\t" << format_value(report.gaps(i)) << "\t"
            << format_value(report.threshold) << "\t"
            << (report.gaps(i) > report.threshold ? 1 : 0) << "\t" << report.d_selected << "\t"
            << (report.degenerate ? 1 : 0) << "\n";
    }
    finish(out, path);
}

void write_clusters_tsv(const std::string& path, const std::vector<std::string>& subjects,
                        const ClusterModel& c)
{
    if (static_cast<int>(subjects.size()) != c.n_subjects())
        throw ValidationError("subject list does not match the cluster assignment");
    auto out = open_out(path);
    out << "subject\tcluster\n";
    for (int i = 0; i < c.n_subjects(); ++i)
        out << subjects[static_cast<std::size_t>(i)] << "\t" << c.assignment(i) << "\n";
    finish(out, path);
}

void write_strata_tsv(const std::string& path, const std::vector<std::string>& subjects,
                      const MatchedStrata& strata, const Eigen::VectorXi& phenotype)
{
    auto out = open_out(path);
    out << "subject\tstratum\tphenotype\n";
    for (std::size_t s = 0; s < strata.strata.size(); ++s)
    {
        for (int i : strata.strata[s])
        {
            if (i < 0 || i >= static_cast<int>(subjects.size()) || i >= phenotype.size())
                throw ValidationError("stratum refers to a subject outside the data");
            out << subjects[static_cast<std::size_t>(i)] << "\t" << s << "\t" << phenotype(i)
                << "\n";
        }
    }
    finish(out, path);
}

void write_assoc_tsv(const std::string& path, const std::vector<AssocResult>& results)
{
    auto out = open_out(path);
    out << "snp\tmethod\tbeta\tse\twald\tp\tconverged\n";
    for (const auto& r : results)
    {
        out << r.snp << "\t" << assoc_method_name(r.method) << "\t" << format_value(r.beta)
            << "\t" << format_value(r.se) << "\t" << format_value(r.wald) << "\t"
            << format_value(r.p_value) << "\t" << (r.converged ? 1 : 0) << "\n";
    }
    finish(out, path);
}

void write_experiment_tsv(const std::string& path, const ExperimentResult& result)
{
    auto out = open_out(path);
    out << "method\talpha\ttype1_rate\tpower\tnull_tests\tnull_rejections\tcausal_tests\t"
           "causal_rejections\tflagged\n";
    for (const auto& cell : result.cells)
    {
        out << assoc_method_name(cell.method) << "\t" << format_value(cell.alpha) << "\t"
            << format_value(cell.type1_rate) << "\t" << format_value(cell.power) << "\t"
            << cell.null_tests << "\t" << cell.null_rejections << "\t" << cell.causal_tests
            << "\t" << cell.causal_rejections << "\t" << cell.flagged << "\n";
    }
    finish(out, path);
}

void write_text_file(const std::string& path, const std::string& content)
{
    auto out = open_out(path);
    out << content;
    finish(out, path);
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace sga
