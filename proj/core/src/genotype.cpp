#include "sga/genotype.hpp"

#include "sga/common.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

namespace sga
{

namespace
{

std::vector<std::string> split_ws(const std::string& line)
{
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok)
    {
        out.push_back(tok);
    }
    return out;
}

void check_unique(const std::vector<std::string>& ids, const char* what)
{
    std::unordered_set<std::string> seen;
    for (const auto& id : ids)
    {
        if (!seen.insert(id).second)
        {
            throw ValidationError(std::string("duplicate ") + what + " ID: " + id);
        }
    }
}

}  // namespace

bool GenotypeMatrix::has_complete_phenotype() const
{
    if (!phenotype)
    {
        return false;
    }
    return (phenotype->array() != kPhenotypeMissing).all();
}

void GenotypeMatrix::validate() const
{
    const Eigen::Index n = counts.rows();
    const Eigen::Index p = counts.cols();
    if (n < 2)
    {
        throw ValidationError("genotype matrix needs at least 2 subjects, got " + std::to_string(n));
    }
    if (p < 1)
    {
        throw ValidationError("genotype matrix needs at least 1 SNP");
    }
    if (static_cast<Eigen::Index>(subjects.size()) != n || static_cast<Eigen::Index>(snps.size()) != p)
    {
        throw ValidationError("ID lists do not match matrix dimensions");
    }
    if (missing.rows() != n || missing.cols() != p)
    {
        throw ValidationError("missingness mask does not match matrix dimensions");
    }
    check_unique(subjects, "subject");
    check_unique(snps, "SNP");
    for (Eigen::Index i = 0; i < n; ++i)
    {
        for (Eigen::Index j = 0; j < p; ++j)
        {
            const double v = counts(i, j);
            if (!missing(i, j) && v != 0.0 && v != 1.0 && v != 2.0)
            {
                throw ValidationError("allele count out of {0,1,2} at subject " + subjects[i] +
                                      ", SNP " + snps[j]);
            }
        }
    }
    if (phenotype)
    {
        if (phenotype->size() != n)
        {
            throw ValidationError("phenotype length does not match subject count");
        }
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const int y = (*phenotype)(i);
            if (y != 0 && y != 1 && y != kPhenotypeMissing)
            {
                throw ValidationError("phenotype must be 0/1/NA at subject " + subjects[i]);
            }
        }
    }
}

GenotypeMatrix GenotypeMatrix::subset_subjects(const std::vector<int>& rows) const
{
    for (int i : rows)
    {
        if (i < 0 || i >= n_subjects())
        {
            throw ValidationError("subset_subjects: row " + std::to_string(i) +
                                  " out of range for " + std::to_string(n_subjects()) +
                                  " subjects");
        }
    }
    GenotypeMatrix out;
    out.snps = snps;
    out.counts.resize(static_cast<Eigen::Index>(rows.size()), counts.cols());
    out.missing.resize(static_cast<Eigen::Index>(rows.size()), counts.cols());
    out.subjects.reserve(rows.size());
    if (phenotype)
    {
        out.phenotype = Eigen::VectorXi(static_cast<Eigen::Index>(rows.size()));
    }
    for (std::size_t k = 0; k < rows.size(); ++k)
    {
        const int i = rows[k];
        out.subjects.push_back(subjects[static_cast<std::size_t>(i)]);
        out.counts.row(static_cast<Eigen::Index>(k)) = counts.row(i);
        out.missing.row(static_cast<Eigen::Index>(k)) = missing.row(i);
        if (phenotype)
        {
            (*out.phenotype)(static_cast<Eigen::Index>(k)) = (*phenotype)(i);
        }
    }
    return out;
}

GenotypeMatrix read_genotypes(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ValidationError("cannot open genotype file: " + path.string());
    }
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line))
    {
        auto toks = split_ws(line);
        if (!toks.empty())
        {
            rows.push_back(std::move(toks));
        }
    }
    if (rows.empty())
    {
        throw ValidationError("empty genotype file: " + path.string());
    }

    const auto& header = rows.front();
    if (header.size() < 2)
    {
        throw ParseError("genotype header needs a subject-ID column and at least one SNP");
    }
    const bool has_pheno = header.size() >= 2 && header[1] == "phenotype";
    const std::size_t first_snp = has_pheno ? 2 : 1;
    if (header.size() <= first_snp)
    {
        throw ParseError("genotype header has no SNP columns");
    }

    GenotypeMatrix g;
    g.snps.assign(header.begin() + static_cast<std::ptrdiff_t>(first_snp), header.end());
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size()) - 1;
    const Eigen::Index p = static_cast<Eigen::Index>(g.snps.size());
    g.counts = Eigen::MatrixXd::Zero(n, p);
    g.missing = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, p, false);
    if (has_pheno)
    {
        g.phenotype = Eigen::VectorXi::Constant(n, kPhenotypeMissing);
    }

    for (Eigen::Index i = 0; i < n; ++i)
    {
        const auto& row = rows[static_cast<std::size_t>(i) + 1];
        if (row.size() != header.size())
        {
            throw ParseError("row " + std::to_string(i + 2) + " has " + std::to_string(row.size()) +
                             " fields, expected " + std::to_string(header.size()));
        }
        g.subjects.push_back(row[0]);
        if (has_pheno)
        {
            const std::string& c = row[1];
            if (c == "NA")
            {
                (*g.phenotype)(i) = kPhenotypeMissing;
            }
            else if (c == "0" || c == "1")
            {
                (*g.phenotype)(i) = c == "1" ? 1 : 0;
            }
            else
            {
                throw ParseError("bad phenotype '" + c + "' for subject " + row[0]);
            }
        }
        for (Eigen::Index j = 0; j < p; ++j)
        {
            const std::string& cell = row[first_snp + static_cast<std::size_t>(j)];
            if (cell == "NA")
            {
                g.missing(i, j) = true;
            }
            else if (cell == "0" || cell == "1" || cell == "2")
            {
                g.counts(i, j) = static_cast<double>(cell[0] - '0');
            }
            else
            {
                throw ParseError("bad genotype cell '" + cell + "' at subject " + row[0] +
                                 ", SNP " + g.snps[static_cast<std::size_t>(j)]);
            }
        }
    }
    g.validate();
    return g;
}

void write_genotypes(const GenotypeMatrix& g, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
    {
        throw ValidationError("cannot write genotype file: " + path.string());
    }
    out << "subject";
    if (g.phenotype)
    {
        out << "\tphenotype";
    }
    for (const auto& s : g.snps)
    {
        out << '\t' << s;
    }
    out << '\n';
    for (Eigen::Index i = 0; i < g.n_subjects(); ++i)
    {
        out << g.subjects[static_cast<std::size_t>(i)];
        if (g.phenotype)
        {
            const int y = (*g.phenotype)(i);
            out << '\t' << (y == kPhenotypeMissing ? std::string("NA") : std::to_string(y));
        }
        for (Eigen::Index j = 0; j < g.n_snps(); ++j)
        {
            if (g.missing(i, j))
            {
                out << "\tNA";
            }
            else
            {
                out << '\t' << static_cast<int>(g.counts(i, j));
            }
        }
        out << '\n';
    }
}

Eigen::VectorXd snp_maf(const GenotypeMatrix& g)
{
    const Eigen::Index p = g.n_snps();
    Eigen::VectorXd maf(p);
    for (Eigen::Index j = 0; j < p; ++j)
    {
        double sum = 0.0;
        Eigen::Index count = 0;
        for (Eigen::Index i = 0; i < g.n_subjects(); ++i)
        {
            if (!g.missing(i, j))
            {
                sum += g.counts(i, j);
                ++count;
            }
        }
        if (count == 0)
        {
            maf(j) = std::numeric_limits<double>::quiet_NaN();
        }
        else
        {
            const double f = sum / (2.0 * static_cast<double>(count));
            maf(j) = std::min(f, 1.0 - f);
        }
    }
    return maf;
}

Eigen::VectorXd snp_missing_rate(const GenotypeMatrix& g)
{
    const Eigen::Index p = g.n_snps();
    Eigen::VectorXd rate(p);
    for (Eigen::Index j = 0; j < p; ++j)
    {
        rate(j) = static_cast<double>(g.missing.col(j).count()) / static_cast<double>(g.n_subjects());
    }
    return rate;
}

GenotypeMatrix qc_filter(const GenotypeMatrix& g, double maf_min, double miss_max)
{
    if (maf_min < 0.0 || maf_min > 0.5)
    {
        throw ValidationError("maf_min must be in [0, 0.5]");
    }
    if (miss_max < 0.0 || miss_max > 1.0)
    {
        throw ValidationError("miss_max must be in [0, 1]");
    }
    const Eigen::VectorXd maf = snp_maf(g);
    const Eigen::VectorXd miss = snp_missing_rate(g);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < g.n_snps(); ++j)
    {
        if (!std::isnan(maf(j)) && maf(j) >= maf_min && miss(j) <= miss_max)
        {
            keep.push_back(j);
        }
    }
    if (keep.empty())
    {
        throw ValidationError("QC filter removed every SNP (maf_min=" + format_value(maf_min) +
                              ", miss_max=" + format_value(miss_max) + ")");
    }
    GenotypeMatrix out;
    out.subjects = g.subjects;
    out.phenotype = g.phenotype;
    out.counts.resize(g.n_subjects(), static_cast<Eigen::Index>(keep.size()));
    out.missing.resize(g.n_subjects(), static_cast<Eigen::Index>(keep.size()));
    out.snps.reserve(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k)
    {
        const Eigen::Index j = keep[k];
        out.snps.push_back(g.snps[static_cast<std::size_t>(j)]);
        out.counts.col(static_cast<Eigen::Index>(k)) = g.counts.col(j);
        out.missing.col(static_cast<Eigen::Index>(k)) = g.missing.col(j);
    }
    return out;
}

}  // namespace sga
