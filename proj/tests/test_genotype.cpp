#include "sga/common.hpp"
#include "sga/genotype.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <string>

using namespace sga;
using sga::test::TempDir;

namespace
{

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("genotype TSV round trip preserves everything")
{
    TempDir dir("geno");
    GenotypeMatrix g = test::make_panel(7, 5, 42, true);
    g.counts(2, 3) = 0.0;
    g.missing(2, 3) = true;
    g.counts(6, 0) = 0.0;
    g.missing(6, 0) = true;

    const std::string path = dir.file("panel.tsv");
    write_genotypes(g, path);
    const GenotypeMatrix r = read_genotypes(path);

    CHECK(r.subjects == g.subjects);
    CHECK(r.snps == g.snps);
    REQUIRE(r.n_subjects() == g.n_subjects());
    REQUIRE(r.n_snps() == g.n_snps());
    for (int i = 0; i < g.n_subjects(); ++i)
    {
        for (int j = 0; j < g.n_snps(); ++j)
        {
            CHECK(r.missing(i, j) == g.missing(i, j));
            if (!g.missing(i, j))
            {
                CHECK(r.counts(i, j) == doctest::Approx(g.counts(i, j)));
            }
        }
    }
    REQUIRE(r.phenotype.has_value());
    CHECK((r.phenotype->array() == g.phenotype->array()).all());

    // literal text survives a second round trip byte for byte
    const std::string again = dir.file("again.tsv");
    write_genotypes(r, again);
    CHECK(slurp(path) == slurp(again));
}

TEST_CASE("read_genotypes parses a hand-written file")
{
    TempDir dir("geno");
    const std::string path = dir.file("tiny.tsv");
    {
        std::ofstream out(path);
        out << "subject\tphenotype\trsA\trsB\n";
        out << "P1\t1\t0\t2\n";
        out << "P2\t0\tNA\t1\n";
    }
    const GenotypeMatrix g = read_genotypes(path);
    REQUIRE(g.n_subjects() == 2);
    REQUIRE(g.n_snps() == 2);
    CHECK(g.subjects[0] == "P1");
    CHECK(g.snps[1] == "rsB");
    CHECK(g.counts(0, 0) == 0.0);
    CHECK(g.counts(0, 1) == 2.0);
    CHECK(g.missing(1, 0));
    CHECK_FALSE(g.missing(0, 1));
    REQUIRE(g.phenotype.has_value());
    CHECK((*g.phenotype)(0) == 1);
    CHECK((*g.phenotype)(1) == 0);
    CHECK(g.has_complete_phenotype());
}

TEST_CASE("read_genotypes without phenotype column")
{
    TempDir dir("geno");
    const std::string path = dir.file("nopheno.tsv");
    {
        std::ofstream out(path);
        out << "id\trs1\n";
        out << "A\t1\n";
        out << "B\t0\n";
    }
    const GenotypeMatrix g = read_genotypes(path);
    CHECK_FALSE(g.phenotype.has_value());
    CHECK_FALSE(g.has_complete_phenotype());
}

TEST_CASE("read_genotypes rejects malformed input")
{
    TempDir dir("geno");

    SUBCASE("bad cell value")
    {
        const std::string path = dir.file("bad.tsv");
        std::ofstream(path) << "id\trs1\nA\t3\n";
        CHECK_THROWS_AS(read_genotypes(path), ParseError);
    }
    SUBCASE("ragged row")
    {
        const std::string path = dir.file("ragged.tsv");
        std::ofstream(path) << "id\trs1\trs2\nA\t1\n";
        CHECK_THROWS_AS(read_genotypes(path), ParseError);
    }
    SUBCASE("duplicate subject")
    {
        const std::string path = dir.file("dup.tsv");
        std::ofstream(path) << "id\trs1\nA\t1\nA\t2\n";
        CHECK_THROWS_AS(read_genotypes(path), ValidationError);
    }
    SUBCASE("missing file")
    {
        CHECK_THROWS_AS(read_genotypes(dir.file("nowhere.tsv")), ValidationError);
    }
    SUBCASE("no data rows")
    {
        const std::string path = dir.file("empty.tsv");
        std::ofstream(path) << "id\trs1\n";
        CHECK_THROWS_AS(read_genotypes(path), ValidationError);
    }
}

TEST_CASE("snp_maf and snp_missing_rate")
{
    GenotypeMatrix g = test::make_panel(4, 2, 1);
    g.counts.col(0) << 0, 1, 2, 1;  // allele freq 4/8 = 0.5
    g.counts.col(1) << 2, 2, 2, 1;  // allele freq 7/8, maf 1/8
    g.missing.setConstant(false);

    CHECK(snp_maf(g)(0) == doctest::Approx(0.5));
    CHECK(snp_maf(g)(1) == doctest::Approx(0.125));
    CHECK(snp_missing_rate(g)(0) == doctest::Approx(0.0));

    g.missing(0, 1) = true;  // freq over remaining 3 subjects: 5/6
    CHECK(snp_maf(g)(1) == doctest::Approx(1.0 / 6.0));
    CHECK(snp_missing_rate(g)(1) == doctest::Approx(0.25));

    g.missing.col(0).setConstant(true);
    CHECK(std::isnan(snp_maf(g)(0)));
}

TEST_CASE("qc_filter keeps exactly the SNPs passing both rules")
{
    GenotypeMatrix g = test::make_panel(10, 4, 7);
    g.missing.setConstant(false);
    // col 0: monomorphic (maf 0) -> dropped by maf rule
    g.counts.col(0).setConstant(2.0);
    // col 1: common, complete -> kept
    g.counts.col(1) << 0, 1, 2, 1, 0, 1, 2, 1, 0, 1;
    // col 2: common but 20% missing -> dropped by missingness rule
    g.counts.col(2) = g.counts.col(1);
    g.missing(0, 2) = true;
    g.missing(1, 2) = true;
    // col 3: rare (maf 0.05 exactly) -> kept with maf_min = 0.05
    g.counts.col(3).setZero();
    g.counts(0, 3) = 1.0;

    const GenotypeMatrix f = qc_filter(g, 0.05, 0.1);
    REQUIRE(f.n_snps() == 2);
    CHECK(f.snps[0] == g.snps[1]);
    CHECK(f.snps[1] == g.snps[3]);
    CHECK(f.n_subjects() == g.n_subjects());

    // recount on the filtered panel agrees with the originals
    CHECK(snp_maf(f)(0) == doctest::Approx(snp_maf(g)(1)));
    CHECK(snp_maf(f)(1) == doctest::Approx(snp_maf(g)(3)));
}

TEST_CASE("subset_subjects keeps order and phenotype")
{
    GenotypeMatrix g = test::make_panel(6, 3, 11, true);
    const GenotypeMatrix s = g.subset_subjects({4, 1, 3});
    REQUIRE(s.n_subjects() == 3);
    CHECK(s.subjects[0] == g.subjects[4]);
    CHECK(s.subjects[1] == g.subjects[1]);
    CHECK(s.subjects[2] == g.subjects[3]);
    CHECK(s.counts.row(0).isApprox(g.counts.row(4)));
    CHECK((*s.phenotype)(2) == (*g.phenotype)(3));
    CHECK_THROWS_AS(g.subset_subjects({0, 6}), ValidationError);
}

TEST_CASE("validate flags shape mismatches")
{
    GenotypeMatrix g = test::make_panel(3, 2, 5);
    CHECK_NOTHROW(g.validate());
    g.subjects.pop_back();
    CHECK_THROWS_AS(g.validate(), ValidationError);
}
