#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "rankmerge/heterogeneity.hpp"
#include "rankmerge/ingest.hpp"
#include "rankmerge/text.hpp"
#include "support.hpp"

using namespace rankmerge;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = RANKMERGE_FIXTURES;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rankmerge");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = rankmerge::testing::scratch_dir("cli"); }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string save(const Dataset& ds, const std::string& name) const {
    save_dataset(ds, dir_ / name);
    return path(name);
  }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
    return path(name);
  }

  std::string ingest_mixed() const {
    const auto r = run_cli({"ingest", (kFixtures / "mixed_series.txt").string(),
                            (kFixtures / "mixed_annotation.tsv").string(), "--out", path("mixed")});
    EXPECT_EQ(r.code, 0) << r.err;
    return path("mixed");
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, HelpAndUsage) {
  EXPECT_EQ(run_cli({"--help"}).code, cli::kOk);
  EXPECT_EQ(run_cli({}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"score", "x", "--kind", "zscore", "--out", "y"}).code, cli::kUsage);
}

TEST_F(CliTest, IngestSmallFixture) {
  const auto r = run_cli({"ingest", (kFixtures / "small_series.txt").string(),
                          (kFixtures / "small_annotation.tsv").string(), "--out", path("small")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("features\t2\n"), std::string::npos) << r.out;
  const auto ds = load_dataset(path("small"));
  EXPECT_EQ(ds.data().row_names(), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(ds.name(), "small_series");
  EXPECT_EQ(ds.meta().score, ScoreKind::none);
}

TEST_F(CliTest, IngestErrors) {
  const auto bad = run_cli({"ingest", (kFixtures / "malformed" / "ragged_row.txt").string(),
                            (kFixtures / "small_annotation.tsv").string(), "--out", path("x")});
  EXPECT_EQ(bad.code, cli::kParse);
  EXPECT_NE(bad.err.find("line 5"), std::string::npos) << bad.err;
  EXPECT_FALSE(fs::exists(path("x")));

  const auto unmapped = write("none.tsv", "zz\tA\n");
  EXPECT_EQ(run_cli({"ingest", (kFixtures / "small_series.txt").string(), unmapped, "--out", path("y")}).code,
            cli::kAnnotation);
  EXPECT_EQ(run_cli({"ingest", path("missing.txt"), unmapped, "--out", path("z")}).code, cli::kIo);
}

TEST_F(CliTest, IngestMultiPolicy) {
  const auto series = (kFixtures / "mixed_series.txt").string();
  const auto ann = (kFixtures / "mixed_annotation.tsv").string();
  ASSERT_EQ(run_cli({"ingest", series, ann, "--out", path("first")}).code, 0);
  ASSERT_EQ(run_cli({"ingest", series, ann, "--multi-policy", "drop", "--out", path("drop")}).code, 0);
  EXPECT_EQ(load_dataset(path("first")).data().rows(), 3u);
  EXPECT_EQ(load_dataset(path("drop")).data().rows(), 2u);
}

TEST_F(CliTest, ScoreVdwEcdfAndDoubleScore) {
  const auto mixed = ingest_mixed();
  ASSERT_EQ(run_cli({"score", mixed, "--kind", "vdw", "--out", path("vdw")}).code, 0);
  const auto vdw = load_dataset(path("vdw"));
  EXPECT_EQ(vdw.meta().score, ScoreKind::vdw);
  // Column GSM11 holds three values; its middle one scores 0.
  const auto col = vdw.data().column(1);
  EXPECT_EQ(col[0], 0.0);

  ASSERT_EQ(run_cli({"score", mixed, "--kind", "ecdf", "--out", path("ecdf")}).code, 0);
  const auto ecdf = load_dataset(path("ecdf"));
  for (std::size_t c = 0; c < ecdf.data().cols(); ++c) {
    const auto column = ecdf.data().column(c);
    const double n = static_cast<double>(std::count_if(column.begin(), column.end(), [](double v) { return !is_missing(v); }));
    for (double v : column) {
      if (!is_missing(v)) EXPECT_EQ(std::fmod(v * n * 2, 1.0), 0.0);  // midranks are multiples of 1/2
    }
  }

  const auto again = run_cli({"score", path("vdw"), "--kind", "ecdf", "--out", path("twice")});
  EXPECT_EQ(again.code, cli::kScoreState);
}

TEST_F(CliTest, MedianCorrelation) {
  const auto m = rankmerge::testing::random_matrix(40, 5, 3);
  std::vector<double> flipped(m.values().begin(), m.values().end());
  for (auto& v : flipped) v = -v;
  const auto a = save(rankmerge::testing::make_dataset(m, "A", "a"), "A");
  const auto b = save(rankmerge::testing::make_dataset(DataMatrix(m.row_names(), m.col_names(), flipped), "B", "b"), "B");

  const auto self = run_cli({"median-cor", a});
  ASSERT_EQ(self.code, 0) << self.err;
  EXPECT_EQ(lines_of(self.out)[1], "A\t1");

  const auto pair = run_cli({"median-cor", a, b});
  ASSERT_EQ(pair.code, 0) << pair.err;
  const auto lines = lines_of(pair.out);
  EXPECT_EQ(lines[0], "dataset\tA\tB");
  EXPECT_EQ(lines[1], "A\t1\t-1");
  EXPECT_NE(pair.out.find("# common_features\t40"), std::string::npos);

  const auto other = save(rankmerge::testing::make_dataset(DataMatrix({"ZZ"}, {"q"}, {1.0}), "C", "c"), "C");
  EXPECT_EQ(run_cli({"median-cor", a, other}).code, cli::kNoCommonFeatures);
}

TEST_F(CliTest, MedianCorrelationThresholdLine) {
  // Synthetic stand-ins with 15,562 common rows.
  const auto a = save(rankmerge::testing::make_dataset(rankmerge::testing::random_matrix(15562, 3, 1, "a"), "A", "a"), "A");
  const auto b = save(rankmerge::testing::make_dataset(rankmerge::testing::random_matrix(15562, 3, 2, "b"), "B", "b"), "B");
  const auto r = run_cli({"median-cor", a, b});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# threshold\t0.0132\t"), std::string::npos) << r.out;
}

TEST_F(CliTest, PairwiseStreams) {
  DataMatrix m({"r1", "r2", "r3"}, {"s1", "s2", "s3"}, {1, 2, 3, 1, 2, 3, 3, 1, 2});
  const auto ds = save(rankmerge::testing::make_dataset(m, "P", "p"), "P");
  const auto r = run_cli({"pairwise", ds, "--out", path("pairs.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "pairs\t3\tskipped\t0\n");
  const auto lines = lines_of(slurp(path("pairs.tsv")));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "r1\tr2\t1");
  EXPECT_FALSE(fs::exists(path("pairs.tsv.partial")));
}

TEST_F(CliTest, PairwiseThreadsByteIdentical) {
  const auto ds = save(rankmerge::testing::make_dataset(rankmerge::testing::random_matrix(120, 30, 8), "R", "r"), "R");
  ASSERT_EQ(run_cli({"--threads", "1", "pairwise", ds, "--out", path("t1.tsv")}).code, 0);
  ASSERT_EQ(run_cli({"--threads", "8", "pairwise", ds, "--out", path("t8.tsv"), "--chunk-rows", "5"}).code, 0);
  const auto t1 = slurp(path("t1.tsv"));
  EXPECT_EQ(lines_of(t1).size(), 7140u);
  EXPECT_EQ(t1, slurp(path("t8.tsv")));
}

TEST_F(CliTest, TestPlantedSignalAndErrors) {
  const auto studies = rankmerge::testing::planted_studies(200, 1, 15, 15, 3.0, 77);
  const auto a = save(studies.a, "A");
  const auto b = save(studies.b, "B");
  const auto r = run_cli({"test", a, b, "--out", path("kw.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("significant\t"), std::string::npos);
  const auto lines = lines_of(slurp(path("kw.tsv")));
  ASSERT_EQ(lines.size(), 201u);
  EXPECT_EQ(lines[1].substr(0, lines[1].find('\t')), studies.planted.front());

  const auto w = run_cli({"test", a, b, "--test", "wilcoxon", "--alternative", "less"});
  ASSERT_EQ(w.code, 0) << w.err;
  const auto wl = lines_of(w.out);
  EXPECT_EQ(wl[1].substr(0, wl[1].find('\t')), studies.planted.front());
  EXPECT_NE(wl[1].find("\tunder"), std::string::npos);

  EXPECT_EQ(run_cli({"test", a}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"test", a, "--field", "group"}).code, cli::kDegenerate);
  EXPECT_EQ(run_cli({"test", a, "--field", "group", "--keyword", "nomatch", "--test", "wilcoxon"}).code,
            cli::kDegenerate);
}

TEST_F(CliTest, TestSplitByKeyword) {
  const auto studies = rankmerge::testing::planted_studies(50, 1, 15, 15, 4.0, 5);
  const std::vector<Dataset> both{studies.a, studies.b};
  const auto merged = save(merge_datasets(both), "M");
  const auto r = run_cli({"test", merged, "--field", "group", "--keyword", "b", "--test", "wilcoxon"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  EXPECT_EQ(lines[1].substr(0, lines[1].find('\t')), studies.planted.front());
  const auto kw = run_cli({"test", merged, "--field", "group"});
  ASSERT_EQ(kw.code, 0) << kw.err;
  EXPECT_EQ(lines_of(kw.out)[1].substr(0, lines_of(kw.out)[1].find('\t')), studies.planted.front());
}

TEST_F(CliTest, PcaLineFixtureAndTop) {
  // Two features lying on a line across samples.
  DataMatrix m({"F1", "F2", "F3"}, {"s1", "s2", "s3"}, {1, 2, 3, 2, 4, 6, 0, 5, 1});
  const auto ds = save(rankmerge::testing::make_dataset(m, "L", "line"), "L");
  const auto r = run_cli({"pca", ds, "--features", "F1,F2", "--out-svg", path("line.svg"), "--out-tsv",
                          path("line.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines_of(slurp(path("line.tsv")));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "sample\tPC1\tPC2\tlabel");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cells = split(rows[i], '\t');
    EXPECT_NEAR(*parse_cell(cells[2]), 0.0, 1e-12);
    EXPECT_EQ(cells[3], "L");
  }
  EXPECT_NE(slurp(path("line.svg")).find("<svg"), std::string::npos);

  const auto missing = run_cli({"pca", ds, "--features", "F1,F22", "--out-tsv", path("x.tsv")});
  EXPECT_EQ(missing.code, cli::kUnknownFeature);
  EXPECT_NE(missing.err.find("F2"), std::string::npos) << missing.err;

  const auto studies = rankmerge::testing::planted_studies(100, 10, 12, 12, 3.0, 9);
  const auto a = save(studies.a, "A");
  const auto b = save(studies.b, "B");
  ASSERT_EQ(run_cli({"test", a, b, "--out", path("res.tsv")}).code, 0);
  const auto top = run_cli({"pca", a, b, "--top", "10", "--results", path("res.tsv"), "--out-tsv", path("top.tsv"),
                            "--out-svg", path("top.svg")});
  ASSERT_EQ(top.code, 0) << top.err;
  EXPECT_NE(top.out.find("variables\t10\n"), std::string::npos);
  // Groups separate on PC1.
  double sum_a = 0;
  double sum_b = 0;
  for (const auto& line : lines_of(slurp(path("top.tsv")))) {
    const auto cells = split(line, '\t');
    if (cells[3] == "studyA") sum_a += *parse_cell(cells[1]);
    if (cells[3] == "studyB") sum_b += *parse_cell(cells[1]);
  }
  EXPECT_GT(std::fabs(sum_a / 12 - sum_b / 12), 1.0);
  EXPECT_EQ(run_cli({"pca", a, "--out-tsv", path("q.tsv")}).code, cli::kUsage);
}

TEST_F(CliTest, FactorPlot) {
  std::vector<std::string> dirs;
  for (int i = 0; i < 4; ++i) {
    dirs.push_back(save(rankmerge::testing::make_dataset(rankmerge::testing::random_matrix(30, 4, 100 + i,
                                                                                          "d" + std::to_string(i)),
                                                         "D" + std::to_string(i), "x"),
                        "D" + std::to_string(i)));
  }
  std::vector<std::string> args{"factor-plot"};
  args.insert(args.end(), dirs.begin(), dirs.end());
  args.insert(args.end(), {"--out-svg", path("f.svg"), "--out-tsv", path("f.tsv")});
  const auto r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines_of(slurp(path("f.tsv"))).size(), 5u);
  const auto svg1 = slurp(path("f.svg"));
  ASSERT_EQ(run_cli(args).code, 0);
  EXPECT_EQ(svg1, slurp(path("f.svg")));
  EXPECT_NE(svg1.find("<ellipse"), std::string::npos);
}

TEST_F(CliTest, EnrichToyAndEmptyUniverse) {
  std::string results = "feature\tstatistic\tp_raw\tlog10_p_raw\tp_adj\tlog10_p_adj\tdirection\n";
  for (int i = 1; i <= 10; ++i) {
    const double p = i <= 5 ? 1e-4 : 0.9;
    results += "G" + std::to_string(i) + "\t1\t" + format_double(p) + "\t" + format_double(std::log10(p)) + "\t" +
               format_double(p) + "\t" + format_double(std::log10(p)) + "\tnone\n";
  }
  const auto res = write("res.tsv", results);
  const auto gmt = write("sets.gmt", "TOY\ttoy set\tG1\tG2\tG3\tG6\nALL\tall\tG1\tG2\tG3\tG4\tG5\n");
  const auto r = run_cli({"enrich", res, gmt});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 3u);
  const auto cells = split(lines[1], '\t');
  EXPECT_EQ(cells[0], "TOY");
  EXPECT_EQ(cells[1], "10");
  EXPECT_EQ(cells[2], "5");
  EXPECT_EQ(cells[3], "4");
  EXPECT_EQ(cells[4], "3");
  EXPECT_NEAR(*parse_cell(cells[5]), 0.261905, 1e-6);
  // Geneset equal to the selection: p at its minimum 1 / C(10,5).
  EXPECT_NEAR(*parse_cell(split(lines[2], '\t')[5]), 1.0 / 252.0, 1e-15);

  const auto empty_universe = write("universe.txt", "\n");
  EXPECT_EQ(run_cli({"enrich", res, gmt, "--universe", empty_universe}).code, cli::kEmptyUniverse);
}

TEST_F(CliTest, SelectPartitionMerge) {
  const auto mixed = ingest_mixed();
  const auto sel = run_cli({"select", mixed, "--field", "Sample_source_name_ch1", "--keyword", "breast", "--mode",
                            "substring", "--out", path("breast")});
  ASSERT_EQ(sel.code, 0) << sel.err;
  EXPECT_EQ(load_dataset(path("breast")).samples(), 3u);
  EXPECT_EQ(run_cli({"select", mixed, "--field", "Sample_source_name_ch1", "--keyword", "colon", "--out",
                     path("none")})
                .code,
            cli::kDegenerate);

  ASSERT_EQ(run_cli({"--seed", "7", "partition", mixed, "--sizes", "2,2", "--out-prefix", path("part")}).code, 0);
  ASSERT_EQ(run_cli({"--seed", "7", "partition", mixed, "--sizes", "2,2", "--out-prefix", path("again")}).code, 0);
  EXPECT_EQ(load_dataset(path("part_1")), load_dataset(path("again_1")));
  EXPECT_EQ(load_dataset(path("part_1")).meta().seed, 7u);
  EXPECT_EQ(run_cli({"partition", mixed, "--sizes", "2,1", "--out-prefix", path("bad")}).code, cli::kUsage);

  const auto merged = run_cli({"merge", path("part_1"), path("part_2"), "--out", path("merged")});
  ASSERT_EQ(merged.code, 0) << merged.err;
  EXPECT_EQ(load_dataset(path("merged")).samples(), 4u);
}

TEST_F(CliTest, SplitHeterogeneity) {
  const auto ds = rankmerge::testing::make_dataset(rankmerge::testing::random_matrix(60, 20, 4), "H", "h");
  const auto dir = save(ds, "H");
  const auto r = run_cli({"split-het", dir, "--feature", "G1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto direct = heterogeneity_split(ds, "G1");
  EXPECT_NE(r.out.find("correlation\t" + format_double(direct.correlation)), std::string::npos);
  EXPECT_EQ(direct.non_negative + direct.negative, 20u);
  const auto miss = run_cli({"split-het", dir, "--feature", "G01"});
  EXPECT_EQ(miss.code, cli::kUnknownFeature);
  EXPECT_NE(miss.err.find("G1"), std::string::npos);
}

TEST_F(CliTest, ConfigDefaultsAndOverrides) {
  const auto mixed = ingest_mixed();
  const auto cfg = write("cfg.json", R"({"seed": 7, "score": {"kind": "ecdf"}})");
  ASSERT_EQ(run_cli({"--config", cfg, "score", mixed, "--out", path("from_cfg")}).code, 0);
  EXPECT_EQ(load_dataset(path("from_cfg")).meta().score, ScoreKind::ecdf);
  ASSERT_EQ(run_cli({"--config", cfg, "score", mixed, "--kind", "vdw", "--out", path("override")}).code, 0);
  EXPECT_EQ(load_dataset(path("override")).meta().score, ScoreKind::vdw);

  ASSERT_EQ(run_cli({"--config", cfg, "partition", mixed, "--sizes", "1,3", "--out-prefix", path("c")}).code, 0);
  ASSERT_EQ(run_cli({"--seed", "7", "partition", mixed, "--sizes", "1,3", "--out-prefix", path("d")}).code, 0);
  EXPECT_EQ(load_dataset(path("c_1")), load_dataset(path("d_1")));

  const auto broken = write("broken.json", "{not json");
  EXPECT_EQ(run_cli({"--config", broken, "score", mixed, "--out", path("q")}).code, cli::kParse);
}
