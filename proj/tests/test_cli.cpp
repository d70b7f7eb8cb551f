#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace sbm_ident;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("sbm_ident_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string file(const std::string& name, const std::string& content) {
    const auto p = dir_ / name;
    std::ofstream(p) << content;
    return p.string();
  }
  std::string path(const std::string& name) { return (dir_ / name).string(); }

  CliResult run(const std::string& args) {
    const auto out = path("stdout.txt");
    const std::string cmd = std::string(SBM_IDENT_CLI) + " " + args + " > " + out + " 2> " + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
  }

  fs::path dir_;
};

const char* kAffiliation = R"({"model":"affiliation","Q":2,"pi":[0.3,0.7],"alpha":0.8,"beta":0.2})";
const char* kUniform = R"({"model":"affiliation","Q":2,"pi":[0.5,0.5],"alpha":0.8,"beta":0.2})";

}  // namespace

TEST_F(Cli, SimulateWritesEveryPairDeterministically) {
  const auto params = file("p.json", kAffiliation);
  ASSERT_EQ(run("simulate --params " + params + " --n 100 --seed 7 --out " + path("a.tsv")).code, 0);
  ASSERT_EQ(run("simulate --params " + params + " --n 100 --seed 7 --out " + path("b.tsv")).code, 0);
  std::ifstream a(path("a.tsv")), b(path("b.tsv"));
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
  const std::string text = sa.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4951);  // header + 4950 pairs
}

TEST_F(Cli, SimulateNeedsSeedAndValidParams) {
  EXPECT_EQ(run("simulate --params " + file("p.json", kAffiliation) + " --n 10").code, 2);
  EXPECT_EQ(run("simulate --params " + file("q.json", R"({"model":"affiliation","pi":[0.5,0.7],"alpha":0.8,"beta":0.2})") +
                " --n 10 --seed 1")
                .code,
            2);
  EXPECT_EQ(run("simulate --params " + path("missing.json") + " --n 10 --seed 1").code, 3);
  EXPECT_EQ(run("simulate --params " + file("p2.json", kAffiliation) + " --n 10 --seed 1 --out /nonexistent/dir/x").code, 3);
  EXPECT_EQ(run("bogus").code, 2);
}

TEST_F(Cli, SimulateWritesLatentGroups) {
  ASSERT_EQ(run("simulate --params " + file("p.json", kAffiliation) + " --n 5 --seed 1 --latent " + path("z.tsv")).code, 0);
  std::ifstream z(path("z.tsv"));
  std::string line;
  int lines = 0;
  while (std::getline(z, line)) lines += line[0] != '#';
  EXPECT_EQ(lines, 5);
}

TEST_F(Cli, MomentsThenEstimateFromEdgeList) {
  const auto params = file("p.json", kAffiliation);
  ASSERT_EQ(run("simulate --params " + params + " --n 600 --seed 3 --out " + path("g.tsv")).code, 0);
  const auto m = run("moments --input " + path("g.tsv") + " --mode k4");
  ASSERT_EQ(m.code, 0);
  const auto mj = Json::parse(m.out);
  EXPECT_EQ(mj.at("schema"), "sbm-ident/1");
  EXPECT_NEAR(mj.at("moments").at("m1").get<double>(), 0.548, 0.03);
  EXPECT_TRUE(mj.at("moments").contains("m6"));
  const auto e = run("estimate --mode k3-q2 --input " + path("g.tsv"));
  ASSERT_EQ(e.code, 0);
  EXPECT_NEAR(Json::parse(e.out).at("result").at("alpha").get<double>(), 0.8, 0.1);
}

TEST_F(Cli, EstimateFromExactMoments) {
  const auto ms = file("m.json", R"({"m1":0.548,"m2":0.3124,"m31":0.2096})");
  const auto r = run("estimate --mode k3-q2 --input " + ms);
  ASSERT_EQ(r.code, 0);
  const auto j = Json::parse(r.out).at("result");
  EXPECT_NEAR(j.at("alpha").get<double>(), 0.8, 1e-12);
  EXPECT_NEAR(j.at("beta").get<double>(), 0.2, 1e-12);
  EXPECT_NEAR(j.at("pi")[0].get<double>(), 0.3, 1e-12);
  EXPECT_EQ(j.at("branch"), "k3-q2");

  const auto k = run("estimate --mode known-pi --params " + file("p.json", kAffiliation) + " --input " + ms);
  ASSERT_EQ(k.code, 0);
  EXPECT_EQ(Json::parse(k.out).at("result").at("branch"), "rational");
}

TEST_F(Cli, EstimateDegenerateReportsErrorCode) {
  const auto r = run("estimate --mode uniform-q --input " + file("m.json", R"({"m1":0.5,"m31":0.125,"m41":0.0625})"));
  EXPECT_EQ(r.code, 5);
  EXPECT_EQ(Json::parse(r.out).at("error").at("code"), "DEGENERATE_ALPHA_BETA");
  EXPECT_EQ(run("estimate --mode k3-q2 --input " + file("n.json", R"({"m1":0.5})")).code, 2);
  EXPECT_EQ(run("estimate --mode nonsense --input " + file("o.json", "{}")).code, 2);
}

TEST_F(Cli, EstimateGeneralQFromParams) {
  const auto r = run("estimate --mode general-q --groups 2 --params " + file("p.json", kAffiliation));
  ASSERT_EQ(r.code, 0);
  const auto c = Json::parse(r.out).at("result").at("candidates");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c[0].at("alpha").get<double>(), 0.8, 1e-12);
}

TEST_F(Cli, OracleTableAndMoments) {
  const auto params = file("u.json", kUniform);
  const auto t = run("oracle --params " + params + " --n 3");
  ASSERT_EQ(t.code, 0);
  const auto table = Json::parse(t.out).at("table");
  ASSERT_EQ(table.size(), 8u);
  double total = 0.0;
  for (const auto& row : table) total += row[1].get<double>();
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_EQ(table[7][0], "111");
  EXPECT_NEAR(table[7][1].get<double>(), 0.152, 1e-15);

  const auto m = run("oracle --params " + params + " --mode moments");
  ASSERT_EQ(m.code, 0);
  const auto j = Json::parse(m.out);
  const auto closed = to_json(theoretical_moments({{0.5, 0.5}, 0.8, 0.2}));
  for (const auto& [k, v] : closed.items()) {
    EXPECT_NEAR(j.at("closed_form").at(k).get<double>(), v.get<double>(), 1e-12);
    EXPECT_NEAR(j.at("exact").at(k).get<double>(), v.get<double>(), 1e-12);
  }
  EXPECT_EQ(run("oracle --params " + params + " --n 9").code, 4);
}

TEST_F(Cli, CheckModes) {
  const auto base = run("check --mode base-case --groups 2 --n 5 --seed 4");
  ASSERT_EQ(base.code, 0);
  EXPECT_EQ(Json::parse(base.out).at("result").at("rank"), 32);
  EXPECT_EQ(run("check --mode base-case --groups 3 --n 8 --seed 4").code, 4);

  const auto deg = run("check --mode degrees --input " + file("d.txt", "3 3 1 1\n"));
  ASSERT_EQ(deg.code, 0);
  EXPECT_FALSE(Json::parse(deg.out).at("result").at("realizable").get<bool>());
  const auto fam = run("check --mode degrees --groups 2 --n 5");
  EXPECT_EQ(Json::parse(fam.out).at("result").at("size"), 32);
  EXPECT_EQ(Json::parse(fam.out).at("result").at("realizable"), 32);

  const auto kr = run("check --mode kruskal-rank --input " + file("k.json", R"({"matrix":[[1,0],[0,1],[1,1]]})"));
  EXPECT_EQ(Json::parse(kr.out).at("result").at("kruskal_rank"), 2);

  const auto bins = run("check --mode bins --cuts 1.5,2.5 --params " +
                        file("w.json", R"({"model":"weighted","pi":[0.3,0.7],"sparsity":[[1,1],[1,1]],)"
                                       R"("family":"truncated_poisson","theta":[[1,2],[2,3]]})"));
  ASSERT_EQ(bins.code, 0);
  EXPECT_TRUE(Json::parse(bins.out).at("result").at("independent").get<bool>());
}

TEST_F(Cli, RecoverModes) {
  const auto w = file("w.json", to_json(weighted_affiliation({0.4, 0.6}, 0.9, 0.5, 1.0, 3.0)).dump());
  const auto a = run("recover --mode affiliation --params " + w);
  ASSERT_EQ(a.code, 0);
  const auto r = Json::parse(a.out).at("result");
  EXPECT_NEAR(r.at("alpha").get<double>(), 0.9, 1e-12);
  EXPECT_NEAR(r.at("pi")[0].get<double>(), 0.4, 1e-8);
  const auto k = run("recover --mode k3 --params " + w);
  // equal within-group rates merge into one all-equal component, which the
  // remaining components then contradict
  EXPECT_EQ(k.code, 5);
  EXPECT_EQ(Json::parse(k.out).at("error").at("code"), "INCONSISTENT_MOMENTS");
}
