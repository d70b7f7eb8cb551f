#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace sbm_ident;

TEST(ParamsJson, RoundTripsEveryModel) {
  const std::vector<AnyParams> all{
      BinaryBlockParams{{0.4, 0.6}, Matrix{{0.9, 0.2}, {0.2, 0.5}}},
      AffiliationParams{{0.3, 0.7}, 0.8, 0.2},
      FiniteStateParams{{1.0}, 3, {{0.2, 0.3, 0.5}}},
      weighted_affiliation({0.5, 0.5}, 0.9, 0.4, 1.0, 3.0),
  };
  for (const auto& p : all) {
    const Json j = to_json(p);
    const auto back = params_from_json(Json::parse(j.dump()));
    EXPECT_EQ(back.index(), p.index());
    EXPECT_EQ(to_json(back), j);
  }
}

TEST(ParamsJson, ReportsProblems) {
  auto expect_invalid = [](const char* text) {
    try {
      params_from_json(Json::parse(text));
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidParams) << text;
    }
  };
  expect_invalid(R"({"model":"affiliation","pi":[0.5,0.7],"alpha":0.8,"beta":0.2})");
  expect_invalid(R"({"model":"affiliation","pi":[0.5,0.5],"alpha":0.8})");
  expect_invalid(R"({"model":"nope","pi":[1.0]})");
  expect_invalid(R"({"model":"binary","Q":3,"pi":[0.5,0.5],"P":[[1,0],[0,1]]})");
  expect_invalid(R"({"model":"weighted","pi":[1.0],"sparsity":[[0.5]],"family":"gaussian","theta":[[1]]})");
}

TEST(MomentJson, ReadsTopLevelOrNested) {
  const auto a = moments_from_json(Json::parse(R"({"m1":0.5,"m31":0.152})"));
  EXPECT_EQ(*a.m1, 0.5);
  EXPECT_FALSE(a.m2.has_value());
  const auto b = moments_from_json(Json::parse(R"({"provenance":"empirical","moments":{"m41":0.07}})"));
  EXPECT_EQ(*b.m41, 0.07);
  EXPECT_EQ(b.provenance, Provenance::Empirical);
  EXPECT_EQ(moments_from_json(to_json(a)).m31, a.m31);
}

TEST(MixtureJson, RoundTrip) {
  const auto s = expand_k3_mixture(weighted_affiliation({0.4, 0.6}, 0.9, 0.5, 1.0, 3.0));
  const auto back = mixture_from_json(Json::parse(to_json(s).dump()));
  ASSERT_EQ(back.components.size(), s.components.size());
  for (std::size_t k = 0; k < s.components.size(); ++k) {
    EXPECT_EQ(back.components[k].weight, s.components[k].weight);
    EXPECT_TRUE(detail::same_atoms(back.components[k].atoms, s.components[k].atoms, 0.0));
  }
}

TEST(EdgeList, RoundTripsAllKinds) {
  const std::vector<SampledGraph> graphs{
      sample_graph(AffiliationParams{{0.3, 0.7}, 0.8, 0.2}, 25, 1),
      sample_graph(FiniteStateParams{{1.0}, 4, {{0.1, 0.2, 0.3, 0.4}}}, 20, 2),
      sample_graph(weighted_affiliation({0.5, 0.5}, 0.8, 0.3, 1.0, 6.0), 20, 3),
  };
  for (const auto& g : graphs) {
    std::stringstream ss;
    write_edge_list(ss, g);
    const auto back = read_edge_list(ss);
    EXPECT_EQ(back.n, g.n);
    EXPECT_EQ(back.kind, g.kind);
    EXPECT_EQ(back.values, g.values);
  }
}

TEST(EdgeList, FormatIsOneBasedTabSeparated) {
  SampledGraph g{3, EdgeKind::Binary, 2, {1, 0, 1}, std::nullopt};
  std::stringstream ss;
  write_edge_list(ss, g);
  EXPECT_EQ(ss.str(), "# n=3 kind=binary\n1\t2\t1\n1\t3\t0\n2\t3\t1\n");
}

TEST(EdgeList, RejectsMalformedInput) {
  for (const char* text : {"", "n=3\n", "# n=3 kind=binary\n0\t1\t1\n", "# n=3 kind=binary\n1\t2\t2\n",
                           "# n=3 kind=binary\n1\t2\t1\n1\t2\t1\n", "# n=3 kind=colour\n", "# n=3 kind=binary\n3\t2\t1\n"}) {
    std::stringstream ss(text);
    try {
      read_edge_list(ss);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::Io) << text;
    }
  }
}

TEST(EdgeList, MissingPairsReadAsAbsent) {
  std::stringstream ss("# n=4 kind=binary\n2\t4\t1\n");
  const auto g = read_edge_list(ss);
  EXPECT_EQ(g.at(1, 3), 1.0);
  EXPECT_EQ(std::count(g.values.begin(), g.values.end(), 0.0), 5);
}
