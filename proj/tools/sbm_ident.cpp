// sbm-ident: simulate, summarize and invert random graph mixture models.

#include <sbm_ident.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace sbm_ident;

struct RunConfig {
  std::string params;
  std::string input;
  std::string out;
  std::string latent;
  std::string mode;
  std::string cuts;
  std::optional<std::uint64_t> seed;
  std::optional<int> n;
  std::optional<int> groups;
  std::optional<double> tol;
};

enum Exit { kOk = 0, kUsage = 2, kIo = 3, kGuard = 4, kEstimator = 5 };

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::Io: return kIo;
    case ErrorCode::SizeGuard: return kGuard;
    case ErrorCode::DegenerateAlphaBeta:
    case ErrorCode::InconsistentMoments:
    case ErrorCode::SingleGroup:
    case ErrorCode::AssumptionViolated:
    case ErrorCode::Unidentifiable: return kEstimator;
    case ErrorCode::InvalidParams:
    case ErrorCode::MissingMoment:
    case ErrorCode::DomainError: return kUsage;
  }
  return kUsage;
}

Json report(const std::string& command) { return {{"schema", kReportSchema}, {"command", command}}; }

/// Writes to --out, or stdout when no path is given.
template <class Writer>
void emit(const RunConfig& cfg, Writer&& write) {
  if (cfg.out.empty() || cfg.out == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream os(cfg.out, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + cfg.out);
  write(os);
  if (!os) throw Error(ErrorCode::Io, "write failed: " + cfg.out);
}

void emit_json(const RunConfig& cfg, const Json& j) {
  emit(cfg, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

void need(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidParams, what);
}

Json diagnostics_json(const std::vector<std::pair<std::string, double>>& d) {
  Json out = Json::object();
  for (const auto& [k, v] : d) out[k] = v;
  return out;
}

/// Moments from --input: a JSON moment file (first non-blank char '{') or an
/// edge list.
MomentSet input_moments(const RunConfig& cfg, MomentOrder order) {
  need(!cfg.input.empty(), "--input is required");
  std::ifstream in(cfg.input);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + cfg.input);
  char c = 0;
  while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {
  }
  in.seekg(0);
  if (c == '{') return moments_from_json(read_json_file(cfg.input));
  return empirical_moments(read_edge_list(in), order);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg) {
  need(!cfg.params.empty(), "--params is required");
  need(cfg.n.has_value(), "--n is required");
  need(cfg.seed.has_value(), "--seed is required for simulate");
  const auto params = read_params(cfg.params);
  const bool keep = !cfg.latent.empty();
  const auto g = std::visit([&](const auto& p) { return sample_graph(p, *cfg.n, *cfg.seed, keep); }, params);
  emit(cfg, [&](std::ostream& os) { write_edge_list(os, g); });
  if (keep) {
    std::ofstream os(cfg.latent);
    if (!os) throw Error(ErrorCode::Io, "cannot write " + cfg.latent);
    write_latent(os, *g.z);
  }
  return kOk;
}

int cmd_moments(const RunConfig& cfg) {
  need(!cfg.input.empty(), "--input is required");
  const auto order = cfg.mode == "k4" ? MomentOrder::K4 : MomentOrder::K3;
  need(cfg.mode.empty() || cfg.mode == "k3" || cfg.mode == "k4", "--mode must be k3 or k4");
  const auto g = read_edge_list(cfg.input);
  auto r = report("moments");
  r["provenance"] = "empirical";
  r["n"] = g.n;
  r["moments"] = to_json(empirical_moments(g, order));
  emit_json(cfg, r);
  return kOk;
}

Json result_json(const RecoveryResult& res) {
  Json j{{"alpha", res.alpha}, {"beta", res.beta}, {"branch", res.branch}, {"diagnostics", diagnostics_json(res.diagnostics)}};
  if (res.pi) j["pi"] = *res.pi;
  if (res.Q) j["Q"] = *res.Q;
  return j;
}

int cmd_estimate(const RunConfig& cfg) {
  auto r = report("estimate");
  r["mode"] = cfg.mode;
  EstimatorTolerances tol;
  if (cfg.mode == "k3-q2") {
    if (cfg.tol) tol.degenerate = *cfg.tol;
    r["result"] = result_json(estimate_k3_q2(input_moments(cfg, MomentOrder::K3), tol));
  } else if (cfg.mode == "known-pi") {
    need(!cfg.params.empty(), "--params with the known pi is required for known-pi");
    const auto pi = detail::number_array(detail::field(read_json_file(cfg.params), "pi"), "pi");
    if (cfg.tol) tol.uniformity = *cfg.tol;
    r["result"] = result_json(estimate_known_pi(input_moments(cfg, MomentOrder::K3), pi, tol));
  } else if (cfg.mode == "uniform-q") {
    if (cfg.tol) tol.q_denominator = *cfg.tol;
    r["result"] = result_json(estimate_q_uniform(input_moments(cfg, MomentOrder::K4), tol));
  } else if (cfg.mode == "general-q") {
    need(cfg.groups.has_value(), "--groups is required for general-q");
    const int Q = *cfg.groups;
    SubsetMoments sm;
    if (!cfg.input.empty()) {
      sm = empirical_subset_moments(read_edge_list(cfg.input), Q + 1, 2'000'000, cfg.seed.value_or(0));
    } else {
      need(!cfg.params.empty(), "general-q needs --input (edge list) or --params (exact law)");
      const auto params = read_params(cfg.params);
      const auto dist = std::visit(
          [&](const auto& p) -> ExactDistribution {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, AffiliationParams> || std::is_same_v<P, BinaryBlockParams>)
              return exact_distribution(p, Q + 1);
            else
              throw Error(ErrorCode::InvalidParams, "general-q needs binary or affiliation params");
          },
          params);
      sm = subset_moments(dist);
    }
    Json list = Json::array();
    for (const auto& c : candidates_general_q(sm, Q, cfg.tol.value_or(1e-10))) {
      Json item{{"alpha", c.alpha}, {"multiplicity", c.multiplicity}, {"beta_flagged", c.beta_flagged}};
      if (!c.beta_flagged) {
        item["beta"] = c.beta;
        item["residual"] = c.residual;
      }
      list.push_back(item);
    }
    r["result"] = {{"Q", Q}, {"branch", "general-q"}, {"candidates", list}};
  } else {
    throw Error(ErrorCode::InvalidParams, "--mode must be k3-q2, known-pi, uniform-q or general-q");
  }
  emit_json(cfg, r);
  return kOk;
}

int cmd_oracle(const RunConfig& cfg) {
  need(!cfg.params.empty(), "--params is required");
  const auto params = read_params(cfg.params);
  auto r = report("oracle");
  r["mode"] = cfg.mode.empty() ? "table" : cfg.mode;
  if (cfg.mode.empty() || cfg.mode == "table") {
    need(cfg.n.has_value(), "--n is required for the table");
    const auto dist = std::visit(
        [&](const auto& p) -> ExactDistribution {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, WeightedParams>)
            throw Error(ErrorCode::InvalidParams, "weighted models have no finite configuration table; use recover");
          else
            return exact_distribution(p, *cfg.n);
        },
        params);
    Json edges = Json::array();
    for (auto [i, j] : edge_list(dist.n)) edges.push_back({i + 1, j + 1});
    Json table = Json::array();
    for (std::size_t c = 0; c < dist.probs.size(); ++c) {
      std::string key;
      for (int x : dist.decode(c)) key += std::to_string(x) + (dist.kappa > 10 ? "," : "");
      table.push_back({key, dist.probs[c]});
    }
    r["n"] = dist.n;
    r["kappa"] = dist.kappa;
    r["edges"] = edges;
    r["table"] = table;
  } else if (cfg.mode == "moments") {
    const auto* aff = std::get_if<AffiliationParams>(&params);
    const auto* bin = std::get_if<BinaryBlockParams>(&params);
    need(aff || bin, "moments mode needs binary or affiliation params");
    const auto dist = aff ? exact_distribution(*aff, 4) : exact_distribution(*bin, 4);
    Json exact = Json::object();
    for (Motif m : kAllMotifs) exact[std::string(motif_name(m))] = exact_motif_moment(dist, motif_edges(m));
    r["exact"] = exact;
    if (aff) r["closed_form"] = to_json(theoretical_moments(*aff));
  } else {
    throw Error(ErrorCode::InvalidParams, "--mode must be table or moments");
  }
  emit_json(cfg, r);
  return kOk;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::string tok;
  std::istringstream is(s);
  while (std::getline(is, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

/// Uniform random binary block parameters (generic with probability one).
BinaryBlockParams random_binary(int Q, std::uint64_t seed) {
  Rng gen = make_rng(seed);
  BinaryBlockParams p{std::vector<double>(static_cast<std::size_t>(Q)), Matrix(Q, Q)};
  double total = 0.0;
  for (double& x : p.pi) total += (x = 0.1 + uniform01(gen));
  for (double& x : p.pi) x /= total;
  for (int q = 0; q < Q; ++q)
    for (int l = q; l < Q; ++l) p.P(q, l) = p.P(l, q) = uniform01(gen);
  return p;
}

Json base_case_json(const BaseCaseReport& b) {
  return {{"Q", b.Q},
          {"m", b.m},
          {"rank", b.rank},
          {"rows", b.rows},
          {"cols", b.cols},
          {"full_row_rank", b.full_row_rank},
          {"node_bound", b.node_bound},
          {"meets_node_bound", b.meets_node_bound},
          {"extension_condition", b.extension_condition}};
}

Matrix matrix_from_json(const Json& j) {
  need(j.is_array() && !j.empty() && j[0].is_array(), "matrix must be a non-empty array of rows");
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t r = 0; r < j.size(); ++r) {
    need(j[r].size() == j[0].size(), "matrix rows must have equal length");
    for (std::size_t c = 0; c < j[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
  }
  return m;
}

int cmd_check(const RunConfig& cfg) {
  auto r = report("check");
  r["mode"] = cfg.mode;
  if (cfg.mode == "base-case") {
    need(cfg.n.has_value(), "--n (node count m) is required");
    const int m = *cfg.n;
    if (!cfg.params.empty()) {
      const auto params = read_params(cfg.params);
      const auto rep = std::visit(
          [&](const auto& p) -> BaseCaseReport {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, WeightedParams>)
              throw Error(ErrorCode::InvalidParams, "base-case needs binary, affiliation or finite params");
            else if constexpr (std::is_same_v<P, AffiliationParams>)
              return check_base_case(affiliation_to_block(p), m);
            else
              return check_base_case(p, m);
          },
          params);
      r["result"] = base_case_json(rep);
    } else {
      need(cfg.groups.has_value() && cfg.seed.has_value(), "base-case needs --params, or --groups and --seed");
      check_conditional_size(*cfg.groups, 2, m);
      r["result"] = base_case_json(check_base_case(random_binary(*cfg.groups, *cfg.seed), m));
      r["result"]["random_seed"] = *cfg.seed;
    }
  } else if (cfg.mode == "degrees") {
    if (!cfg.input.empty()) {
      std::ifstream in(cfg.input);
      if (!in) throw Error(ErrorCode::Io, "cannot open " + cfg.input);
      std::vector<int> d;
      std::string tok;
      while (in >> tok) {
        std::istringstream ts(tok);
        std::string part;
        while (std::getline(ts, part, ','))
          if (!part.empty()) d.push_back(std::stoi(part));
      }
      r["result"] = {{"degrees", d}, {"realizable", erdos_gallai(d)}};
    } else {
      need(cfg.groups.has_value() && cfg.n.has_value(), "degrees needs --input, or --groups and --n");
      Json family = Json::array();
      int realizable = 0;
      for (const auto& s : build_degree_family(*cfg.groups, *cfg.n)) {
        family.push_back({{"degrees", s.degrees}, {"realizable", s.realizable}});
        realizable += s.realizable;
      }
      r["result"] = {{"Q", *cfg.groups}, {"m", *cfg.n}, {"size", family.size()}, {"realizable", realizable}, {"family", family}};
    }
  } else if (cfg.mode == "kruskal-rank") {
    need(!cfg.input.empty(), "--input JSON with \"matrix\" or \"matrices\" is required");
    const Json j = read_json_file(cfg.input);
    if (j.contains("matrices")) {
      const auto& ms = j.at("matrices");
      need(ms.size() == 3, "\"matrices\" must hold three factor matrices");
      const auto rep = kruskal_report(matrix_from_json(ms[0]), matrix_from_json(ms[1]), matrix_from_json(ms[2]));
      r["result"] = {{"ranks", {rep.i1, rep.i2, rep.i3}}, {"r", rep.r}, {"condition_met", rep.condition_met}};
    } else {
      const Matrix m = matrix_from_json(detail::field(j, "matrix"));
      r["result"] = {{"kruskal_rank", kruskal_rank(m)}, {"rank", numerical_rank(m)}};
    }
  } else if (cfg.mode == "bins") {
    need(!cfg.params.empty() && !cfg.cuts.empty(), "bins needs --params (weighted) and --cuts");
    const auto params = read_params(cfg.params);
    const auto* w = std::get_if<WeightedParams>(&params);
    need(w != nullptr, "bins needs weighted params");
    const auto f = discretize(*w, parse_list(cfg.cuts));
    const auto ind = check_bin_independence(f);
    r["result"] = {{"binned", to_json(f)}, {"rank", ind.rank}, {"rows", ind.rows}, {"independent", ind.independent}};
  } else {
    throw Error(ErrorCode::InvalidParams, "--mode must be base-case, degrees, kruskal-rank or bins");
  }
  emit_json(cfg, r);
  return kOk;
}

int cmd_recover(const RunConfig& cfg) {
  auto r = report("recover");
  r["mode"] = cfg.mode;
  std::optional<WeightedParams> truth;
  Json input;
  if (!cfg.params.empty()) {
    const auto params = read_params(cfg.params);
    const auto* w = std::get_if<WeightedParams>(&params);
    need(w != nullptr, "recover needs weighted params");
    truth = *w;
  } else {
    need(!cfg.input.empty(), "recover needs --params or --input");
    input = read_json_file(cfg.input);
  }
  if (cfg.mode == "k3") {
    const auto k3 = truth ? expand_k3_mixture(*truth) : mixture_from_json(detail::field(input, "k3"));
    const auto marg = truth ? expand_edge_marginal(*truth) : mixture_from_json(detail::field(input, "marginal"));
    r["result"] = to_json(recover_from_k3(k3, marg));
  } else if (cfg.mode == "affiliation") {
    const auto k3 = truth ? expand_k3_mixture(*truth) : mixture_from_json(detail::field(input, "k3"));
    const auto est = recover_affiliation_weighted(k3);
    Json res{{"alpha", est.alpha}, {"beta", est.beta}, {"theta_in", est.theta_in}, {"theta_out", est.theta_out}};
    std::vector<double> weights;
    int Q = 0;
    if (truth) {
      Q = truth->groups();
      for (int n = 2; n <= Q; ++n) weights.push_back(all_in_weight(expand_kn_mixture(*truth, n), est.theta_in));
    } else if (input.contains("all_in_weights")) {
      weights = detail::number_array(input.at("all_in_weights"), "all_in_weights");
      Q = static_cast<int>(weights.size()) + 1;
    }
    if (Q >= 1) {
      const auto s = extract_power_sums_from_kn(weights, est.alpha);
      res["power_sums"] = s.values;
      res["pi"] = recover_pi_newton(s, Q);
    }
    r["result"] = res;
  } else {
    throw Error(ErrorCode::InvalidParams, "--mode must be k3 or affiliation");
  }
  emit_json(cfg, r);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate, summarize and invert stochastic block models"};
  app.require_subcommand(1);
  RunConfig cfg;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--params", cfg.params, "parameter JSON file");
    sub->add_option("--input", cfg.input, "input file");
    sub->add_option("--out", cfg.out, "output file (default stdout)");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--mode", cfg.mode, "subcommand mode");
    sub->add_option("--n", cfg.n, "node count")->check(CLI::PositiveNumber);
    sub->add_option("--tol", cfg.tol, "tolerance override");
    sub->add_option("--groups", cfg.groups, "group count Q")->check(CLI::PositiveNumber);
  };
  auto* simulate = app.add_subcommand("simulate", "sample a graph");
  add_common(simulate);
  simulate->add_option("--latent", cfg.latent, "also write latent groups here");
  auto* moments = app.add_subcommand("moments", "empirical motif moments (--mode k3|k4)");
  add_common(moments);
  auto* estimate = app.add_subcommand("estimate", "moment estimators (--mode k3-q2|known-pi|uniform-q|general-q)");
  add_common(estimate);
  auto* oracle = app.add_subcommand("oracle", "exact configuration law (--mode table|moments)");
  add_common(oracle);
  auto* check = app.add_subcommand("check", "rank checks (--mode base-case|degrees|kruskal-rank|bins)");
  add_common(check);
  check->add_option("--cuts", cfg.cuts, "comma-separated ascending cutpoints");
  auto* recover = app.add_subcommand("recover", "weighted mixture inversion (--mode k3|affiliation)");
  add_common(recover);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(cfg);
    if (*moments) return cmd_moments(cfg);
    if (*estimate) return cmd_estimate(cfg);
    if (*oracle) return cmd_oracle(cfg);
    if (*check) return cmd_check(cfg);
    if (*recover) return cmd_recover(cfg);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    auto r = report(app.get_subcommands().front()->get_name());
    r["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    const int code = exit_code(e.code());
    if (code != kUsage && code != kIo) {
      try {
        emit_json(cfg, r);
      } catch (const Error&) {
      }
    }
    return code;
  } catch (const Json::exception& e) {
    std::cerr << "error [INVALID_PARAMS]: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
