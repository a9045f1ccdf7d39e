#include <CLI11.hpp>
#include <cmath>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gle/amp.hpp"
#include "gle/coupling.hpp"
#include "gle/instance.hpp"
#include "gle/potential.hpp"
#include "gle/prior.hpp"
#include "gle/report.hpp"
#include "gle/rng.hpp"
#include "gle/state_evolution.hpp"

namespace {

using gle::ChannelParams;
using gle::QuadratureSpec;
using Config = std::map<std::string, std::string>;

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

nlohmann::json json_num(double v) {
  if (std::isinf(v)) return v > 0 ? nlohmann::json("inf") : nlohmann::json("-inf");
  return v;
}

/// "start:stop:count" or a single number.
std::vector<double> parse_range(const std::string& text) {
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) return {std::stod(text)};
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw CLI::ValidationError("range must be start:stop:count");
  const double start = std::stod(text.substr(0, c1));
  const double stop = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
  const int count = std::stoi(text.substr(c2 + 1));
  if (count < 1) throw CLI::ValidationError("range count must be >= 1");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = count == 1 ? start : start + (stop - start) * i / (count - 1);
  return out;
}

struct CouplingArgs {
  int Gamma = 0;
  int w = 0;
  std::string kind = "periodic";
  bool set() const { return Gamma > 0; }
};

/// "Gamma,w,kind"
CouplingArgs parse_coupling(const std::string& text) {
  CouplingArgs args;
  if (text.empty()) return args;
  std::istringstream in(text);
  std::string tok;
  if (!std::getline(in, tok, ',')) throw CLI::ValidationError("bad coupling");
  args.Gamma = std::stoi(tok);
  if (!std::getline(in, tok, ',')) throw CLI::ValidationError("bad coupling");
  args.w = std::stoi(tok);
  if (std::getline(in, tok, ',')) args.kind = tok;
  if (args.kind != "periodic" && args.kind != "seeded")
    throw CLI::ValidationError("coupling kind must be periodic or seeded");
  return args;
}

gle::CouplingKind kind_of(const CouplingArgs& args) {
  return args.kind == "seeded" ? gle::CouplingKind::Seeded
                               : gle::CouplingKind::Periodic;
}

void emit_csv(const std::string& path, const Config& config,
              const std::string& header, const std::string& rows) {
  if (path.empty()) {
    for (const auto& [k, v] : config) std::cout << "# " << k << "=" << v << "\n";
    std::cout << "# content_sha1=" << gle::sha1_hex(header + "\n" + rows)
              << "\n"
              << header << "\n"
              << rows;
  } else {
    gle::write_csv(path, config, header, rows);
  }
}

void emit_json(const std::string& path, const Config& config,
               const nlohmann::json& result) {
  if (path.empty()) {
    nlohmann::json doc;
    doc["config"] = config;
    doc["result"] = result;
    doc["content_sha1"] = gle::sha1_hex(result.dump());
    std::cout << doc.dump(2) << "\n";
  } else {
    gle::write_json(path, config, result);
  }
}

struct GlobalArgs {
  std::uint64_t seed = 1;
  std::string out;
  int quad_nodes = 101;
  int threads = 1;  // reserved; all paths are single-threaded deterministic

  QuadratureSpec quad() const {
    QuadratureSpec q;
    q.gh_nodes = quad_nodes;
    return q;
  }
  Config base_config(const std::string& command) const {
    return {{"command", command},
            {"seed", std::to_string(seed)},
            {"quad_nodes", std::to_string(quad_nodes)}};
  }
};

struct ModelArgs {
  std::string prior = "binary";
  double alpha = 0.5;
  int B = 1;
  double delta = 0.1;

  gle::DiscretePrior make_prior() const { return gle::DiscretePrior::parse(prior); }
  ChannelParams params(const gle::DiscretePrior& p) const {
    return ChannelParams{alpha, p.section_dim(), delta};
  }
  void fill(Config& config) const {
    config["prior"] = prior;
    config["alpha"] = fmt(alpha);
    config["delta"] = fmt(delta);
  }
};

void add_model_options(CLI::App* sub, ModelArgs& model, bool with_delta = true) {
  sub->add_option("--prior", model.prior,
                  "builtin (binary, sparse:<rho>, onehot:<B>) or JSON file");
  sub->add_option("--alpha", model.alpha, "measurement rate M/N");
  if (with_delta) sub->add_option("--delta", model.delta, "noise variance");
}

std::string json_summary_path(const std::string& csv_path) {
  if (csv_path.size() > 4 && csv_path.substr(csv_path.size() - 4) == ".csv")
    return csv_path.substr(0, csv_path.size() - 4) + ".json";
  return csv_path + ".json";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian random linear estimation: AMP, state evolution, "
               "replica potential, spatial coupling"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI config file (sections per subcommand)");

  GlobalArgs global;
  app.add_option("--seed", global.seed, "global RNG seed");
  app.add_option("--out", global.out, "output file (stdout if omitted)");
  app.add_option("--quad-nodes", global.quad_nodes, "Gauss-Hermite nodes");
  app.add_option("--threads", global.threads, "reserved, runs single-threaded");

  // potential-scan
  ModelArgs ps_model;
  std::string ps_delta_range = "0.1";
  int ps_grid = 512;
  auto* ps = app.add_subcommand("potential-scan",
                                "RS potential and derivative on an E grid");
  ps->configurable();
  add_model_options(ps, ps_model, false);
  ps->add_option("--delta", ps_delta_range, "noise variance or start:stop:count");
  ps->add_option("--grid", ps_grid, "E grid size");

  // thresholds
  ModelArgs th_model;
  double th_tol = 1e-6, th_cap = 0.0;
  auto* th = app.add_subcommand("thresholds", "delta_amp and delta_rs");
  th->configurable();
  add_model_options(th, th_model, false);
  th->add_option("--tol", th_tol, "bisection tolerance");
  th->add_option("--delta-cap", th_cap, "search cap (0 = automatic)");

  // se-run
  ModelArgs se_model;
  double se_eps = 1e-12;
  int se_max_iter = 100000;
  auto* se = app.add_subcommand("se-run", "state evolution trajectory");
  se->configurable();
  add_model_options(se, se_model);
  se->add_option("--eps", se_eps, "stopping tolerance");
  se->add_option("--max-iter", se_max_iter);

  // coupled-se
  ModelArgs cse_model;
  std::string cse_coupling = "9,1,seeded";
  double cse_eps = -1.0;
  int cse_max_iter = 100000;
  bool cse_allow_even = false;
  auto* cse = app.add_subcommand("coupled-se", "coupled SE block trajectory");
  cse->configurable();
  add_model_options(cse, cse_model);
  cse->add_option("--coupling", cse_coupling, "Gamma,w,kind");
  cse->add_option("--eps", cse_eps, "stopping tolerance (<0 = automatic)");
  cse->add_option("--max-iter", cse_max_iter);
  cse->add_flag("--allow-even-gamma", cse_allow_even,
                "nonconforming, tiny verification runs only");

  // saturation-sweep
  ModelArgs sat_model;
  int sat_Gamma = 64;
  std::vector<int> sat_w = {1, 2, 4};
  double sat_tol = 1e-4, sat_cap = 0.0;
  bool sat_allow_even = false;
  auto* sat = app.add_subcommand("saturation-sweep",
                                 "coupled threshold vs coupling window");
  sat->configurable();
  add_model_options(sat, sat_model, false);
  sat->add_option("--Gamma", sat_Gamma);
  sat->add_option("--w", sat_w, "coupling windows")->expected(-1);
  sat->add_option("--tol", sat_tol, "bisection tolerance");
  sat->add_option("--delta-cap", sat_cap, "search cap (0 = automatic)");
  sat->add_flag("--allow-even-gamma", sat_allow_even,
                "nonconforming, tiny verification runs only");

  // amp-run
  ModelArgs amp_model;
  int amp_L = 1000, amp_T = 50;
  std::string amp_coupling;
  bool amp_allow_even = false;
  auto* ar = app.add_subcommand("amp-run", "AMP on a sampled instance");
  ar->configurable();
  add_model_options(ar, amp_model);
  ar->add_option("--L", amp_L, "number of sections");
  ar->add_option("--T", amp_T, "max iterations");
  ar->add_option("--coupling", amp_coupling, "Gamma,w,kind (optional)");
  ar->add_flag("--allow-even-gamma", amp_allow_even,
               "nonconforming, tiny verification runs only");

  // phase-diagram
  ModelArgs pd_model;
  std::string pd_alpha_range = "0.15:0.35:20";
  double pd_tol = 1e-6, pd_cap = 0.0;
  auto* pd = app.add_subcommand("phase-diagram", "thresholds over an alpha range");
  pd->configurable();
  pd->add_option("--prior", pd_model.prior);
  pd->add_option("--alpha", pd_alpha_range, "start:stop:count");
  pd->add_option("--tol", pd_tol);
  pd->add_option("--delta-cap", pd_cap);

  // verify
  auto* verify = app.add_subcommand("verify", "finite-size identity checks");
  verify->require_subcommand(1);
  verify->fallthrough();
  ModelArgs vf_model;
  vf_model.alpha = 0.6;
  vf_model.delta = 0.5;
  int vf_L = 4, vf_n_inst = 2000;
  double vf_h = 0.05, vf_slack = 0.05;
  int vf_Gamma = 3, vf_w = 1;
  std::vector<int> vf_Ls = {2, 4, 6, 8};
  add_model_options(verify, vf_model);
  verify->add_option("--L", vf_L, "sections per instance");
  verify->add_option("--n-inst", vf_n_inst, "Monte Carlo instances");
  verify->add_option("--h-step", vf_h, "finite-difference step (immse)");
  verify->add_option("--slack", vf_slack, "absolute slack");
  verify->add_option("--Gamma", vf_Gamma, "coupled chain length (sc-invariance)");
  verify->add_option("--w", vf_w, "coupling window (sc-invariance)");
  verify->add_option("--Ls", vf_Ls, "section counts (fe-spread)")->expected(-1);
  bool vf_allow_even = false;
  verify->add_flag("--allow-even-gamma", vf_allow_even);
  auto* v_nish = verify->add_subcommand("nishimori");
  auto* v_immse = verify->add_subcommand("immse");
  auto* v_mmse = verify->add_subcommand("mmse-relation");
  auto* v_replica = verify->add_subcommand("replica");
  auto* v_sc = verify->add_subcommand("sc-invariance");
  auto* v_fe = verify->add_subcommand("fe-spread");
  for (auto* s : {v_nish, v_immse, v_mmse, v_replica, v_sc, v_fe})
    s->configurable();

  CLI11_PARSE(app, argc, argv);

  const QuadratureSpec quad = global.quad();
  gle::Rng root(global.seed);

  try {
    if (*ps) {
      auto prior = ps_model.make_prior();
      Config config = global.base_config("potential-scan");
      ps_model.fill(config);
      config["delta"] = ps_delta_range;
      config["grid"] = std::to_string(ps_grid);
      std::string rows;
      for (double delta : parse_range(ps_delta_range)) {
        ChannelParams params{ps_model.alpha, prior.section_dim(), delta};
        auto curve = gle::scan_potential(prior, params, quad, ps_grid);
        for (size_t i = 0; i < curve.E_grid.size(); ++i)
          rows += fmt(delta) + "," + fmt(curve.E_grid[i]) + "," +
                  fmt(curve.values[i]) + "," + fmt(curve.derivative[i]) + "\n";
      }
      emit_csv(global.out, config, "delta,E,i_rs,di_rs_dE", rows);
    } else if (*th) {
      auto prior = th_model.make_prior();
      ChannelParams params = th_model.params(prior);
      Config config = global.base_config("thresholds");
      th_model.fill(config);
      config.erase("delta");
      config["tol"] = fmt(th_tol);
      auto t = gle::compute_thresholds(prior, params, quad, th_tol, th_cap);
      nlohmann::json result = {{"delta_amp", json_num(t.delta_amp)},
                               {"delta_rs", json_num(t.delta_rs)},
                               {"tol", t.tol},
                               {"cap_hit", t.cap_hit}};
      emit_json(global.out, config, result);
    } else if (*se) {
      auto prior = se_model.make_prior();
      ChannelParams params = se_model.params(prior);
      Config config = global.base_config("se-run");
      se_model.fill(config);
      auto traj = gle::run_se(prior, params, quad, se_eps, se_max_iter);
      std::string rows;
      for (size_t t = 0; t < traj.values.size(); ++t)
        rows += std::to_string(t) + "," + fmt(traj.values[t]) + "\n";
      emit_csv(global.out, config, "t,E", rows);
    } else if (*cse) {
      auto prior = cse_model.make_prior();
      ChannelParams params = cse_model.params(prior);
      auto args = parse_coupling(cse_coupling);
      auto spec =
          gle::build_coupling(args.Gamma, args.w, kind_of(args), cse_allow_even);
      Config config = global.base_config("coupled-se");
      cse_model.fill(config);
      config["coupling"] = cse_coupling;
      if (cse_allow_even && args.Gamma % 2 == 0)
        config["nonconforming"] = "even_Gamma";
      double eps = cse_eps < 0 ? 1e-10 * prior.second_moment() : cse_eps;
      auto profile = gle::initial_profile(spec, prior.second_moment());
      std::string rows;
      auto record = [&](int t, const gle::CoupledProfile& p) {
        for (int r = 0; r < spec.Gamma; ++r)
          rows += std::to_string(t) + "," + std::to_string(r) + "," +
                  fmt(p.E[r]) + "\n";
      };
      record(0, profile);
      for (int t = 1; t <= cse_max_iter; ++t) {
        auto next = gle::coupled_se_step(profile, spec, prior, params, quad);
        const double change = (next.E - profile.E).cwiseAbs().maxCoeff();
        profile = std::move(next);
        record(t, profile);
        if (change < eps) break;
      }
      emit_csv(global.out, config, "t,block,E", rows);
    } else if (*sat) {
      auto prior = sat_model.make_prior();
      ChannelParams params = sat_model.params(prior);
      Config config = global.base_config("saturation-sweep");
      sat_model.fill(config);
      config.erase("delta");
      config["Gamma"] = std::to_string(sat_Gamma);
      if (sat_allow_even && sat_Gamma % 2 == 0)
        config["nonconforming"] = "even_Gamma";
      nlohmann::json result = nlohmann::json::array();
      for (int w : sat_w) {
        const double d = gle::delta_amp_coupled(prior, params, sat_Gamma, w,
                                                quad, sat_tol, sat_cap, -1.0,
                                                -1.0, 100000, sat_allow_even);
        result.push_back({{"Gamma", sat_Gamma},
                          {"w", w},
                          {"delta_amp_coupled", json_num(d)}});
      }
      emit_json(global.out, config, result);
    } else if (*ar) {
      auto prior = amp_model.make_prior();
      ChannelParams params = amp_model.params(prior);
      Config config = global.base_config("amp-run");
      amp_model.fill(config);
      config["L"] = std::to_string(amp_L);
      config["T"] = std::to_string(amp_T);
      std::optional<gle::CouplingSpec> coupling;
      if (!amp_coupling.empty()) {
        auto args = parse_coupling(amp_coupling);
        coupling = gle::build_coupling(args.Gamma, args.w, kind_of(args),
                                       amp_allow_even);
        config["coupling"] = amp_coupling;
        if (amp_allow_even && args.Gamma % 2 == 0)
          config["nonconforming"] = "even_Gamma";
      }
      gle::Rng rng = root.derive("amp-run");
      auto instance = gle::generate_instance(prior, amp_L, params, coupling, rng);
      if (coupling && coupling->kind == gle::CouplingKind::Seeded)
        instance = gle::apply_seed(instance, *coupling);
      auto state = gle::run_amp(instance, prior, amp_T, -1.0, quad);
      std::string rows;
      for (size_t t = 0; t < state.mse_trace.size(); ++t)
        rows += std::to_string(t) + "," + fmt(state.mse_trace[t]) + "," +
                fmt(state.ymse_trace[t]) + "\n";
      emit_csv(global.out, config, "t,mse,ymse", rows);
      auto fp = gle::amp_fixedpoint_identity(state, instance);
      nlohmann::json summary = {{"final_mse", fp.mse},
                                {"final_ymse", fp.ymse},
                                {"identity_gap", fp.identity_gap},
                                {"converged", !state.diverged}};
      emit_json(global.out.empty() ? "" : json_summary_path(global.out), config,
                summary);
    } else if (*pd) {
      auto prior = pd_model.make_prior();
      Config config = global.base_config("phase-diagram");
      config["prior"] = pd_model.prior;
      config["alpha"] = pd_alpha_range;
      config["tol"] = fmt(pd_tol);
      std::string rows;
      for (double alpha : parse_range(pd_alpha_range)) {
        ChannelParams params{alpha, prior.section_dim(), 0.0};
        auto t = gle::compute_thresholds(prior, params, quad, pd_tol, pd_cap);
        rows += fmt(alpha) + "," + fmt(t.delta_amp) + "," + fmt(t.delta_rs) + "\n";
      }
      emit_csv(global.out, config, "alpha,delta_amp,delta_rs", rows);
    } else if (*verify) {
      auto prior = vf_model.make_prior();
      ChannelParams params = vf_model.params(prior);
      gle::Rng rng = root.derive("verify");
      Config config = global.base_config("verify");
      vf_model.fill(config);
      config["L"] = std::to_string(vf_L);
      config["n_inst"] = std::to_string(vf_n_inst);
      nlohmann::json result;
      if (*v_nish) {
        config["command"] = "verify nishimori";
        auto rep = gle::nishimori_check(prior, vf_L, params, vf_n_inst, rng);
        result = {{"statistic", rep.overlap_gap.value},
                  {"stderr", rep.overlap_gap.stderr},
                  {"tolerance", 3.0 * rep.overlap_gap.stderr},
                  {"pass", rep.pass},
                  {"second_moment_gap", rep.second_moment_gap.value},
                  {"second_moment_stderr", rep.second_moment_gap.stderr}};
      } else if (*v_immse) {
        config["command"] = "verify immse";
        config["h"] = fmt(vf_h);
        auto rep = gle::immse_check(prior, vf_L, params, vf_n_inst, vf_h, rng);
        result = {{"statistic", rep.gap.value},
                  {"stderr", rep.gap.stderr},
                  {"tolerance", 3.0 * rep.gap.stderr + rep.slack},
                  {"pass", rep.pass},
                  {"fd_derivative", rep.fd_derivative},
                  {"rhs", rep.rhs}};
      } else if (*v_mmse) {
        config["command"] = "verify mmse-relation";
        auto rep = gle::mmse_relation_check(prior, vf_L, params, vf_n_inst, rng,
                                            vf_slack);
        result = {{"statistic", rep.identity_gap},
                  {"stderr", rep.estimates.mmse.stderr},
                  {"tolerance", rep.tolerance},
                  {"pass", rep.pass},
                  {"mmse", rep.estimates.mmse.value},
                  {"ymmse", rep.estimates.ymmse.value}};
      } else if (*v_replica) {
        config["command"] = "verify replica";
        auto mi = gle::mc_mutual_information(prior, vf_L, params, std::nullopt,
                                             vf_n_inst, rng);
        auto stat = gle::stationary_points(prior, params, quad);
        const double gap = mi.value - stat.global_min_value;
        result = {{"statistic", gap},
                  {"stderr", mi.stderr},
                  {"tolerance", vf_slack},
                  {"pass", gap <= vf_slack},
                  {"mc_mi", mi.value},
                  {"rs_mi", stat.global_min_value}};
      } else if (*v_sc) {
        config["command"] = "verify sc-invariance";
        config["Gamma"] = std::to_string(vf_Gamma);
        config["w"] = std::to_string(vf_w);
        auto rep = gle::sc_mi_invariance_check(prior, vf_L, params, vf_Gamma,
                                               vf_w, vf_n_inst, rng, vf_slack,
                                               vf_allow_even);
        result = {{"statistic", rep.diff},
                  {"stderr", rep.mi_coupled.stderr},
                  {"tolerance", rep.tolerance},
                  {"pass", rep.pass},
                  {"mi_homogeneous", rep.mi_homogeneous.value},
                  {"mi_coupled", rep.mi_coupled.value}};
      } else if (*v_fe) {
        config["command"] = "verify fe-spread";
        auto rep = gle::free_energy_spread(prior, vf_Ls, params, vf_n_inst, rng);
        result = {{"statistic", rep.spread.back()},
                  {"stderr", 0.0},
                  {"tolerance", 1.2 * rep.spread.front()},
                  {"pass", rep.pass},
                  {"spread", rep.spread}};
        nlohmann::json ls = rep.Ls;
        result["Ls"] = ls;
      }
      emit_json(global.out, config, result);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
