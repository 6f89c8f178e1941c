// Command-line laboratory for the local-popularity recommender: single-point
// simulation, regime sweeps, closed-form theory values, the tiny-instance
// enumeration oracle, and Movielens-format evaluation. All randomness flows
// from --seed; records are CSV or JSON and round-trip byte-exactly.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "localpop/localpop.hpp"

namespace {

using namespace localpop;

void emit(const std::string& text, const std::string& output) {
  if (output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + output);
  out << text;
}

TiePolicy make_tie(const std::string& name, std::uint64_t master) {
  if (name == "random") return RandomSeeded{master};
  if (name == "expected") return ExpectedOverTies{};
  return LowestIndex{};
}

std::vector<GridEntry> preset_grid(const std::string& name) {
  auto mk = [](std::int64_t k, std::int64_t r, double alpha, double c, double p) {
    GridEntry e;
    e.k = k;
    e.r = r;
    e.alpha = alpha;
    e.c = c;
    e.p = p;
    e.t_rule = TRule::EqualsK();
    return e;
  };
  if (name == "large-cluster" || name == "purity")
    return {mk(8, 64, 0.25, 2.0, 0.1), mk(12, 128, 0.25, 2.0, 0.1),
            mk(16, 256, 0.25, 2.0, 0.1), mk(24, 512, 0.25, 2.0, 0.1)};
  if (name == "small-cluster")
    return {mk(4, 250, 0.45, 2.0, 0.3), mk(5, 400, 0.45, 2.0, 0.3),
            mk(6, 833, 0.45, 2.0, 0.3), mk(7, 1428, 0.45, 2.0, 0.3)};
  if (name == "supercritical")
    return {mk(4, 250, 0.6, 2.0, 0.1), mk(5, 400, 0.6, 2.0, 0.1),
            mk(6, 833, 0.6, 2.0, 0.1), mk(7, 1428, 0.6, 2.0, 0.1)};
  throw std::invalid_argument("unknown preset: " + name);
}

std::int64_t parse_whole_int(const std::string& s, const char* what) {
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (...) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw std::invalid_argument(std::string(what) + " has a non-numeric field \"" + s + "\"");
  return v;
}

double parse_whole_double(const std::string& s, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (...) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw std::invalid_argument(std::string(what) + " has a non-numeric field \"" + s + "\"");
  return v;
}

GridEntry parse_point(const std::string& spec) {
  std::vector<std::string> f;
  std::string cur;
  for (char ch : spec) {
    if (ch == ',') {
      f.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  f.push_back(cur);
  if (f.size() != 6)
    throw std::invalid_argument("--point needs k,r,alpha,c,p,T (got \"" + spec + "\")");
  GridEntry e;
  e.k = parse_whole_int(f[0], "--point");
  e.r = parse_whole_int(f[1], "--point");
  e.alpha = parse_whole_double(f[2], "--point");
  e.c = parse_whole_double(f[3], "--point");
  e.p = parse_whole_double(f[4], "--point");
  e.t_rule = (f[5] == "k") ? TRule::EqualsK() : TRule::Fixed(parse_whole_int(f[5], "--point"));
  return e;
}

std::int64_t resolve_t(const std::string& t_spec, std::int64_t k) {
  if (t_spec == "k") return k;
  return parse_whole_int(t_spec, "--T");
}

ojson bound_to_json(const BoundReport& rep) {
  ojson j;
  j["value"] = rep.value;
  j["log_value"] = rep.log_value;
  j["vacuous"] = rep.vacuous;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"local-popularity recommender laboratory"};
  app.require_subcommand(1);

  // shared option storage
  std::uint64_t seed = 0;
  std::int64_t trials = 1000;
  int threads = 1;
  double confidence = 0.95;
  std::string tie_name = "lowest";
  std::string format = "csv";
  std::string output;

  auto add_run_flags = [&](CLI::App* sc) {
    sc->add_option("--seed", seed, "master RNG seed")->capture_default_str();
    sc->add_option("--trials", trials, "Monte Carlo trials per point")
        ->capture_default_str();
    sc->add_option("--threads", threads, "worker threads (output independent of it)")
        ->capture_default_str();
    sc->add_option("--confidence", confidence, "Wilson interval confidence level")
        ->capture_default_str();
    sc->add_option("--tie", tie_name, "tie policy: lowest, random, expected")
        ->capture_default_str()
        ->check(CLI::IsMember({"lowest", "random", "expected"}));
    sc->add_option("--format", format, "output format")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json"}));
    sc->add_option("--output", output, "write records to this file instead of stdout");
  };

  // ---- simulate -----------------------------------------------------------
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo BER at one parameter point");
  std::int64_t sim_n = 0, sim_k = 0, sim_r = 0;
  double sim_p = 0.0, sim_eps = 0.0, sim_alpha = 0.0, sim_c = 1.0;
  std::string sim_t = "1";
  bool sim_freeze = false, sim_dump = false, sim_dump_trace = false;
  sim->add_option("--n", sim_n, "matrix side length")->required();
  sim->add_option("--k", sim_k, "cluster side length (give --k or --r)");
  sim->add_option("--r", sim_r, "number of blocks per side");
  sim->add_option("--p", sim_p, "flip probability in [0, 1/2)")->capture_default_str();
  auto* sim_eps_opt =
      sim->add_option("--epsilon", sim_eps, "erasure probability in [0, 1)")
          ->capture_default_str();
  auto* sim_alpha_opt =
      sim->add_option("--alpha", sim_alpha, "erasure exponent: epsilon = 1 - c*n^-alpha")
          ->capture_default_str();
  auto* sim_c_opt =
      sim->add_option("--c", sim_c, "erasure constant for --alpha")->capture_default_str();
  sim_eps_opt->excludes(sim_alpha_opt);
  sim_eps_opt->excludes(sim_c_opt);
  sim->add_option("--T", sim_t, "neighborhood size, an integer or \"k\"")
      ->capture_default_str();
  sim->add_flag("--freeze-truth", sim_freeze,
                "condition on one sampled truth instead of resampling per trial");
  sim->add_flag("--dump", sim_dump, "print trial-0 truth and observation JSON to stderr");
  sim->add_flag("--dump-trace", sim_dump_trace,
                "print the trial-0 recommendation trace JSON to stderr");
  add_run_flags(sim);

  // ---- sweep -----------------------------------------------------------------
  CLI::App* swp = app.add_subcommand("sweep", "Monte Carlo BER over a parameter grid");
  std::string preset;
  std::vector<std::string> point_specs;
  swp->add_option("--preset", preset,
                  "named grid: large-cluster, small-cluster, supercritical, purity")
      ->check(CLI::IsMember({"large-cluster", "small-cluster", "supercritical", "purity"}));
  swp->add_option("--point", point_specs,
                  "extra grid point \"k,r,alpha,c,p,T\" (T an integer or \"k\"); repeatable");
  add_run_flags(swp);

  // ---- theory -----------------------------------------------------------------
  CLI::App* thy = app.add_subcommand("theory", "closed-form quantities as JSON");
  std::int64_t th_n = 0, th_k = 0, th_r = 0, th_ones = 0, th_zeros = 0, th_threshold = 0;
  int th_truth = 1;
  double th_p = 0.0, th_eps = 0.0, th_delta = 0.0, th_gamma = 0.0, th_t = 0.0;
  auto* o_n = thy->add_option("--n", th_n, "matrix side length");
  auto* o_k = thy->add_option("--k", th_k, "cluster side length");
  auto* o_r = thy->add_option("--r", th_r, "number of blocks per side");
  auto* o_p = thy->add_option("--p", th_p, "flip probability");
  auto* o_eps = thy->add_option("--epsilon", th_eps, "erasure probability");
  auto* o_delta = thy->add_option("--delta", th_delta, "concentration margin in (0, 1)");
  auto* o_gamma = thy->add_option("--gamma", th_gamma, "regime exponent alpha - ln k/ln n");
  auto* o_ones = thy->add_option("--ones", th_ones, "observed ones in the column vote");
  auto* o_zeros = thy->add_option("--zeros", th_zeros, "observed zeros in the column vote");
  auto* o_truth = thy->add_option("--truth", th_truth, "conditioning truth bit");
  auto* o_t = thy->add_option("--t", th_t, "normal tail abscissa");
  auto* o_thr = thy->add_option("--threshold", th_threshold, "binomial tail threshold");
  bool w_pg = false, w_pb = false, w_cg = false, w_cb = false, w_sep = false, w_lb = false,
       w_post = false, w_p0 = false, w_mom = false, w_qt = false, w_bt = false;
  thy->add_flag("--pg", w_pg, "good-pair match probability")->needs(o_eps)->needs(o_p);
  thy->add_flag("--pb", w_pb, "bad-pair match probability")->needs(o_eps);
  thy->add_flag("--chernoff-good", w_cg, "good-row concentration bound p1")
      ->needs(o_n)
      ->needs(o_k)
      ->needs(o_eps)
      ->needs(o_p)
      ->needs(o_delta);
  thy->add_flag("--chernoff-bad", w_cb, "bad-row concentration bound p2")
      ->needs(o_n)
      ->needs(o_k)
      ->needs(o_r)
      ->needs(o_eps)
      ->needs(o_delta);
  thy->add_flag("--separation-delta", w_sep, "largest grid margin separating p_g from p_b")
      ->needs(o_eps)
      ->needs(o_p);
  thy->add_flag("--lower-bound", w_lb, "small-cluster BER lower bound")
      ->needs(o_p)
      ->needs(o_gamma);
  thy->add_flag("--posterior", w_post, "posterior error of the majority vote")
      ->needs(o_ones)
      ->needs(o_zeros)
      ->needs(o_p);
  thy->add_flag("--p0", w_p0, "probability an unerased non-One entry reads Zero")
      ->needs(o_p)
      ->needs(o_eps)
      ->needs(o_truth);
  thy->add_flag("--moments", w_mom, "mean and sd of ones in a truth-1 column")
      ->needs(o_k)
      ->needs(o_eps)
      ->needs(o_p);
  thy->add_flag("--q-tail", w_qt, "standard normal upper tail Q(t)")->needs(o_t);
  thy->add_flag("--binom-tail", w_bt, "binomial upper tail Pr[X > threshold]")
      ->needs(o_n)
      ->needs(o_p)
      ->needs(o_thr);
  thy->add_option("--output", output, "write records to this file instead of stdout");

  // ---- oracle -------------------------------------------------------------------
  CLI::App* orc = app.add_subcommand(
      "oracle", "exact BER by full enumeration (n <= 3), averaged over block values");
  std::int64_t or_n = 0, or_k = 0, or_r = 0, or_t = 1;
  double or_p = 0.0, or_eps = 0.0;
  orc->add_option("--n", or_n, "matrix side length, at most 3")->required();
  orc->add_option("--k", or_k, "cluster side length")->required();
  orc->add_option("--r", or_r, "number of blocks per side")->required();
  orc->add_option("--p", or_p, "flip probability")->capture_default_str();
  orc->add_option("--epsilon", or_eps, "erasure probability")->capture_default_str();
  orc->add_option("--T", or_t, "neighborhood size")->capture_default_str();
  orc->add_option("--output", output, "write records to this file instead of stdout");

  // ---- movielens -----------------------------------------------------------------
  CLI::App* mlr = app.add_subcommand("movielens", "split and evaluate a ratings file");
  std::string ml_data;
  double ml_fraction = 0.2;
  std::vector<std::int64_t> ml_ts{10};
  mlr->add_option("--data", ml_data, "ratings file in ml-100k u.data format")->required();
  mlr->add_option("--test-fraction", ml_fraction, "held-out fraction of rated pairs")
      ->capture_default_str();
  mlr->add_option("--T", ml_ts, "neighborhood sizes to evaluate; repeatable")
      ->capture_default_str();
  mlr->add_option("--seed", seed, "master RNG seed")->capture_default_str();
  mlr->add_option("--tie", tie_name, "tie policy: lowest, random, expected")
      ->capture_default_str()
      ->check(CLI::IsMember({"lowest", "random", "expected"}));
  mlr->add_option("--format", format, "output format")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));
  mlr->add_option("--output", output, "write records to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) {
      if (sim_n < 1) throw std::invalid_argument("simulate: n >= 1 violated");
      if (sim_k >= 1 && sim_r >= 1) {
        if (sim_n != sim_k * sim_r) throw std::invalid_argument("simulate: n = r*k violated");
      } else if (sim_k >= 1) {
        if (sim_n % sim_k != 0) throw std::invalid_argument("simulate: n = r*k violated");
        sim_r = sim_n / sim_k;
      } else if (sim_r >= 1) {
        if (sim_n % sim_r != 0) throw std::invalid_argument("simulate: n = r*k violated");
        sim_k = sim_n / sim_r;
      } else {
        throw std::invalid_argument("simulate: give --k or --r");
      }
      SweepPoint pt;
      pt.n = sim_n;
      pt.k = sim_k;
      pt.r = sim_r;
      pt.p = sim_p;
      if (sim_alpha_opt->count() || sim_c_opt->count()) {
        pt.alpha = sim_alpha;
        pt.c = sim_c;
        pt.epsilon = derive_erasure(ScalingRegime(sim_alpha, sim_c), sim_n);
      } else {
        // record a direct erasure as the equivalent flat regime (alpha = 0)
        pt.alpha = 0.0;
        pt.c = 1.0 - sim_eps;
        pt.epsilon = sim_eps;
      }
      pt.gamma = gamma_at(pt.alpha, pt.k, pt.n);
      pt.T = resolve_t(sim_t, sim_k);
      pt.status = "ok";
      pt.lower_bound =
          (pt.gamma > 0.0 && pt.p < 0.5) ? theorem1_lower_bound(pt.p, pt.gamma) : 0.0;

      ModelParams params(pt.n, pt.k, pt.r, pt.p, pt.epsilon);
      if (sim_dump || sim_dump_trace) {
        auto [gt, obs] = generate_instance(params, Seed{seed, 0});
        if (sim_dump) {
          ojson j;
          j["truth"] = truth_to_json(gt);
          j["observation"] = observation_to_json(obs);
          std::cerr << j.dump(2) << "\n";
        }
        if (sim_dump_trace) {
          TiePolicy trace_tie = make_tie(tie_name == "expected" ? "lowest" : tie_name, seed);
          auto tr = recommend(obs, 0, pt.T, trace_tie);
          if (tr) {
            tr->purity = purity(gt, tr->target, tr->top_set);
            std::cerr << trace_to_json(*tr).dump(2) << "\n";
          } else {
            RecommendationTrace empty;
            empty.target = 0;
            std::cerr << trace_to_json(empty, false).dump(2) << "\n";
          }
        }
      }
      RunSettings rs;
      rs.trials = trials;
      rs.seed = Seed{seed, 0};
      rs.tie = make_tie(tie_name, seed);
      rs.confidence = confidence;
      rs.threads = threads;
      rs.freeze_truth = sim_freeze;
      pt.stats = run_point(params, pt.T, rs);
      std::vector<SweepPoint> one{pt};
      emit(format == "json" ? sweep_point_to_json(pt, seed).dump(2) + "\n"
                            : sweep_csv(one, seed),
           output);
      return 0;
    }

    if (swp->parsed()) {
      std::vector<GridEntry> grid;
      if (!preset.empty()) grid = preset_grid(preset);
      for (const auto& spec : point_specs) grid.push_back(parse_point(spec));
      if (grid.empty())
        throw std::invalid_argument("sweep: give --preset and/or at least one --point");
      auto points =
          sweep(grid, trials, Seed{seed, 0}, make_tie(tie_name, seed), confidence, threads);
      emit(format == "json" ? sweep_to_json(points, seed).dump(2) + "\n"
                            : sweep_csv(points, seed),
           output);
      for (const auto& pt : points)
        if (pt.status != "ok") return 2;
      return 0;
    }

    if (thy->parsed()) {
      ojson j;
      if (w_pg) j["pg"] = p_good(th_eps, th_p);
      if (w_pb) j["pb"] = p_bad(th_eps);
      if (w_cg) j["chernoff_good"] = bound_to_json(chernoff_good(th_n, th_k, th_eps, th_p, th_delta));
      if (w_cb) j["chernoff_bad"] = bound_to_json(chernoff_bad(th_n, th_k, th_r, th_eps, th_delta));
      if (w_sep) j["separation_delta"] = separation_delta(th_eps, th_p);
      if (w_lb) j["lower_bound"] = theorem1_lower_bound(th_p, th_gamma);
      if (w_post) j["posterior"] = posterior_error(th_ones, th_zeros, th_p);
      if (w_p0) j["p0"] = p_zero_given_truth(th_p, th_eps, th_truth);
      if (w_mom) {
        ColumnMoments m = column_ones_moments(th_k, th_eps, th_p);
        j["mu"] = m.mu;
        j["sigma"] = m.sigma;
      }
      if (w_qt) j["q_tail"] = q_tail(th_t);
      if (w_bt) j["binom_tail"] = binomial_tail(th_n, th_p, th_threshold);
      if (j.empty())
        throw std::invalid_argument(
            "theory: no quantity requested (give --pg, --lower-bound, ...)");
      emit(j.dump(2) + "\n", output);
      return 0;
    }

    if (orc->parsed()) {
      ModelParams params(or_n, or_k, or_r, or_p, or_eps);
      ExactResult res = exact_ber_unconditional_detail(params, or_t);
      ojson j;
      j["pe"] = res.pe;
      j["err_mass"] = res.err_mass;
      j["skip_mass"] = res.skip_mass;
      j["total_mass"] = res.total_mass;
      emit(j.dump(2) + "\n", output);
      return 0;
    }

    if (mlr->parsed()) {
      RatingsTable table = load_ml100k(ml_data);
      SplitResult sp = split(table, ml_fraction, Seed{seed, 0});
      TiePolicy tie = make_tie(tie_name, seed);
      std::vector<EvalReport> reps;
      reps.reserve(ml_ts.size());
      for (std::int64_t T : ml_ts) {
        EvalReport rep = evaluate(sp.train, sp.test, T, tie);
        rep.seed = Seed{seed, 0};
        reps.push_back(rep);
      }
      std::string text;
      if (format == "json") {
        ojson arr = ojson::array();
        for (const auto& rep : reps) arr.push_back(eval_report_to_json(rep));
        text = arr.dump(2) + "\n";
      } else {
        text = kEvalCsvHeader;
        text += '\n';
        for (const auto& rep : reps) {
          text += eval_csv_row(rep);
          text += '\n';
        }
      }
      emit(text, output);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
