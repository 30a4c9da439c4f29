// Command-line driver: train an encoder, run unlearning methods against
// it, and tabulate sharding/slicing retraining costs. All artifacts are
// deterministic functions of (config, seed); wall-clock timings go to the
// JSON reports and stderr, and enter the results CSV only with
// --measure-rt (which trades away byte-reproducibility of that column).

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "manif/manif.hpp"

namespace fs = std::filesystem;
using namespace manif;

namespace {

std::string csv_join(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += fields[i];
  }
  line += '\n';
  return line;
}

void append_csv(const std::string& path, const std::string& header,
                const std::string& rows) {
  bool fresh = !fs::exists(path);
  std::ofstream f(path, std::ios::binary | std::ios::app);
  if (!f) throw FormatError(FormatError::Code::truncated, "cannot write " + path);
  if (fresh) f << header;
  f << rows;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
};

ExperimentConfig load_config(const CommonArgs& a) {
  ExperimentConfig cfg = experiment_from_json(load_json_file(a.config_path));
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  if (a.seed_override) cfg.seed = *a.seed_override;
  return cfg;
}

int cmd_train(const CommonArgs& a) {
  ExperimentConfig cfg = load_config(a);
  fs::create_directories(cfg.out_dir);
  Dataset data = build_train_dataset(cfg);
  data.validate();
  std::fprintf(stderr, "[train] %zu samples, dim %d, %d classes\n",
               data.size(), data.dim(), data.class_count);
  std::vector<double> trace;
  ParamVector theta_o = run_train(cfg, data, &trace);
  save_params(cfg.out_dir + "/theta_o.bin", theta_o);
  write_text_file(cfg.out_dir + "/encoder.json", to_json(cfg.encoder).dump(2) + "\n");
  std::string csv = "epoch,loss\n";
  for (std::size_t e = 0; e < trace.size(); ++e)
    csv += csv_join({std::to_string(e + 1), fmt_double(trace[e])});
  write_text_file(cfg.out_dir + "/train_trace.csv", csv);
  if (cfg.encoder.head)
    std::fprintf(stderr, "[train] final training accuracy %.4f\n",
                 accuracy(cfg.encoder, theta_o, data));
  std::fprintf(stderr, "[train] wrote %s/theta_o.bin\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_unlearn(const CommonArgs& a, const std::string& method_name,
                bool measure_rt) {
  ExperimentConfig cfg = load_config(a);
  Method method = method_from_string(method_name);
  fs::create_directories(cfg.out_dir);
  std::string theta_path = cfg.out_dir + "/theta_o.bin";
  if (!fs::exists(theta_path))
    throw ConfigError("missing " + theta_path + "; run the train command first");
  ParamVector theta_o = load_params(theta_path);
  Dataset data = build_train_dataset(cfg);
  Dataset test_data = build_test_dataset(cfg);

  std::string rows;
  for (int uss : cfg.uss) {
    UnlearnSplit split = build_split(cfg, data, theta_o, uss);
    write_text_file(cfg.out_dir + "/split_uss" + std::to_string(uss) + ".json",
                    to_json(split).dump(2) + "\n");
    MethodResult res =
        run_unlearn_method(cfg, method, data, test_data, theta_o, uss, split);

    std::string stem = std::string(to_string(method)) + "_uss" + std::to_string(uss);
    save_params(cfg.out_dir + "/theta_" + stem + ".bin", res.theta);
    if (res.report) {
      if (!measure_rt) res.report->rt_seconds = 0.0;  // keep artifacts reproducible
      write_text_file(cfg.out_dir + "/report_" + stem + ".json",
                      to_json(*res.report).dump(2) + "\n");
      std::string trace = "epoch,triplet_loss,path_loss,mean_margin\n";
      for (std::size_t e = 0; e < res.report->triplet_trace.size(); ++e)
        trace += csv_join({std::to_string(e + 1),
                           fmt_double(res.report->triplet_trace[e]),
                           fmt_double(res.report->path_trace[e]),
                           fmt_double(res.report->margin_trace[e])});
      write_text_file(cfg.out_dir + "/trace_" + stem + ".csv", trace);
    }

    std::string margin_mode =
        method == Method::manif_smc || method == Method::finetune_after
            ? "adaptive"
            : (method == Method::manif_fixed ? "fixed" : "-");
    rows += csv_join({to_string(method), std::to_string(uss),
                      std::to_string(cfg.unlearn.k), margin_mode,
                      fmt_double(res.metrics.mia), fmt_double(res.metrics.ra),
                      fmt_double(res.metrics.ta),
                      fmt_double(measure_rt ? res.metrics.rt_seconds : 0.0)});
    std::fprintf(stderr,
                 "[unlearn] %s uss=%d mia=%.4f ra=%.4f ta=%.4f rt=%.3fs\n",
                 to_string(method), uss, res.metrics.mia, res.metrics.ra,
                 res.metrics.ta, res.metrics.rt_seconds);
  }
  append_csv(cfg.out_dir + "/results.csv", "method,uss,k,margin_mode,mia,ra,ta,rt\n",
             rows);
  return 0;
}

struct SisaArgs {
  std::string out_dir;
  std::uint64_t seed = 0;
  long long trials = 100000;
  std::vector<long long> N, S, K;
  std::vector<double> D;
  std::vector<long long> R;
  double e_prime = 1.0;
  bool exact_shards = false;
};

int cmd_sisa(const SisaArgs& a) {
  using namespace manif::sisa;
  fs::create_directories(a.out_dir);
  bool shard_given = !a.N.empty() || !a.S.empty() || !a.K.empty();
  bool slice_given = !a.D.empty() || !a.R.empty();
  bool run_shard = shard_given || !slice_given;
  bool run_slice = slice_given || !shard_given;
  std::vector<long long> Ns = a.N, Ss = a.S, Ks = a.K, Rs = a.R;
  std::vector<double> Ds = a.D;
  if (!shard_given && !slice_given) {
    // default grid
    Ns = {100, 1000};
    Ss = {1, 5, 10, 20};
    Ks = {1, 5, 20};
    Ds = {100, 300};
    Rs = {1, 2, 5, 20};
  } else {
    if (Ns.empty()) Ns = {1000};
    if (Ss.empty()) Ss = {10};
    if (Ks.empty()) Ks = {1};
    if (Ds.empty()) Ds = {300};
    if (Rs.empty()) Rs = {2};
  }

  std::string csv = "mode,N,S,K,D,R,eprime,trials,analytic,mc_mean,mc_stderr,z_score\n";
  auto add_row = [&](const std::string& mode, const std::string& n,
                     const std::string& s, const std::string& k,
                     const std::string& d, const std::string& r,
                     const std::string& ep, double analytic, McEstimate mc) {
    double z = mc.std_error > 0.0 ? (mc.mean - analytic) / mc.std_error
                                  : (mc.mean == analytic ? 0.0 : INFINITY);
    csv += csv_join({mode, n, s, k, d, r, ep, std::to_string(mc.trials),
                     fmt_double(analytic), fmt_double(mc.mean),
                     fmt_double(mc.std_error), fmt_double(z)});
  };

  if (run_shard) {
    for (long long N : Ns)
      for (long long S : Ss)
        for (long long K : Ks) {
          if (K > N || S > N) continue;
          ShardingScenario sc{N, S, K};
          for (SisaMode mode : {SisaMode::sequential, SisaMode::batched}) {
            std::string tag = std::string("sisa/shard/") +
                              (mode == SisaMode::sequential ? "seq" : "batch") +
                              "/N=" + std::to_string(N) + "/S=" + std::to_string(S) +
                              "/K=" + std::to_string(K);
            Rng rng(derive_seed(a.seed, tag));
            McEstimate mc = simulate_shard_costs(sc, mode, a.trials, rng,
                                                 a.exact_shards);
            double analytic = mode == SisaMode::sequential
                                  ? expected_seq_shard_cost(sc)
                                  : expected_batch_shard_cost(sc);
            add_row(mode == SisaMode::sequential ? "seq_shard" : "batch_shard",
                    std::to_string(N), std::to_string(S), std::to_string(K),
                    "", "", "", analytic, mc);
          }
        }
  }
  if (run_slice) {
    for (double D : Ds)
      for (long long R : Rs) {
        if (static_cast<double>(R) > D) continue;
        {
          SlicingScenario sl{D, R, a.e_prime, 1};
          std::string tag = "sisa/slice/seq/D=" + fmt_double(D) +
                            "/R=" + std::to_string(R);
          Rng rng(derive_seed(a.seed, tag));
          McEstimate mc =
              simulate_slice_costs(sl, SisaMode::sequential, a.trials, rng);
          add_row("seq_slice", "", "", "", fmt_double(D), std::to_string(R),
                  fmt_double(a.e_prime), expected_seq_slice_cost(sl), mc);
        }
        for (long long K : Ks) {
          SlicingScenario sl{D, R, a.e_prime, K};
          std::string tag = "sisa/slice/batch/D=" + fmt_double(D) +
                            "/R=" + std::to_string(R) + "/K=" + std::to_string(K);
          Rng rng(derive_seed(a.seed, tag));
          McEstimate mc =
              simulate_slice_costs(sl, SisaMode::batched, a.trials, rng);
          add_row("batch_slice", "", "", std::to_string(K), fmt_double(D),
                  std::to_string(R), fmt_double(a.e_prime),
                  expected_batch_slice_cost(sl), mc);
        }
      }
  }
  write_text_file(a.out_dir + "/sisa.csv", csv);
  std::fprintf(stderr, "[sisa] wrote %s/sisa.csv\n", a.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"representation-space unlearning workbench"};
  app.require_subcommand(1);

  CommonArgs common;
  SisaArgs sisa_args;
  std::string method_name = "manif_smc";
  bool measure_rt = false;

  CLI::App* train = app.add_subcommand("train", "train the original encoder");
  train->add_option("--config", common.config_path, "experiment config JSON")
      ->required();
  train->add_option("--out", common.out_dir, "output directory override");
  train->add_option("--seed", common.seed_override, "global seed override");

  CLI::App* unl = app.add_subcommand("unlearn", "run an unlearning method");
  unl->add_option("--config", common.config_path, "experiment config JSON")
      ->required();
  unl->add_option("--method", method_name,
                  "manif_smc | manif_fixed | ga | retrain | finetune-after")
      ->required();
  unl->add_option("--out", common.out_dir, "output directory override");
  unl->add_option("--seed", common.seed_override, "global seed override");
  unl->add_flag("--measure-rt", measure_rt,
                "write measured wall-clock time into the results CSV");

  CLI::App* sis = app.add_subcommand(
      "sisa", "sharding/slicing retraining-cost table (analytic vs Monte Carlo)");
  sis->add_option("--out", sisa_args.out_dir, "output directory")->required();
  sis->add_option("--seed", sisa_args.seed, "seed for the simulators");
  sis->add_option("--trials", sisa_args.trials, "Monte Carlo trials per cell");
  sis->add_option("--N", sisa_args.N, "dataset sizes (sharding)");
  sis->add_option("--S", sisa_args.S, "shard counts");
  sis->add_option("--K", sisa_args.K, "request counts");
  sis->add_option("--D", sisa_args.D, "per-shard sizes (slicing)");
  sis->add_option("--R", sisa_args.R, "slice counts");
  sis->add_option("--eprime", sisa_args.e_prime, "epochs per slice stage");
  sis->add_flag("--exact-shards", sisa_args.exact_shards,
                "sequential sharding: sample requests without replacement");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(common);
    if (unl->parsed()) return cmd_unlearn(common, method_name, measure_rt);
    if (sis->parsed()) return cmd_sisa(sisa_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
