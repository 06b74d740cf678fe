// cgnn: train, evaluate, sweep, verify and profile continuous graph neural
// networks from the command line.
//
// Exit codes: 0 success, 1 invalid input or failed check, 2 numeric failure.

#include "cgnn/cgnn.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace cgnn;

namespace {

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string variant;
};

RunConfig resolve(const CommonOptions& o) {
  RunConfig rc = load_run_config(o.config);
  if (!o.out.empty()) rc.output_dir = o.out;
  if (o.seed) {
    rc.train.seed = *o.seed;
    rc.seeds = {*o.seed};
  }
  if (!o.variant.empty()) {
    rc.train.variant = parse_variant(o.variant);
    rc.variants = {rc.train.variant};
  }
  if (rc.dataset_path.empty()) throw ParseError("config: dataset_path is required");
  return rc;
}

std::ofstream open_output(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

std::string fmt(double x) { return format_sig10(x); }

int cmd_train(const CommonOptions& o) {
  const RunConfig rc = resolve(o);
  const Dataset ds = load_dataset(rc.dataset_path);
  const ModelInput in = ModelInput::from_dataset(ds, rc.train.row_normalize);
  fs::create_directories(rc.output_dir);

  auto metrics = open_output(rc.output_dir / "metrics.csv");
  metrics << "epoch,train_loss,train_acc,val_acc,test_acc\n";
  const TrainResult r = train(in, ds.split, rc.train, [&](const Metrics& m) {
    metrics << m.epoch << ',' << fmt(m.train_loss) << ',' << fmt(m.train_acc) << ',' << fmt(m.val_acc) << ','
            << fmt(m.test_acc) << '\n';
  });
  save_checkpoint(r.best_params, rc.output_dir / "checkpoint");

  nlohmann::json summary = {
      {"best_val_acc", r.best_val_acc},
      {"test_acc_at_best_val", r.test_acc_at_best_val},
      {"best_epoch", r.best_epoch},
      {"seed", rc.train.seed},
      {"config", to_json(rc)},
  };
  open_output(rc.output_dir / "summary.json") << summary.dump(2) << '\n';
  std::cout << "best_val_acc=" << fmt(r.best_val_acc) << " test_acc=" << fmt(r.test_acc_at_best_val)
            << " epoch=" << r.best_epoch << '\n';
  return 0;
}

int cmd_eval(const CommonOptions& o, const std::string& checkpoint) {
  const RunConfig rc = resolve(o);
  const Dataset ds = load_dataset(rc.dataset_path);
  const ModelInput in = ModelInput::from_dataset(ds, rc.train.row_normalize);
  const fs::path dir = checkpoint.empty() ? rc.output_dir / "checkpoint" : fs::path(checkpoint);
  const ModelParams p = load_checkpoint(dir);
  const Matrix probs = forward(p, in, rc.train);
  std::cout << "split,accuracy\n";
  std::cout << "train," << fmt(accuracy(probs, in.labels, ds.split.train)) << '\n';
  std::cout << "val," << fmt(accuracy(probs, in.labels, ds.split.val)) << '\n';
  if (!ds.split.test.empty()) std::cout << "test," << fmt(accuracy(probs, in.labels, ds.split.test)) << '\n';
  return 0;
}

int cmd_sweep(const CommonOptions& o, const std::vector<double>& t_override, std::size_t jobs) {
  RunConfig rc = resolve(o);
  if (!t_override.empty()) rc.t_list = t_override;
  if (rc.t_list.empty()) throw DomainError("sweep-time: empty t_list");
  if (rc.variants.empty()) rc.variants = {rc.train.variant};
  if (rc.seeds.empty()) rc.seeds = {rc.train.seed};
  const Dataset ds = load_dataset(rc.dataset_path);
  const ModelInput in = ModelInput::from_dataset(ds, rc.train.row_normalize);
  const auto rows = sweep_time(in, ds.split, rc.train, rc.variants, rc.t_list, rc.seeds, jobs);
  auto out = open_output(rc.output_dir / "sweep.csv");
  out << "variant,t1,seed,test_acc\n";
  for (const auto& r : rows) out << to_string(r.variant) << ',' << fmt(r.t1) << ',' << r.seed << ',' << fmt(r.test_acc) << '\n';
  std::cout << "wrote " << rows.size() << " rows to " << (rc.output_dir / "sweep.csv").string() << '\n';
  return 0;
}

int cmd_verify(bool inject_fault) {
  VerifyOptions opt;
  opt.inject_fault = inject_fault;
  const auto rows = run_oracle_suite(opt);
  std::cout << kOracleCsvHeader << '\n';
  bool ok = true;
  for (const auto& r : rows) {
    std::cout << to_csv_row(r) << '\n';
    ok = ok && r.pass;
  }
  std::cout.flush();
  if (!ok) std::cerr << "verify: one or more oracles failed\n";
  return ok ? 0 : 1;
}

int cmd_mem_report(const CommonOptions& o, const std::vector<double>& t_override) {
  RunConfig rc = resolve(o);
  if (!t_override.empty()) rc.t_list = t_override;
  if (rc.t_list.empty()) throw DomainError("mem-report: empty t_list");
  const Dataset ds = load_dataset(rc.dataset_path);
  const ModelInput in = ModelInput::from_dataset(ds, rc.train.row_normalize);
  const auto rows = memory_report(in, ds.split, rc.train, {Variant::Cgnn, Variant::CgnnDiscrete}, rc.t_list);
  auto out = open_output(rc.output_dir / "mem.csv");
  out << "variant,t1,steps,peak_live_buffers\n";
  for (const auto& r : rows) {
    out << to_string(r.variant) << ',' << fmt(r.t1) << ',' << r.steps << ',' << r.peak_live << '\n';
  }
  std::cout << "wrote " << rows.size() << " rows to " << (rc.output_dir / "mem.csv").string() << '\n';
  return 0;
}

int cmd_gen_synth(const SbmSpec& spec, const std::string& out) {
  const Dataset ds = generate_sbm(spec);
  save_dataset(ds, out);
  std::cout << "nodes=" << ds.num_nodes() << " edges=" << ds.graph.num_edges() << " features=" << ds.features.cols()
            << " classes=" << ds.num_classes() << '\n';
  return 0;
}

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config", o.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "output directory (overrides config)");
  sub->add_option("--seed", o.seed, "random seed (overrides config)");
  sub->add_option("--variant", o.variant, "cgnn, cgnn-weight, cgnn-discrete or cgnn-no-restart");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous graph neural networks"};
  app.require_subcommand(1);

  CommonOptions train_opt, eval_opt, sweep_opt, mem_opt;
  std::string checkpoint;
  std::vector<double> sweep_t, mem_t;
  std::size_t jobs = 1;
  bool inject_fault = false;
  SbmSpec sbm;
  std::string synth_out;

  auto* train_cmd = app.add_subcommand("train", "train a model and write metrics, checkpoint and summary");
  add_common(train_cmd, train_opt);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved checkpoint");
  add_common(eval_cmd, eval_opt);
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint directory (default <out>/checkpoint)");

  auto* sweep_cmd = app.add_subcommand("sweep-time", "train across end times and write sweep.csv");
  add_common(sweep_cmd, sweep_opt);
  sweep_cmd->add_option("--t-list", sweep_t, "end times (overrides config)")->delimiter(',');
  sweep_cmd->add_option("--jobs", jobs, "parallel workers")->check(CLI::PositiveNumber);

  auto* verify_cmd = app.add_subcommand("verify", "run the closed-form oracle suite");
  verify_cmd->add_flag("--inject-fault", inject_fault, "set every tolerance to zero");

  auto* mem_cmd = app.add_subcommand("mem-report", "peak live buffers per end time, written to mem.csv");
  add_common(mem_cmd, mem_opt);
  mem_cmd->add_option("--t-list", mem_t, "end times (overrides config)")->delimiter(',');

  auto* synth_cmd = app.add_subcommand("gen-synth", "write a stochastic block model dataset");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--blocks", sbm.blocks);
  synth_cmd->add_option("--nodes-per-block", sbm.nodes_per_block);
  synth_cmd->add_option("--p-in", sbm.p_in);
  synth_cmd->add_option("--p-out", sbm.p_out);
  synth_cmd->add_option("--feature-dim", sbm.feature_dim);
  synth_cmd->add_option("--signal", sbm.signal);
  synth_cmd->add_option("--direction-norm", sbm.direction_norm);
  synth_cmd->add_option("--seed", sbm.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*train_cmd) return cmd_train(train_opt);
    if (*eval_cmd) return cmd_eval(eval_opt, checkpoint);
    if (*sweep_cmd) return cmd_sweep(sweep_opt, sweep_t, jobs);
    if (*verify_cmd) return cmd_verify(inject_fault);
    if (*mem_cmd) return cmd_mem_report(mem_opt, mem_t);
    if (*synth_cmd) return cmd_gen_synth(sbm, synth_out);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
