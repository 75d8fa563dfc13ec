// ptav: track, bench and synth commands.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ptav/ptav.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> mode;
  std::optional<int> seed;
  std::optional<int> interval;
  std::optional<double> tau1;
  std::optional<double> tau2;
  std::optional<double> beta;
  std::optional<int> delay_ms;
  bool no_verifier = false;
};

void add_run_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "key = value configuration file");
  cmd->add_option("--mode", o.mode, "parallel or deterministic")->check(CLI::IsMember({"parallel", "deterministic"}));
  cmd->add_option("--seed", o.seed, "random seed recorded in the run config");
  cmd->add_option("--V", o.interval, "verification interval in frames");
  cmd->add_option("--tau1", o.tau1, "verification threshold");
  cmd->add_option("--tau2", o.tau2, "detection threshold");
  cmd->add_option("--beta", o.beta, "initial search-region scale");
  cmd->add_flag("--no-verifier", o.no_verifier, "run the tracker alone");
  cmd->add_option("--verifier-delay-ms", o.delay_ms, "extra latency per verification");
}

// Flags override the config file, which overrides defaults.
ptav::RunConfig resolve(const Overrides& o) {
  ptav::RunConfig c = o.config_path.empty() ? ptav::RunConfig{} : ptav::load_config(o.config_path);
  if (o.mode) c.mode = ptav::parse_mode(*o.mode);
  if (o.seed) c.seed = static_cast<std::uint32_t>(*o.seed);
  if (o.interval) c.interval = *o.interval;
  if (o.tau1) c.tau1 = *o.tau1;
  if (o.tau2) c.tau2 = *o.tau2;
  if (o.beta) c.beta = *o.beta;
  if (o.delay_ms) c.verifier_delay_ms = *o.delay_ms;
  if (o.no_verifier) c.use_verifier = false;
  ptav::validate(c);
  return c;
}

bool timed(const ptav::RunConfig& c) { return c.mode == ptav::ExecutionMode::parallel; }

void print_summary(const ptav::EvaluationReport& r) {
  std::printf("%s: DPR@20=%.4f OSR@0.5=%.4f AUC=%.4f fps=%.2f\n", r.sequence.c_str(), r.dpr, r.osr, r.success.auc,
              r.fps);
}

int cmd_track(const std::string& seq_dir, const std::string& out, const Overrides& o) {
  const ptav::RunConfig cfg = resolve(o);
  const ptav::Sequence seq = ptav::load_sequence(seq_dir);
  const ptav::EvaluationReport r = ptav::run_ope(seq, cfg);
  ptav::write_report(r, out, timed(cfg));
  print_summary(r);
  return 0;
}

int cmd_bench(const std::string& dataset, const std::string& out, const Overrides& o) {
  const ptav::RunConfig cfg = resolve(o);
  if (!ptav::fs::is_directory(dataset)) throw ptav::SequenceError("not a directory: " + dataset);
  std::vector<ptav::fs::path> dirs;
  for (const auto& e : ptav::fs::directory_iterator(dataset)) {
    if (e.is_directory()) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<ptav::EvaluationReport> reports;
  std::vector<std::string> skipped;
  for (const auto& dir : dirs) {
    try {
      const ptav::Sequence seq = ptav::load_sequence(dir);
      reports.push_back(ptav::run_ope(seq, cfg));
      ptav::write_report(reports.back(), ptav::fs::path(out) / seq.name, timed(cfg));
      print_summary(reports.back());
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping " << dir.string() << ": " << e.what() << "\n";
      skipped.push_back(dir.filename().string());
    }
  }
  if (reports.empty()) {
    std::cerr << "error: no usable sequences in " << dataset << "\n";
    return 1;
  }
  const ptav::Aggregate a = ptav::aggregate(reports);
  ptav::fs::create_directories(out);
  std::ofstream(ptav::fs::path(out) / "aggregate.json") << ptav::aggregate_json(a, skipped, timed(cfg)).dump(2)
                                                        << "\n";
  std::printf("aggregate over %zu sequences: DPR@20=%.4f OSR@0.5=%.4f AUC=%.4f fps=%.2f\n", reports.size(),
              a.mean_dpr, a.mean_osr, a.mean_auc, a.fps);
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out) {
  const ptav::SyntheticSpec spec = ptav::parse_synthetic_spec(ptav::KeyValueFile::load(spec_path));
  const ptav::Sequence seq = ptav::generate_synthetic(spec);
  ptav::write_sequence(seq, out);
  std::printf("wrote %zu frames to %s\n", seq.size(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel tracking and verifying"};
  app.require_subcommand(1);

  Overrides track_opts;
  std::string track_seq, track_out;
  auto* track = app.add_subcommand("track", "run one sequence and write its report");
  track->add_option("sequence", track_seq, "OTB-layout sequence directory")->required();
  track->add_option("--out", track_out, "output directory")->required();
  add_run_flags(track, track_opts);

  Overrides bench_opts;
  std::string bench_dir, bench_out;
  auto* bench = app.add_subcommand("bench", "run every sequence in a dataset directory");
  bench->add_option("dataset", bench_dir, "directory of OTB-layout sequences")->required();
  bench->add_option("--out", bench_out, "output directory")->required();
  add_run_flags(bench, bench_opts);

  std::string synth_spec, synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic sequence");
  synth->add_option("spec", synth_spec, "synthetic spec file")->required();
  synth->add_option("--out", synth_out, "output sequence directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*track) return cmd_track(track_seq, track_out, track_opts);
    if (*bench) return cmd_bench(bench_dir, bench_out, bench_opts);
    if (*synth) return cmd_synth(synth_spec, synth_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
