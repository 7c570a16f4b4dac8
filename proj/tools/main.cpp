#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "emograph/commands.hpp"
#include "emograph/errors.hpp"
#include "emograph/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitRuntime = 4;

struct CliArgs {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::string> seed, threads, out, vad_scale;
  std::optional<std::string> window;
  std::optional<std::string> epochs, pooling, batch_size, lr;
  std::optional<std::string> top_k, warmup, reps;
  std::optional<std::string> text;
  std::optional<std::string> input;
  bool readout_skip_h0 = false;
  bool force = false;
};

void add_common(CLI::App* sub, CliArgs& args) {
  sub->add_option("--config", args.config, "run configuration file")->required();
  sub->add_option("--seed", args.seed, "override run seed");
  sub->add_option("--threads", args.threads, "worker threads for per-caption stages");
  sub->add_option("--out", args.out, "output directory for stage artifacts");
  sub->add_option("--set", args.sets, "extra key=value config override (repeatable)");
  sub->add_flag("--force", args.force, "accept artifacts with mismatched config hashes");
}

std::vector<std::pair<std::string, std::string>> collect_overrides(const CliArgs& args) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const std::string& kv : args.sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw emograph::DomainError("--set expects key=value, got '" + kv + "'");
    }
    overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  auto push = [&overrides](const char* key, const std::optional<std::string>& value) {
    if (value) overrides.emplace_back(key, *value);
  };
  push("seed", args.seed);
  push("threads", args.threads);
  push("out_dir", args.out);
  push("vad_scale", args.vad_scale);
  push("window", args.window);
  push("epochs", args.epochs);
  push("pooling", args.pooling);
  push("batch_size", args.batch_size);
  push("lr", args.lr);
  push("top_k", args.top_k);
  push("bench_warmup", args.warmup);
  push("bench_reps", args.reps);
  if (args.readout_skip_h0) overrides.emplace_back("readout_skip_h0", "true");
  if (args.force) overrides.emplace_back("force", "true");
  return overrides;
}

void fail_line(const std::string& stage, int exit_code, const std::string& message) {
  std::cerr << nlohmann::json{
                   {"error", {{"stage", stage}, {"exit", exit_code}, {"message", message}}}}
                   .dump()
            << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"emotion recognition over caption context graphs"};
  app.set_version_flag("--version", emograph::kToolVersion);
  app.require_subcommand(1);

  CliArgs args;
  CLI::App* preprocess = app.add_subcommand("preprocess", "normalize raw captions");
  add_common(preprocess, args);
  preprocess->add_option("--vad-scale", args.vad_scale, "divide raw VAD annotations by this");

  CLI::App* mine_cmd = app.add_subcommand("mine", "mine co-occurrence statistics");
  add_common(mine_cmd, args);
  mine_cmd->add_option("--window", args.window, "co-occurrence window size");

  CLI::App* build = app.add_subcommand("build-graphs", "build per-caption context graphs");
  add_common(build, args);

  CLI::App* train = app.add_subcommand("train", "train the graph classifier");
  add_common(train, args);
  train->add_option("--epochs", args.epochs, "training epochs");
  train->add_option("--pooling", args.pooling, "readout pooling: avg or sum");
  train->add_option("--batch-size", args.batch_size, "minibatch size");
  train->add_option("--lr", args.lr, "learning rate");
  train->add_flag("--readout-skip-h0", args.readout_skip_h0,
                  "leave the input features out of the readout stack");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate mAP on the validation captions");
  add_common(eval_cmd, args);

  CLI::App* infer = app.add_subcommand("infer", "predict emotions for caption text");
  add_common(infer, args);
  infer->add_option("--text", args.text, "one caption to classify");
  infer->add_option("--input", args.input, "caption-jsonl file to classify");
  infer->add_option("--top-k", args.top_k, "category names to list per prediction");

  CLI::App* bench = app.add_subcommand("bench", "measure per-sample inference latency");
  add_common(bench, args);
  bench->add_option("--warmup", args.warmup, "untimed passes per caption");
  bench->add_option("--reps", args.reps, "timed passes per caption");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    const emograph::RunConfig cfg = emograph::RunConfig::load(args.config, collect_overrides(args));
    if (preprocess->parsed()) emograph::cmd_preprocess(cfg);
    else if (mine_cmd->parsed()) emograph::cmd_mine(cfg);
    else if (build->parsed()) emograph::cmd_build_graphs(cfg);
    else if (train->parsed()) emograph::cmd_train(cfg);
    else if (eval_cmd->parsed()) emograph::cmd_eval(cfg);
    else if (infer->parsed()) {
      std::optional<std::filesystem::path> input_path;
      if (args.input) input_path = *args.input;
      emograph::cmd_infer(cfg, args.text, input_path);
    } else if (bench->parsed()) {
      emograph::cmd_bench(cfg);
    }
  } catch (const emograph::ParseError& e) {
    fail_line(stage, kExitInput, e.what());
    return kExitInput;
  } catch (const emograph::FormatError& e) {
    fail_line(stage, kExitInput, e.what());
    return kExitInput;
  } catch (const emograph::DomainError& e) {
    fail_line(stage, kExitInput, e.what());
    return kExitInput;
  } catch (const emograph::LookupError& e) {
    fail_line(stage, kExitInput, e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    fail_line(stage, kExitRuntime, e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
