#pragma once

#include <optional>
#include <string>

#include "emograph/run_config.hpp"

namespace emograph {

// Stage commands behind the CLI. Each one reads its upstream artifacts from
// cfg.out_dir, writes its own artifact there, and throws on missing or
// mismatched inputs.
void cmd_preprocess(const RunConfig& cfg);
void cmd_mine(const RunConfig& cfg);
void cmd_build_graphs(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);
void cmd_infer(const RunConfig& cfg, const std::optional<std::string>& text,
               const std::optional<std::filesystem::path>& input_file);
void cmd_bench(const RunConfig& cfg);

}  // namespace emograph
