// Copyright 2026 The zospsa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// zospsa generate|run|verify|diagnose --config <path> [options]
//
// Exit codes: 0 success (run: target gap reached; verify: all checks
// pass), 2 run stopped at max_iters, 1 any error or failed verification.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zospsa/harness.hpp"

namespace {

int dispatch(const std::string& command, const zospsa::ExperimentConfig& c) {
  if (command == "generate") return zospsa::cmd_generate(c);
  if (command == "run") return zospsa::cmd_run(c);
  if (command == "verify") return zospsa::cmd_verify(c);
  return zospsa::cmd_diagnose(c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order SPSA optimizer and analysis toolkit"};
  app.allow_extras();

  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool force = false;
  bool no_reg_in_batch = false;
  bool inject_bad_b = false;

  app.add_option("command", command, "generate | run | verify | diagnose")
      ->required()
      ->check(CLI::IsMember({"generate", "run", "verify", "diagnose"}));
  app.add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  app.add_option("--seed", seed,
                 "seed for the generator, perturbations, sampling and start");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--force", force, "overwrite existing outputs");
  app.add_flag("--no-reg-in-batch", no_reg_in_batch,
               "drop the regularizer from minibatch losses");
  app.add_flag("--inject-bad-b", inject_bad_b,
               "corrupt b_0 so ||b_0||_1 > 1 (negative test)");
  app.footer("Any config field can be overridden as --section.key=value.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    zospsa::Json doc = zospsa::read_json_file(config_path);
    for (const auto& extra : app.remaining()) {
      const auto eq = extra.find('=');
      if (extra.rfind("--", 0) != 0 || eq == std::string::npos) {
        throw zospsa::ConfigError("unrecognized argument '" + extra +
                                  "' (expected --key=value)");
      }
      zospsa::apply_override(doc, extra.substr(2, eq - 2),
                             extra.substr(eq + 1));
    }
    if (seed) {
      for (const char* key : {"problem.generator.seed", "opt.spsa.seed",
                              "opt.start_seed", "diag.seed"}) {
        zospsa::apply_override(doc, key, std::to_string(*seed));
      }
    }
    if (out_dir) doc["output"]["dir"] = *out_dir;
    if (force) doc["output"]["force"] = true;
    if (no_reg_in_batch) doc["opt"]["reg_in_batch"] = false;
    if (inject_bad_b) doc["problem"]["inject_bad_b"] = true;

    const auto config = zospsa::config_from_json(doc);
    return dispatch(command, config);
  } catch (const std::exception& e) {
    std::cerr << "zospsa " << command << ": " << e.what() << '\n';
    return 1;
  }
}
