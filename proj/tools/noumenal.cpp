// Copyright 2026 The Noumenal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "noumenal/noumenal.hpp"

namespace {

constexpr int kExitVerificationFailure = 2;
constexpr int kExitLoadError = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw noumenal::ValidationError("cannot open '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string subject_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

void emit(const noumenal::RunResult& result, const std::string& out_path, bool console_table) {
  const std::string payload = result.output.dump(2) + "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw noumenal::ValidationError("cannot write '" + out_path + "'");
    out << payload;
    if (console_table) std::cout << result.console;
  } else {
    std::cout << payload;
    if (console_table) std::cerr << result.console;
  }
}

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<double> tolerance;
  std::string out_path;

  noumenal::RunOverrides overrides() const {
    noumenal::RunOverrides ov;
    ov.seed = seed;
    if (!seed) {
      // NOUMENAL_SEED provides the default seed; an explicit flag wins.
      if (const char* env = std::getenv("NOUMENAL_SEED")) {
        try {
          ov.seed = std::stoull(env);
        } catch (...) {
          throw noumenal::ValidationError("NOUMENAL_SEED is not an integer");
        }
      }
    }
    ov.samples = samples;
    ov.tolerance = tolerance;
    return ov;
  }
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "override the spec's seed");
  cmd->add_option("--samples", flags.samples, "override the spec's sample count");
  cmd->add_option("--tolerance", flags.tolerance, "override the spec's tolerance");
  cmd->add_option("--out", flags.out_path, "write the JSON output to this path");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noumenal: verify no-signalling theories and build their local-realistic models"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string scenario;
  bool force = false;
  CommonFlags check_flags, build_flags, demo_flags;

  CLI::App* check = app.add_subcommand("check", "run the axiom catalogue against a theory spec");
  check->add_option("spec", spec_path, "theory spec file")->required();
  add_common(check, check_flags);

  CLI::App* build =
      app.add_subcommand("build", "verify a theory and export its noumenal model");
  build->add_option("spec", spec_path, "theory spec file")->required();
  build->add_flag("--force", force, "export even when verification fails (watermarked)");
  add_common(build, build_flags);

  CLI::App* demo = app.add_subcommand("demo", "execute a named demo scenario");
  demo->add_option("spec", spec_path, "theory spec file")->required();
  demo->add_option("scenario", scenario, "scenario name")->required();
  add_common(demo, demo_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string text = read_file(spec_path);
    const noumenal::TheorySpecDocument doc = noumenal::parse_spec(text);
    const std::string subject = subject_of(spec_path);

    noumenal::RunResult result;
    if (check->parsed()) {
      result = noumenal::run_check(doc, check_flags.overrides(), subject);
      emit(result, check_flags.out_path, true);
    } else if (build->parsed()) {
      result = noumenal::run_build(doc, build_flags.overrides(), force, subject);
      emit(result, build_flags.out_path, true);
    } else {
      result = noumenal::run_demo(doc, scenario, demo_flags.overrides(), subject);
      emit(result, demo_flags.out_path, true);
    }
    return result.exit_code;
  } catch (const noumenal::ParseError& e) {
    std::cerr << spec_path << ":" << e.what() << "\n";
    return kExitLoadError;
  } catch (const noumenal::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitLoadError;
  } catch (const noumenal::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerificationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitLoadError;
  }
}
