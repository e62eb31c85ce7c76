// Command-line front end for the cluster-growth scaling experiments.
//
// Usage:
//   smd <profile|converge-xi|diagnostics|oracle> --config FILE
//       [--out DIR] [--override key.path=value ...]
//
// Exit codes: 0 all quantitative checks passed, 1 a check failed,
// 2 configuration or runtime error.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "smd/errors.hpp"
#include "smd/experiment.hpp"

namespace {

using nlohmann::json;

// Applies one `dotted.path=value` override to the config JSON.  The value
// text is parsed as JSON when possible (numbers, arrays, booleans) and
// falls back to a plain string.
void apply_override(json& cfg, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw smd::ValidationError("override must look like key.path=value: " +
                               text);
  }
  const std::string key = text.substr(0, eq);
  const std::string value_text = text.substr(eq + 1);

  std::string pointer;
  for (char ch : key) pointer += (ch == '.') ? '/' : ch;
  pointer.insert(pointer.begin(), '/');

  json value;
  try {
    value = json::parse(value_text);
  } catch (const json::exception&) {
    value = value_text;  // not valid JSON: treat as a string
  }
  cfg[json::json_pointer(pointer)] = value;
}

struct SubcommandSpec {
  const char* name;
  const char* kind;  // experiment.kind this subcommand runs
  const char* blurb;
};

constexpr SubcommandSpec kSubcommands[] = {
    {"profile", "profile-table",
     "Tabulate the front similarity profiles over a xi grid"},
    {"converge-xi", "converge-xi",
     "Measure convergence of scaled cluster densities to the front profile"},
    {"diagnostics", "diagnostics",
     "Verify the front decomposition identity and its decay rates"},
    {"oracle", "oracle-check",
     "Cross-check the fast evaluators against a brute-force solve"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scaling experiments for a monomer-driven cluster growth model"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  std::string selected_kind;

  for (const auto& sub : kSubcommands) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.blurb);
    cmd->add_option("--config", config_path, "Experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "Output directory")
        ->capture_default_str();
    cmd->add_option("--override", overrides,
                    "Config override key.path=value (repeatable)");
    cmd->callback([&selected_kind, &sub]() { selected_kind = sub.kind; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::ifstream in(config_path);
    if (!in) throw smd::Error("cannot read config file: " + config_path);
    json cfg_json = json::parse(in);

    for (const auto& text : overrides) apply_override(cfg_json, text);

    if (!cfg_json.contains("experiment") || !cfg_json["experiment"].is_object()) {
      cfg_json["experiment"] = json::object();
    }
    json& exp = cfg_json["experiment"];
    if (exp.contains("kind")) {
      const std::string file_kind = exp["kind"].get<std::string>();
      if (file_kind != selected_kind) {
        throw smd::ValidationError("config declares experiment.kind '" +
                                   file_kind + "' but the subcommand runs '" +
                                   selected_kind + "'");
      }
    } else {
      exp["kind"] = selected_kind;
    }

    const smd::ExperimentConfig cfg =
        smd::ExperimentConfig::from_json(cfg_json);
    return smd::run_experiment(cfg, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
