#ifndef PPCLUST_TOOLS_CLI_HPP
#define PPCLUST_TOOLS_CLI_HPP

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ppclust/experiments.hpp"
#include "ppclust/parallel.hpp"

namespace ppclust::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

/// ppclust <experiment> --config FILE [--seed N] [--threads N] [--plot]
///         [--out DIR] [--section.key VALUE ...]
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  // --section.key overrides are split off before CLI11 sees the rest
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::string> rest;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    const bool dotted = a.rfind("--", 0) == 0 && a.find('.') != std::string::npos &&
                        a.find('.') < a.find('=');
    if (!dotted) {
      rest.push_back(a);
      continue;
    }
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      overrides.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
    } else if (i + 1 < argc) {
      overrides.emplace_back(a.substr(2), argv[++i]);
    } else {
      err << "error: override " << a << " has no value\n";
      return kExitConfig;
    }
  }

  CLI::App app{"Point-process clustering experiments"};
  std::string experiment, config_path, out_dir = "out";
  std::optional<long long> seed;
  unsigned threads = 0;
  bool want_plot = false;
  std::string names;
  for (const auto& [name, fn] : experiments()) names += (names.empty() ? "" : "|") + name;
  app.add_option("experiment", experiment, names)->required();
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--seed", seed, "overrides run.seed");
  app.add_option("--threads", threads, "worker threads (default: PPCLUST_THREADS or hardware)");
  app.add_flag("--plot", want_plot, "also write SVG plots");
  app.add_option("--out", out_dir, "output directory");
  app.set_version_flag("--version", kVersion);

  std::vector<std::string> reversed(rest.rbegin(), rest.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    Config c = Config::parse(read_file(config_path), config_path);
    for (const auto& [k, v] : overrides) c.set(k, v);
    if (seed) c.set("run.seed", std::to_string(*seed));
    if (threads > 0) set_thread_count(threads);
    const auto artifacts = execute(experiment, c, want_plot, err);
    write_artifacts(out_dir, artifacts);
    for (const auto& a : artifacts) out << (std::filesystem::path(out_dir) / a.name).string() << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace ppclust::cli

#endif  // PPCLUST_TOOLS_CLI_HPP
