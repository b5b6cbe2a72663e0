// fraclap <experiment> --config FILE [--out DIR] [--format csv|json|both]
//
// Exit status: 0 all assertions hold, 1 some assertion failed,
// 2 usage, configuration or resource error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fraclap/experiment.hpp"

namespace fx = fraclap::experiment;

namespace {

const char* kRelationSymbol(const std::string& r) {
  if (r == "ge") return ">=";
  if (r == "gt") return ">";
  if (r == "le") return "<=";
  return "<";
}

int run_one(fx::ExperimentKind kind, const std::string& config_path, std::string out_dir, const std::string& format) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot read config " << config_path << "\n";
    return 2;
  }
  std::stringstream buf;
  buf << in.rdbuf();

  fx::ExperimentConfig cfg;
  try {
    cfg = fx::parse_config(buf.str(), kind);
  } catch (const fx::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  if (out_dir.empty()) out_dir = cfg.output_dir;
  if (out_dir.empty()) {
    std::cerr << "error: no output directory; pass --out or set output.dir\n";
    return 2;
  }

  fx::ExperimentReport rep;
  try {
    rep = fx::run(cfg);
  } catch (const fraclap::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 2;
  } catch (const fx::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::vector<fx::ReportFormat> formats;
  if (format == "csv" || format == "both") formats.push_back(fx::ReportFormat::csv);
  if (format == "json" || format == "both") formats.push_back(fx::ReportFormat::json);
  try {
    for (const auto& p : fx::write_report(rep, out_dir, formats)) std::cout << "wrote " << p.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  for (const auto& w : rep.warnings) std::cout << "warning: " << w << "\n";
  for (const auto& f : rep.findings) std::cout << "finding: " << f << "\n";
  for (const auto& a : rep.assertions) {
    std::printf("[%s] %s: %.6g %s %.6g\n", a.pass ? "PASS" : "FAIL", a.name.c_str(), a.value,
                kRelationSymbol(a.relation), a.threshold);
  }
  std::fprintf(stderr, "wall time %.3f s\n", rep.wall_seconds);
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Navier versus Dirichlet fractional Laplacian experiments"};
  app.set_version_flag("--version", fx::kVersion);
  app.require_subcommand(1);

  struct Options {
    std::string config;
    std::string out;
    std::string format = "both";
  };
  std::vector<std::pair<fx::ExperimentKind, CLI::App*>> subs;
  std::vector<Options> opts(6);
  const fx::ExperimentKind kinds[] = {fx::ExperimentKind::spectra,   fx::ExperimentKind::positivity,
                                      fx::ExperimentKind::monotonicity, fx::ExperimentKind::extension,
                                      fx::ExperimentKind::sobolev,   fx::ExperimentKind::sweep};
  const char* help[] = {"compare Navier and Dirichlet eigenvalues",
                        "check that the difference operator maps nonnegative data to nonnegative data",
                        "check the domain-monotonicity chain of quadratic forms",
                        "solve the weighted extension problems and check energy identity and ordering",
                        "compare discrete Sobolev quotients with the closed-form constant",
                        "dilation sweep of the Navier/Dirichlet form ratio"};
  for (int k = 0; k < 6; ++k) {
    CLI::App* sub = app.add_subcommand(fx::to_string(kinds[k]), help[k]);
    sub->add_option("--config", opts[k].config, "config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts[k].out, "output directory (overrides output.dir)");
    sub->add_option("--format", opts[k].format, "report format")->check(CLI::IsMember({"csv", "json", "both"}));
    subs.emplace_back(kinds[k], sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  for (int k = 0; k < 6; ++k)
    if (subs[k].second->parsed()) return run_one(kinds[k], opts[k].config, opts[k].out, opts[k].format);
  return 2;
}
