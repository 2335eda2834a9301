// sphtomo: simulate -> reconstruct -> analyze -> render
//
// Exit codes: 0 success, 2 invalid input (flags, files, parameters),
// 3 numerical failure.

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "sphtomo/error.hpp"
#include "sphtomo/threads.hpp"

namespace {

using namespace sphtomo;

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

void add_noise_flags(CLI::App* sub, cli::NoiseFlags& n) {
  sub->add_option("--sigma-n", n.sigma_n, "Atom-number standard deviation (atoms)");
  sub->add_option("--sigma-omega", n.sigma_omega, "Axis pointing uncertainty (radians)");
  sub->add_option("--phase-noise", n.phase_noise, "Azimuthal noise: none | const:<rad> | model:<deg>");
  sub->add_option("--phase-model-form", n.phase_form, "How the model amplitude enters: squared | linear")
      ->check(CLI::IsMember({"squared", "linear"}));
}

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

// Turns `key = value` lines into flag tokens for the given subcommand.
// Underscores in keys read as dashes; boolean flags take true/false.
std::vector<std::string> config_tokens(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("{}: cannot open config file", path));
  std::vector<std::string> out, errors;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(fmt::format("{}:{}: expected key = value", path, number));
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    const CLI::Option* opt = key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      errors.push_back(fmt::format("{}:{}: unknown key '{}' for {}", path, number, key, sub->get_name()));
      continue;
    }
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "yes")
        out.push_back("--" + key);
      else if (value == "false" || value == "0" || value == "no")
        out.push_back("--no-" + key);
      else
        errors.push_back(fmt::format("{}:{}: '{}' expects true or false", path, number, key));
      continue;
    }
    out.push_back("--" + key);
    out.push_back(value);
  }
  if (!errors.empty()) {
    std::ostringstream msg;
    for (const auto& e : errors) msg << e << '\n';
    std::string s = msg.str();
    s.pop_back();
    throw ValidationError(s);
  }
  return out;
}

// Splices config-file tokens in front of the subcommand's own flags, so
// flags given on the command line win (options keep their last value).
std::vector<std::string> expand_config(CLI::App& app, std::vector<std::string> args) {
  const auto sub_it = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
    return app.get_subcommand_no_throw(a) != nullptr;
  });
  if (sub_it == args.end()) return args;
  CLI::App* sub = app.get_subcommand(*sub_it);
  std::string path;
  for (auto it = sub_it + 1; it != args.end(); ++it) {
    if (*it == "--config" && it + 1 != args.end())
      path = *(it + 1);
    else if (it->starts_with("--config="))
      path = it->substr(9);
  }
  if (path.empty()) return args;
  const auto tokens = config_tokens(sub, path);
  args.insert(sub_it + 1, tokens.begin(), tokens.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical Wigner-function tomography of collective spin states"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sphtomo 0.1.0");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it");
  std::string config;

  cli::SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Sample synthetic Stern-Gerlach records from a model state");
  s->add_option("--config", config, "key = value file; command-line flags win");
  s->add_option("--state", sim.state, "coherent | dicke | oat | mixed")
      ->check(CLI::IsMember({"coherent", "dicke", "oat", "mixed"}));
  s->add_option("--two-j", sim.two_j, "Total spin, doubled");
  s->add_option("--two-m", sim.two_m, "Dicke state projection, doubled (default: 2j)");
  s->add_option("--chi", sim.chi, "One-axis twisting strength");
  s->add_option("--theta0", sim.theta0, "Coherent-state polar angle (radians)");
  s->add_option("--phi0", sim.phi0, "Coherent-state azimuth (radians)");
  s->add_flag("--axis-plane,!--no-axis-plane", sim.axis_plane, "Equatorial axes instead of the hemisphere");
  s->add_option("--axes", sim.axes, "Number of quantization axes");
  s->add_option("--shots", sim.shots, "Shots per axis");
  add_noise_flags(s, sim.noise);
  s->add_option("--seed", sim.seed, "Random seed");
  s->add_option("-o,--output", sim.output, "Measurement CSV to write");

  cli::ReconstructArgs rec;
  auto* r = app.add_subcommand("reconstruct", "Filtered backprojection of a measurement CSV");
  r->add_option("--config", config, "key = value file; command-line flags win");
  r->add_option("-i,--input", rec.input, "Measurement CSV");
  r->add_option("--mode", rec.mode, "full-sphere | in-plane")->check(CLI::IsMember({"full-sphere", "in-plane"}));
  r->add_option("--kmax", rec.kmax, "Highest partial wave");
  r->add_option("--two-j-ref", rec.two_j_ref, "Reference total spin of the result, doubled");
  add_noise_flags(r, rec.noise);
  r->add_flag("--fold-north,!--no-fold-north", rec.fold_north, "Complete in-plane data assuming a northern state");
  r->add_option("--weights", rec.weights, "uniform | voronoi | file")
      ->check(CLI::IsMember({"uniform", "voronoi", "file"}));
  r->add_option("--grid", rec.grid, "Wigner grid NxM (theta rows x phi columns)");
  r->add_option("--output-prefix", rec.prefix, "Writes <prefix>.coeffs.csv, .spectrum.csv, .grid.csv");

  cli::AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "Squeezing scan of a reconstructed state over equatorial axes");
  a->add_option("--config", config, "key = value file; command-line flags win");
  a->add_option("-i,--input", an.input, "Coefficient file");
  a->add_option("--azimuths", an.azimuths, "Azimuths scanned over [-pi/2, pi/2)");
  a->add_option("--sigma-n", an.sigma_n, "Imaging noise to subtract (default: from the coefficient file)");
  a->add_flag("--require-fit,!--no-require-fit", an.require_fit, "Fail (exit 3) if any Gaussian fit fails");
  a->add_option("-o,--output", an.output, "Squeezing CSV to write");

  cli::RenderArgs rn;
  auto* d = app.add_subcommand("render", "Render a coefficient file as a PGM image");
  d->add_option("--config", config, "key = value file; command-line flags win");
  d->add_option("-i,--input", rn.input, "Coefficient file");
  d->add_option("--grid", rn.grid, "Image size NxM (theta rows x phi columns)");
  d->add_option("-o,--output", rn.output, "PGM file to write");
  d->add_option("--grid-csv", rn.grid_csv, "Also write the sampled grid as CSV");

  auto* t = app.add_subcommand("selftest", "Check the library against built-in oracles");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
    set_thread_limit(threads);

    if (s->parsed()) cli::run_simulate(sim);
    if (r->parsed()) cli::run_reconstruct(rec);
    if (a->parsed()) cli::run_analyze(an);
    if (d->parsed()) cli::run_render(rn);
    if (t->parsed()) return cli::run_selftest() == 0 ? 0 : kExitNumerical;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  } catch (const NumericalError& e) {
    fmt::print(stderr, "sphtomo: numerical failure: {}\n", e.what());
    return kExitNumerical;
  } catch (const ValidationError& e) {
    fmt::print(stderr, "sphtomo: {}\n", e.what());
    return kExitInvalid;
  } catch (const DomainError& e) {
    fmt::print(stderr, "sphtomo: {}\n", e.what());
    return kExitInvalid;
  } catch (const IoError& e) {
    fmt::print(stderr, "sphtomo: {}\n", e.what());
    return kExitInvalid;
  }
  return 0;
}
