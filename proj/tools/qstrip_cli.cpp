#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qstrip/config.hpp"
#include "qstrip/snapshot_io.hpp"
#include "qstrip/study.hpp"
#include "qstrip/verify.hpp"

using namespace qstrip;

namespace {

struct CommonArgs {
  std::string config;
  std::vector<std::string> overrides;
  Index J = 0, K = 0, M = 0;
  std::string output;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("-c,--config", a.config, "configuration file")->required();
  cmd->add_option("-s,--set", a.overrides, "override a key, e.g. --set mesh.J=600");
  cmd->add_option("-J", a.J, "x intervals");
  cmd->add_option("-K", a.K, "y intervals");
  cmd->add_option("-M", a.M, "time levels");
  cmd->add_option("-o,--output", a.output, "output directory");
}

SolverConfig resolve(const CommonArgs& a) {
  if (!std::filesystem::exists(a.config)) throw ValidationError("config file not found: " + a.config);
  SolverConfig c = load_config(a.config);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("override must be key=value: " + kv);
    set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.J > 0) c.J = a.J;
  if (a.K > 0) c.K = a.K;
  if (a.M > 0) c.M = a.M;
  if (!a.output.empty()) c.directory = a.output;
  return c;
}

std::string level_name(Index m) {
  std::ostringstream o;
  o << "psi_" << std::setw(5) << std::setfill('0') << m;
  return o.str();
}

int cmd_run(const CommonArgs& a) {
  const SolverConfig c = resolve(a);
  const Problem p = build_problem(c);
  const Field psi0 = initial_field(c, p);
  RunOptions opts;
  opts.snapshot_levels = snapshot_levels(c);
  const RunResult r = run(p, psi0, opts);

  std::filesystem::create_directories(c.directory);
  const SnapshotMeta base{static_cast<std::uint32_t>(c.J), static_cast<std::uint32_t>(c.K),
                          static_cast<std::uint32_t>(c.M), 0};
  for (const Snapshot& s : r.snapshots) {
    SnapshotMeta meta = base;
    meta.m = static_cast<std::uint32_t>(s.level);
    const auto stem = c.directory / level_name(s.level);
    if (c.format != SnapshotFormat::raw) write_snapshot_csv(stem.string() + ".csv", s.psi, p.x, p.y);
    if (c.format != SnapshotFormat::csv) write_snapshot_raw(stem.string() + ".qstr", s.psi, meta);
  }
  std::ofstream trace(c.directory / "trace.csv");
  trace << std::setprecision(6) << "m,t,mass,flux_right,flux_left\n";
  for (std::size_t m = 0; m < r.mass.size(); ++m)
    trace << m << ',' << (m == 0 ? 0.0 : p.t.time(static_cast<Index>(m))) << ',' << r.mass[m] << ','
          << r.flux_right[m] << ',' << r.flux_left[m] << '\n';
  std::ofstream(c.directory / "config.cfg") << format_config(c);

  std::cout << std::setprecision(6) << "levels " << c.M << ", snapshots " << r.snapshots.size() << ", mass "
            << r.mass.front() << " -> " << r.mass.back() << ", marching " << r.counters.total_seconds << " s\n"
            << "output " << c.directory.string() << "\n";
  return 0;
}

std::vector<Index> parse_levels(const std::string& s) {
  std::vector<Index> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoll(item));
    } catch (const std::exception&) {
      throw ValidationError("bad level '" + item + "'");
    }
  }
  return out;
}

int cmd_converge(const CommonArgs& a, const std::string& axis, const std::string& levels, Index factor,
                 Index repeats, const std::string& csv) {
  const SolverConfig c = resolve(a);
  StudyOptions o;
  o.reference_factor = factor;
  o.timing_repeats = repeats;
  KernelCache cache;
  o.cache = &cache;
  const ConvergenceReport r = convergence_study(c, parse_axis(axis), parse_levels(levels), o);
  std::cout << r.table();
  if (!csv.empty()) std::ofstream(csv) << r.csv();
  return 0;
}

int cmd_kernels(const CommonArgs& a, Index levels, const std::string& method, const std::string& path) {
  const SolverConfig c = resolve(a);
  const Problem p = build_problem(c);
  const SpectralBasis basis(p.y);
  const KernelSetParameters kp{c.hbar, c.rho, c.b1, c.b2, c.v_inf, p.x.tail_step(), p.t.step(1)};
  const KernelMethod km = method == "impulse" ? KernelMethod::impulse : KernelMethod::inverse_z;
  if (method != "impulse" && method != "inverse_z") throw ValidationError("method must be inverse_z or impulse");
  const KernelSet k = build_kernel_set(kp, basis, levels > 0 ? levels : c.M, km);
  const std::filesystem::path out = path.empty() ? c.directory / "kernels.csv" : std::filesystem::path(path);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  if (out.extension() == ".csv") write_kernels_csv(out, k);
  else write_kernels_binary(out, k);
  std::cout << "wrote " << k.modes() << " mode kernels of length " << k.length() + 1 << " to " << out.string() << "\n";
  return 0;
}

int cmd_verify(const CommonArgs& a) {
  const SolverConfig c = resolve(a);
  bool ok = true;
  for (const CheckResult& r : property_suite(c)) {
    std::cout << format_check(r) << "\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Splitting Crank-Nicolson solver with discrete transparent boundaries on a strip"};
  app.require_subcommand(1);

  CommonArgs run_args, conv_args, kern_args, ver_args;
  auto* run_cmd = app.add_subcommand("run", "single simulation");
  add_common(run_cmd, run_args);

  auto* conv_cmd = app.add_subcommand("converge", "refinement study along one axis");
  add_common(conv_cmd, conv_args);
  std::string axis = "J", levels, csv;
  Index factor = 4, repeats = 1;
  conv_cmd->add_option("--axis", axis, "J, K or M");
  conv_cmd->add_option("--levels", levels, "comma-separated doubling sizes")->required();
  conv_cmd->add_option("--reference-factor", factor, "reference size over the finest level (0: finest level)");
  conv_cmd->add_option("--repeats", repeats, "timing repeats (best is reported)");
  conv_cmd->add_option("--csv", csv, "write the report as CSV");

  auto* kern_cmd = app.add_subcommand("kernels", "dump boundary convolution kernels");
  add_common(kern_cmd, kern_args);
  Index kernel_levels = 0;
  std::string method = "inverse_z", kernel_path;
  kern_cmd->add_option("--levels", kernel_levels, "kernel length M (default: mesh.M)");
  kern_cmd->add_option("--method", method, "inverse_z or impulse");
  kern_cmd->add_option("--file", kernel_path, "output file (.csv or binary)");

  auto* ver_cmd = app.add_subcommand("verify", "property suite");
  add_common(ver_cmd, ver_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return cmd_run(run_args);
    if (*conv_cmd) return cmd_converge(conv_args, axis, levels, factor, repeats, csv);
    if (*kern_cmd) return cmd_kernels(kern_args, kernel_levels, method, kernel_path);
    if (*ver_cmd) return cmd_verify(ver_args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
