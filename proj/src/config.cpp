#include "qstrip/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace qstrip {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Real to_real(const std::string& key, const std::string& v) {
  Real out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ValidationError("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

Index to_index(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ValidationError("'" + key + "' expects an integer, got '" + v + "'");
  return static_cast<Index>(out);
}

template <typename E>
E to_enum(const std::string& key, const std::string& v, const std::map<std::string, E>& names) {
  if (auto it = names.find(v); it != names.end()) return it->second;
  std::string allowed;
  for (const auto& [n, e] : names) allowed += (allowed.empty() ? "" : "|") + n;
  throw ValidationError("'" + key + "' expects " + allowed + ", got '" + v + "'");
}

std::vector<Index> to_levels(const std::string& key, const std::string& v) {
  std::vector<Index> out;
  if (v == "default") return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_index(key, trim(item)));
  return out;
}

const std::map<std::string, StripKind> strip_names{{"semi_infinite", StripKind::semi_infinite},
                                                    {"infinite", StripKind::infinite}};
const std::map<std::string, VTildeChoice> vtilde_names{{"zero", VTildeChoice::zero},
                                                        {"barrier_slab", VTildeChoice::barrier_slab}};
const std::map<std::string, PropagatorVariant> propagator_names{{"cayley", PropagatorVariant::cayley},
                                                                 {"exponential", PropagatorVariant::exponential}};
const std::map<std::string, SnapshotFormat> format_names{
    {"csv", SnapshotFormat::csv}, {"raw", SnapshotFormat::raw}, {"both", SnapshotFormat::both}};

using Setter = std::function<void(SolverConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"domain.X", [](SolverConfig& c, const std::string& k, const std::string& v) { c.X = to_real(k, v); }},
      {"domain.Y", [](SolverConfig& c, const std::string& k, const std::string& v) { c.Y = to_real(k, v); }},
      {"domain.X0", [](SolverConfig& c, const std::string& k, const std::string& v) { c.X0 = to_real(k, v); }},
      {"domain.strip",
       [](SolverConfig& c, const std::string& k, const std::string& v) { c.strip = to_enum(k, v, strip_names); }},
      {"mesh.J", [](SolverConfig& c, const std::string& k, const std::string& v) { c.J = to_index(k, v); }},
      {"mesh.K", [](SolverConfig& c, const std::string& k, const std::string& v) { c.K = to_index(k, v); }},
      {"mesh.M", [](SolverConfig& c, const std::string& k, const std::string& v) { c.M = to_index(k, v); }},
      {"mesh.T", [](SolverConfig& c, const std::string& k, const std::string& v) { c.T = to_real(k, v); }},
      {"physics.hbar", [](SolverConfig& c, const std::string& k, const std::string& v) { c.hbar = to_real(k, v); }},
      {"physics.rho", [](SolverConfig& c, const std::string& k, const std::string& v) { c.rho = to_real(k, v); }},
      {"physics.b1", [](SolverConfig& c, const std::string& k, const std::string& v) { c.b1 = to_real(k, v); }},
      {"physics.b2", [](SolverConfig& c, const std::string& k, const std::string& v) { c.b2 = to_real(k, v); }},
      {"physics.v_inf", [](SolverConfig& c, const std::string& k, const std::string& v) { c.v_inf = to_real(k, v); }},
      {"physics.barrier_a",
       [](SolverConfig& c, const std::string& k, const std::string& v) { c.barrier.a = to_real(k, v); }},
      {"physics.barrier_b",
       [](SolverConfig& c, const std::string& k, const std::string& v) { c.barrier.b = to_real(k, v); }},
      {"physics.barrier_c",
       [](SolverConfig& c, const std::string& k, const std::string& v) { c.barrier.c = to_real(k, v); }},
      {"physics.barrier_d",
       [](SolverConfig& c, const std::string& k, const std::string& v) { c.barrier.d = to_real(k, v); }},
      {"physics.barrier_q",
       [](SolverConfig& c, const std::string& k, const std::string& v) { c.barrier.q = to_real(k, v); }},
      {"physics.v_tilde",
       [](SolverConfig& c, const std::string& k, const std::string& v) { c.v_tilde = to_enum(k, v, vtilde_names); }},
      {"physics.propagator",
       [](SolverConfig& c, const std::string& k, const std::string& v) {
         c.propagator = to_enum(k, v, propagator_names);
       }},
      {"packet.k", [](SolverConfig& c, const std::string& k, const std::string& v) { c.packet.k = to_real(k, v); }},
      {"packet.alpha",
       [](SolverConfig& c, const std::string& k, const std::string& v) { c.packet.alpha = to_real(k, v); }},
      {"packet.x0", [](SolverConfig& c, const std::string& k, const std::string& v) { c.packet.x0 = to_real(k, v); }},
      {"packet.y0", [](SolverConfig& c, const std::string& k, const std::string& v) { c.packet.y0 = to_real(k, v); }},
      {"output.snapshots",
       [](SolverConfig& c, const std::string& k, const std::string& v) { c.snapshots = to_levels(k, v); }},
      {"output.directory", [](SolverConfig& c, const std::string&, const std::string& v) { c.directory = v; }},
      {"output.format",
       [](SolverConfig& c, const std::string& k, const std::string& v) { c.format = to_enum(k, v, format_names); }},
  };
  return table;
}

template <typename E>
std::string name_of(E e, const std::map<std::string, E>& names) {
  for (const auto& [n, v] : names)
    if (v == e) return n;
  return "?";
}

}  // namespace

void set_config_value(SolverConfig& config, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ValidationError("unknown key '" + key + "'");
  it->second(config, key, value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, s] : setters()) keys.push_back(k);
  return keys;
}

SolverConfig parse_config(const std::string& text, const std::string& origin) {
  SolverConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    std::string line = raw;
    if (const auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(where + "malformed section header: " + trim(raw));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(where + "expected 'key = value': " + trim(raw));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      set_config_value(config, full, value);
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what() + " in line: " + trim(raw));
    }
  }
  return config;
}

SolverConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string format_config(const SolverConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "[domain]\nX = " << c.X << "\nY = " << c.Y << "\nX0 = " << c.X0 << "\nstrip = " << name_of(c.strip, strip_names)
    << "\n\n[mesh]\nJ = " << c.J << "\nK = " << c.K << "\nM = " << c.M << "\nT = " << c.T
    << "\n\n[physics]\nhbar = " << c.hbar << "\nrho = " << c.rho << "\nb1 = " << c.b1 << "\nb2 = " << c.b2
    << "\nv_inf = " << c.v_inf << "\nbarrier_a = " << c.barrier.a << "\nbarrier_b = " << c.barrier.b
    << "\nbarrier_c = " << c.barrier.c << "\nbarrier_d = " << c.barrier.d << "\nbarrier_q = " << c.barrier.q
    << "\nv_tilde = " << name_of(c.v_tilde, vtilde_names) << "\npropagator = " << name_of(c.propagator, propagator_names)
    << "\n\n[packet]\nk = " << c.packet.k << "\nalpha = " << c.packet.alpha << "\nx0 = " << c.packet.x0
    << "\ny0 = " << c.packet.y0 << "\n\n[output]\nsnapshots = ";
  if (c.snapshots.empty()) o << "default";
  for (std::size_t i = 0; i < c.snapshots.size(); ++i) o << (i ? "," : "") << c.snapshots[i];
  o << "\ndirectory = " << c.directory.string() << "\nformat = " << name_of(c.format, format_names) << "\n";
  return o.str();
}

std::vector<Index> snapshot_levels(const SolverConfig& c) {
  if (!c.snapshots.empty()) {
    for (Index m : c.snapshots)
      if (m < 0 || m > c.M) throw ValidationError("snapshot level " + std::to_string(m) + " outside 0..M");
    return c.snapshots;
  }
  std::vector<Index> out;
  for (Index milestone : {180, 300, 420, 600}) {
    const Index m = static_cast<Index>(std::llround(static_cast<double>(milestone * c.M) / 600.0));
    if (out.empty() || out.back() != m) out.push_back(m);
  }
  return out;
}

Problem build_problem(const SolverConfig& c) {
  require(c.X > 0.0 && c.Y > 0.0 && c.T > 0.0, "X, Y and T must be positive");
  require(c.M >= 0, "M must be non-negative");
  Problem p;
  p.x = AxisMesh::x_axis(c.X, c.J);
  p.y = AxisMesh::y_axis(c.Y, c.K);
  p.t = TimeMesh::uniform(c.T, c.M);

  PhysicalModel& m = p.model;
  m = PhysicalModel::homogeneous(c.hbar, {c.rho, c.b1, c.b2, c.v_inf});
  const CoefficientFn bar = barrier_potential(c.barrier, c.X, c.Y);
  const Real v_inf = c.v_inf;
  m.v = [bar, v_inf](Real x, Real y) { return v_inf + bar(x, y); };
  if (c.v_tilde == VTildeChoice::barrier_slab) {
    const ProfileFn slab = barrier_slab(c.barrier);
    m.v_tilde = [slab, v_inf](Real x) { return v_inf + slab(x); };
  }
  m.x0_right = c.X0 >= 0.0 ? c.X0 : c.barrier.b;
  if (m.x0_right > p.x.node(c.J - 2))
    throw ValidationError("X0 = " + std::to_string(m.x0_right) + " must not exceed x_{J-2} = " +
                          std::to_string(p.x.node(c.J - 2)));
  if (c.strip == StripKind::infinite) {
    m.x0_left = c.barrier.a;
    if (m.x0_left < p.x.node(2))
      throw ValidationError("the barrier must start at or beyond x_2 on the infinite strip");
    p.left = BoundaryKind::transparent;
  }
  p.right = BoundaryKind::transparent;
  p.propagator = c.propagator;
  return p;
}

Field initial_field(const SolverConfig& c, const Problem& p) { return gaussian_packet(p.x, p.y, c.packet, c.strip); }

}  // namespace qstrip
