// Copyright 2026 The pilotwave Authors.
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

#include "pilotwave/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "pilotwave/error.hpp"

namespace pilotwave {

std::string_view kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kPropagate: return "propagate";
    case ExperimentKind::kTrajectory: return "trajectory";
    case ExperimentKind::kMeasure: return "measure";
    case ExperimentKind::kSequence: return "sequence";
    case ExperimentKind::kEquilibrium: return "equilibrium";
    case ExperimentKind::kLyapunov: return "lyapunov";
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view name) {
  for (const auto k : {ExperimentKind::kPropagate, ExperimentKind::kTrajectory,
                       ExperimentKind::kMeasure, ExperimentKind::kSequence,
                       ExperimentKind::kEquilibrium, ExperimentKind::kLyapunov}) {
    if (kind_name(k) == name) return k;
  }
  return std::nullopt;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

namespace {

std::string where(const YAML::Node& node) {
  const auto m = node.Mark();
  if (m.is_null()) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

// Map node whose keys must all be consumed.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (!node_.IsMap() && !node_.IsNull()) {
      throw ValidationError("config: '" + path_ + "' must be a mapping" + where(node_));
    }
  }

  bool has(const std::string& key) const { return node_.IsMap() && node_[key].IsDefined(); }

  YAML::Node raw(const std::string& key) {
    used_.insert(key);
    return node_[key];
  }

  template <class T>
  T req(const std::string& key) {
    if (!has(key)) throw ValidationError("config: missing key '" + name(key) + "'" + where(node_));
    return convert<T>(raw(key), key);
  }

  template <class T>
  std::optional<T> opt(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return convert<T>(raw(key), key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    return opt<T>(key).value_or(fallback);
  }

  Section child(const std::string& key) {
    if (!has(key)) throw ValidationError("config: missing section '" + name(key) + "'" + where(node_));
    return Section(raw(key), name(key));
  }

  std::optional<Section> opt_child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return Section(raw(key), name(key));
  }

  std::vector<double> doubles(const std::string& key) {
    const YAML::Node n = raw(key);
    if (!n.IsSequence()) {
      throw ValidationError("config: '" + name(key) + "' must be a list" + where(n));
    }
    std::vector<double> out;
    for (const auto& item : n) out.push_back(convert<double>(item, key));
    return out;
  }

  std::vector<Section> sections(const std::string& key) {
    const YAML::Node n = raw(key);
    if (!n.IsSequence()) {
      throw ValidationError("config: '" + name(key) + "' must be a list" + where(n));
    }
    std::vector<Section> out;
    std::size_t i = 0;
    for (const auto& item : n) {
      out.emplace_back(item, name(key) + "[" + std::to_string(i++) + "]");
    }
    return out;
  }

  /// The single key present among `options`.
  std::string variant(std::initializer_list<const char*> options) {
    std::string found;
    for (const char* o : options) {
      if (!has(o)) continue;
      if (!found.empty()) {
        throw ValidationError("config: '" + path_ + "' sets both '" + found + "' and '" + o + "'" +
                              where(node_));
      }
      found = o;
    }
    if (found.empty()) {
      std::string list;
      for (const char* o : options) list += std::string(list.empty() ? "" : ", ") + o;
      throw ValidationError("config: '" + path_ + "' needs one of: " + list + where(node_));
    }
    return found;
  }

  void finish() const {
    if (!node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!used_.count(key)) {
        throw ValidationError("config: unknown key '" + name(key) + "'" + where(kv.first));
      }
    }
  }

  const std::string& path() const { return path_; }

 private:
  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  T convert(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) {
      throw ValidationError("config: '" + name(key) + "' must be a scalar" + where(n));
    }
    try {
      if constexpr (std::is_same_v<T, std::size_t>) {
        const auto v = n.as<long long>();
        if (v < 0) throw ValidationError("config: '" + name(key) + "' must be non-negative" + where(n));
        return static_cast<std::size_t>(v);
      } else {
        return n.as<T>();
      }
    } catch (const YAML::BadConversion&) {
      throw ValidationError("config: '" + name(key) + "' has the wrong type" + where(n));
    }
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

// Canonical text: sorted keys, numbers re-printed with 17 digits.
void canonicalize(const YAML::Node& n, std::string& out) {
  if (n.IsMap()) {
    std::map<std::string, YAML::Node> sorted;
    for (const auto& kv : n) sorted.emplace(kv.first.as<std::string>(), kv.second);
    out += '{';
    bool first = true;
    for (const auto& [k, v] : sorted) {
      if (!first) out += ',';
      first = false;
      out += k;
      out += ':';
      canonicalize(v, out);
    }
    out += '}';
  } else if (n.IsSequence()) {
    out += '[';
    bool first = true;
    for (const auto& v : n) {
      if (!first) out += ',';
      first = false;
      canonicalize(v, out);
    }
    out += ']';
  } else if (n.IsScalar()) {
    const std::string s = n.Scalar();
    // Long integers (seeds) would lose digits through a double.
    if (s.size() > 15 && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      const auto nz = s.find_first_not_of('0');
      out += nz == std::string::npos ? "0" : s.substr(nz);
      return;
    }
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (!s.empty() && end == s.c_str() + s.size()) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", d);
      out += buf;
    } else {
      out += '"';
      out += s;
      out += '"';
    }
  } else {
    out += "null";
  }
}

GridConfig parse_grid(Section s) {
  GridConfig g;
  g.min = s.req<double>("min");
  g.max = s.req<double>("max");
  g.n = s.req<std::size_t>("n");
  s.finish();
  return g;
}

HarmonicBasis parse_basis(Section s) {
  HarmonicBasis b;
  b.omega = s.req<double>("omega");
  b.center = s.get<double>("center", 0.0);
  s.finish();
  return b;
}

StateSpec parse_state(Section s) {
  const std::string v = s.variant({"gaussian", "piecewise", "superposition"});
  Section body = s.child(v);
  StateSpec out;
  if (v == "gaussian") {
    GaussianState g;
    g.center = body.get<double>("center", 0.0);
    g.sigma = body.req<double>("sigma");
    g.k0 = body.get<double>("k0", 0.0);
    out = g;
  } else if (v == "piecewise") {
    PiecewiseDensityState p;
    for (auto& iv : body.sections("intervals")) {
      DensityInterval d;
      d.lo = iv.req<double>("lo");
      d.hi = iv.req<double>("hi");
      d.weight = iv.get<double>("weight", 1.0);
      iv.finish();
      p.intervals.push_back(d);
    }
    if (body.has("phase")) p.phase = body.doubles("phase");
    out = p;
  } else {
    SuperpositionState sp;
    sp.basis = parse_basis(body.child("basis"));
    for (auto& t : body.sections("terms")) {
      SuperpositionTerm term;
      term.eigenstate = t.req<int>("n");
      term.coefficient = complex{t.get<double>("re", 0.0), t.get<double>("im", 0.0)};
      t.finish();
      sp.terms.push_back(term);
    }
    out = sp;
  }
  body.finish();
  s.finish();
  return out;
}

PotentialSpec parse_potential(Section s) {
  const std::string v = s.variant({"free", "harmonic", "square_well", "tabulated"});
  Section body = s.child(v);
  PotentialSpec out;
  if (v == "free") {
    out = FreePotential{};
  } else if (v == "harmonic") {
    out = HarmonicPotential{body.req<double>("omega"), body.get<double>("center", 0.0)};
  } else if (v == "square_well") {
    out = SquareWellPotential{body.req<double>("depth"), body.req<double>("width"),
                              body.get<double>("center", 0.0)};
  } else {
    out = TabulatedPotential{body.doubles("values")};
  }
  body.finish();
  s.finish();
  return out;
}

ObservableSpec parse_observable(Section s) {
  const std::string v = s.variant({"binned", "discrete"});
  Section body = s.child(v);
  ObservableSpec out;
  if (v == "binned") {
    out = BinnedPosition{body.doubles("edges")};
  } else {
    DiscreteSpectrum d;
    d.values = body.doubles("values");
    for (const double e : body.doubles("eigenstates")) {
      if (e != std::floor(e) || e < 0) {
        throw ValidationError("config: eigenstate ids must be non-negative integers");
      }
      d.eigenstates.push_back(static_cast<int>(e));
    }
    d.basis = parse_basis(body.child("basis"));
    out = d;
  }
  body.finish();
  s.finish();
  return out;
}

ReprepareMode parse_mode(const std::string& s) {
  if (s == "baker_ideal") return ReprepareMode::kBakerIdeal;
  if (s == "physical_flow") return ReprepareMode::kPhysicalFlow;
  throw ValidationError("config: sequence.reprepare must be baker_ideal or physical_flow, got '" +
                        s + "'");
}

// ---------------------------------------------------------------------------
// Cross-field validation helpers.

double state_reach(const StateSpec& spec, const PhysicalParams& p, double& lo, double& hi) {
  // Returns a length scale and fills the occupied interval [lo, hi].
  if (const auto* g = std::get_if<GaussianState>(&spec)) {
    lo = g->center - 4.0 * g->sigma;
    hi = g->center + 4.0 * g->sigma;
    return g->sigma;
  }
  if (const auto* pw = std::get_if<PiecewiseDensityState>(&spec)) {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (const auto& iv : pw->intervals) {
      lo = std::min(lo, iv.lo);
      hi = std::max(hi, iv.hi);
    }
    return 0.0;
  }
  const auto& sp = std::get<SuperpositionState>(spec);
  const double ell = std::sqrt(p.hbar / (p.m_x * sp.basis.omega));
  int nmax = 0;
  for (const auto& t : sp.terms) nmax = std::max(nmax, t.eigenstate);
  const double turning = std::sqrt(2.0 * nmax + 1.0) * ell;
  lo = sp.basis.center - turning - 4.0 * ell;
  hi = sp.basis.center + turning + 4.0 * ell;
  return ell;
}

void check_padding(const ExperimentConfig& cfg) {
  const Grid1D g = cfg.x_grid();
  double lo = 0.0, hi = 0.0;
  const double scale = state_reach(*cfg.state, cfg.physics, lo, hi);
  // A density filling the whole periodic domain has no edge to pad.
  if (scale == 0.0 && lo <= g.x_min() && hi >= g.x_max()) return;
  const double pad = scale > 0.0 ? 4.0 * scale : 4.0 * g.dx();
  if (lo - pad < g.x_min() || hi + pad > g.x_max()) {
    throw ValidationError("boundary padding: the initial state occupies [" + std::to_string(lo) +
                          ", " + std::to_string(hi) + "] and needs " + std::to_string(pad) +
                          " of clearance inside the periodic x domain");
  }
}

void check_stability_cfg(const ExperimentConfig& cfg) {
  if (!(cfg.plan.dt > 0.0)) throw ValidationError("plan.dt must be positive");
  check_stability(cfg.plan.dt, Wavefunction(cfg.x_grid()), cfg.physics);
}

// Displacement giving an overlap of kDisjointOverlap, in units of sigma.
double disjoint_sigmas() { return std::sqrt(-8.0 * std::log(kDisjointOverlap)); }

void check_measurement(ExperimentConfig& cfg, bool sequence) {
  if (!cfg.grid_y) throw ValidationError("grid.y is required for measurement runs");
  if (!cfg.measurement) throw ValidationError("measurement section is required");
  const auto& m = *cfg.measurement;
  const DetectorSpec det = cfg.detector();
  det.validate();
  if (!(m.lambda >= 0.0 && std::isfinite(m.lambda))) {
    throw ValidationError("measurement.lambda must be non-negative");
  }
  if (!(m.duration > 0.0)) throw ValidationError("measurement.duration must be positive");
  const Observable obs(m.observable, cfg.x_grid(), cfg.physics);
  const double d = m.lambda * obs.min_gap() * m.duration;
  if (d < m.sigma) {
    throw ValidationError("separation criterion lambda*delta_a*duration >= sigma violated: " +
                          std::to_string(d) + " < " + std::to_string(m.sigma));
  }
  const double overlap = gaussian_overlap(d, m.sigma);
  if (sequence && !(overlap < kDisjointOverlap)) {
    throw ValidationError(
        "separation criterion for sequences: lambda*delta_a*duration = " + std::to_string(d) +
        " gives packet overlap " + std::to_string(overlap) + ", need < 1e-3 (about " +
        std::to_string(disjoint_sigmas()) + " sigma)");
  }
  if (overlap >= kDisjointOverlap) {
    cfg.warnings.push_back("packet separation " + std::to_string(d / m.sigma) +
                           " sigma leaves overlap " + std::to_string(overlap) +
                           "; outcomes in the overlap region will be rejected as ambiguous");
  }
  const Grid1D gy = cfg.y_grid();
  for (const double a : obs.values()) {
    const double c = m.center + m.lambda * a * m.duration;
    for (const double y : {m.center, c}) {
      if (y - 4.0 * m.sigma < gy.x_min() + 4.0 * m.sigma ||
          y + 4.0 * m.sigma > gy.x_max() - 4.0 * m.sigma) {
        throw ValidationError("boundary padding: pointer packet at y = " + std::to_string(y) +
                              " comes within 4 sigma of the detector domain edge");
      }
    }
  }
  const Wavefunction wf = init_state(cfg.x_grid(), *cfg.state, cfg.physics);
  const auto w = obs.weights(wf);
  double total = 0.0;
  for (const double x : w) total += x;
  if (std::abs(total - 1.0) > 1e-6) {
    throw ValidationError("state carries weight " + std::to_string(1.0 - total) +
                          " outside the observable's outcomes");
  }
  for (const auto& x0 : {m.x0, cfg.sequence ? cfg.sequence->x0 : std::nullopt}) {
    if (x0 && !(*x0 >= cfg.grid_x.min && *x0 < cfg.grid_x.max)) {
      throw ValidationError("x0 lies outside the x domain");
    }
  }
}

}  // namespace

Grid1D ExperimentConfig::y_grid() const {
  if (!grid_y) throw ValidationError("config has no detector grid (grid.y)");
  return grid_y->make();
}

DetectorSpec ExperimentConfig::detector() const {
  if (!measurement) throw ValidationError("config has no measurement section");
  return DetectorSpec{y_grid(), measurement->sigma, measurement->center};
}

MeasurementChain ExperimentConfig::chain() const {
  if (!measurement) throw ValidationError("config has no measurement section");
  return MeasurementChain{measurement->observable,
                          detector(),
                          measurement->lambda,
                          measurement->duration,
                          sequence ? sequence->mode : ReprepareMode::kBakerIdeal,
                          sequence ? sequence->cycles : measurement->runs,
                          sequence ? sequence->flow : PhysicalFlowOptions{},
                          measurement->min_steps};
}

CustomDensity ExperimentConfig::custom_density() const {
  if (!equilibrium) throw ValidationError("config has no equilibrium section");
  CustomDensity d;
  d.id = equilibrium->custom_id;
  const Grid1D g = x_grid();
  if (equilibrium->ramp) {
    d.values.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.point(i) + 0.5 * g.dx();
      const bool inside = x >= equilibrium->ramp->lo && x < equilibrium->ramp->hi;
      d.values[i] = inside ? x - equilibrium->ramp->lo : 0.0;
    }
  } else {
    d.values = equilibrium->custom_values;
  }
  return d;
}

void validate_config(ExperimentConfig& cfg) {
  cfg.warnings.clear();
  cfg.physics.validate();
  const Grid1D gx = cfg.x_grid();
  if (cfg.grid_y) cfg.y_grid();
  validate_potential(cfg.potential, gx);

  const auto need_state = [&] {
    if (!cfg.state) throw ValidationError("state section is required for kind " +
                                          std::string(kind_name(cfg.kind)));
    init_state(gx, *cfg.state, cfg.physics);
    check_padding(cfg);
  };

  switch (cfg.kind) {
    case ExperimentKind::kPropagate:
      need_state();
      check_stability_cfg(cfg);
      if (cfg.plan.steps == 0) throw ValidationError("plan.steps must be positive");
      break;
    case ExperimentKind::kTrajectory:
      need_state();
      check_stability_cfg(cfg);
      if (cfg.plan.steps == 0) throw ValidationError("plan.steps must be positive");
      if (!cfg.trajectory_x0) throw ValidationError("trajectory.x0 is required");
      if (!(*cfg.trajectory_x0 >= gx.x_min() && *cfg.trajectory_x0 < gx.x_max())) {
        throw ValidationError("trajectory.x0 lies outside the x domain");
      }
      break;
    case ExperimentKind::kMeasure:
      need_state();
      check_measurement(cfg, false);
      if (cfg.measurement->runs == 0) throw ValidationError("measurement.runs must be positive");
      break;
    case ExperimentKind::kSequence: {
      need_state();
      if (!cfg.sequence) throw ValidationError("sequence section is required");
      check_measurement(cfg, true);
      if (cfg.sequence->cycles < 100) throw ValidationError("sequence.cycles must be at least 100");
      const auto& f = cfg.sequence->flow;
      if (!(f.dt >= 0.0 && f.max_time > 0.0 && f.tol > 0.0)) {
        throw ValidationError("sequence.flow needs non-negative dt and positive max_time and tol");
      }
      // dt = 0 leaves the step to the grid's stability bound.
      if (cfg.sequence->mode == ReprepareMode::kPhysicalFlow && f.dt > 0.0) {
        check_stability(f.dt, Wavefunction(gx), cfg.physics);
      }
      break;
    }
    case ExperimentKind::kEquilibrium: {
      need_state();
      check_stability_cfg(cfg);
      if (!cfg.equilibrium) throw ValidationError("equilibrium section is required");
      const auto& e = *cfg.equilibrium;
      if (e.members < 1000) {
        throw ValidationError("equilibrium.members must be at least 1000 for f statistics");
      }
      if (!(e.time >= 0.0)) throw ValidationError("equilibrium.time must be non-negative");
      if (e.provenance == Provenance::kCustom) {
        if (e.ramp) {
          if (!(e.ramp->hi > e.ramp->lo) || e.ramp->lo < gx.x_min() || e.ramp->hi > gx.x_max()) {
            throw ValidationError("equilibrium.custom.ramp must be a nonempty interval in the domain");
          }
        } else if (e.custom_values.size() != gx.size()) {
          throw ValidationError("equilibrium.custom.values needs one value per grid point");
        }
        const auto d = cfg.custom_density();
        double total = 0.0;
        for (const double v : d.values) {
          if (!(std::isfinite(v) && v >= 0.0)) {
            throw ValidationError("custom density not normalizable: negative or non-finite value");
          }
          total += v;
        }
        if (!(total > 0.0)) throw ValidationError("custom density not normalizable: zero mass");
      }
      break;
    }
    case ExperimentKind::kLyapunov: {
      if (!cfg.lyapunov) throw ValidationError("lyapunov section is required");
      const auto& l = *cfg.lyapunov;
      if (!(l.window > 0.0)) throw ValidationError("lyapunov.window must be positive");
      if (l.reference == LyapunovReference::kBernoulli) {
        if (l.window != std::floor(l.window)) {
          throw ValidationError("lyapunov.window counts iterates for the bernoulli reference");
        }
        if (l.seed_bits < 64) throw ValidationError("lyapunov.seed_bits must be at least 64");
        if (l.delta0 < 10.0 * std::numeric_limits<double>::epsilon()) {
          throw ValidationError("lyapunov.delta0 is below 10 machine epsilons");
        }
      } else {
        need_state();
        check_stability_cfg(cfg);
        if (!(l.x0 >= gx.x_min() && l.x0 < gx.x_max())) {
          throw ValidationError("lyapunov.x0 lies outside the x domain");
        }
        if (l.delta0 < 10.0 * std::numeric_limits<double>::epsilon() * gx.length()) {
          throw ValidationError("lyapunov.delta0 is below 10 machine epsilons of the domain");
        }
      }
      break;
    }
  }
}

ExperimentConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ValidationError("config parse error at line " + std::to_string(e.mark.line + 1) +
                          ", column " + std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ValidationError("config: top level must be a mapping");

  ExperimentConfig cfg;
  Section top(root, "");
  const auto kind = top.req<std::string>("kind");
  const auto k = parse_kind(kind);
  if (!k) throw ValidationError("config: unknown kind '" + kind + "'");
  cfg.kind = *k;
  cfg.seed = top.get<std::uint64_t>("seed", 0);
  if (seed) cfg.seed = *seed;
  cfg.output = top.get<std::string>("output", "out");

  if (auto p = top.opt_child("physics")) {
    cfg.physics.hbar = p->get<double>("hbar", 1.0);
    cfg.physics.m_x = p->get<double>("m_x", 1.0);
    cfg.physics.m_y = p->get<double>("m_y", 1.0);
    p->finish();
  }
  {
    Section g = top.child("grid");
    cfg.grid_x = parse_grid(g.child("x"));
    if (auto y = g.opt_child("y")) cfg.grid_y = parse_grid(*y);
    g.finish();
  }
  if (auto s = top.opt_child("state")) cfg.state = parse_state(*s);
  if (auto s = top.opt_child("potential")) cfg.potential = parse_potential(*s);
  if (auto s = top.opt_child("plan")) {
    cfg.plan.dt = s->req<double>("dt");
    cfg.plan.steps = s->get<std::size_t>("steps", 0);
    cfg.plan.snapshot_every = s->get<std::size_t>("snapshot_every", 0);
    s->finish();
  }
  if (auto s = top.opt_child("trajectory")) {
    cfg.trajectory_x0 = s->req<double>("x0");
    s->finish();
  }
  if (auto s = top.opt_child("measurement")) {
    MeasurementConfig m;
    m.observable = parse_observable(s->child("observable"));
    Section det = s->child("detector");
    m.sigma = det.req<double>("sigma");
    m.center = det.get<double>("center", 0.0);
    det.finish();
    m.lambda = s->req<double>("lambda");
    m.duration = s->req<double>("duration");
    m.runs = s->get<std::size_t>("runs", 1);
    m.x0 = s->opt<double>("x0");
    m.y0 = s->opt<double>("y0");
    m.min_steps = s->get<std::size_t>("min_steps", 32);
    s->finish();
    cfg.measurement = m;
  }
  if (auto s = top.opt_child("sequence")) {
    SequenceConfig q;
    q.cycles = s->req<std::size_t>("cycles");
    q.mode = parse_mode(s->get<std::string>("reprepare", "baker_ideal"));
    q.x0 = s->opt<double>("x0");
    q.y0 = s->opt<double>("y0");
    if (auto f = s->opt_child("flow")) {
      q.flow.dt = f->get<double>("dt", q.flow.dt);
      q.flow.max_time = f->get<double>("max_time", q.flow.max_time);
      q.flow.tol = f->get<double>("tol", q.flow.tol);
      if (auto pot = f->opt_child("potential")) q.flow.potential = parse_potential(*pot);
      f->finish();
    }
    s->finish();
    cfg.sequence = q;
  }
  if (auto s = top.opt_child("equilibrium")) {
    EquilibriumConfig e;
    e.members = s->req<std::size_t>("members");
    const auto prov = s->get<std::string>("provenance", "born");
    if (prov == "born") {
      e.provenance = Provenance::kBorn;
    } else if (prov == "custom") {
      e.provenance = Provenance::kCustom;
      Section c = s->child("custom");
      e.custom_id = c.req<std::string>("id");
      const std::string v = c.variant({"values", "ramp"});
      if (v == "values") {
        e.custom_values = c.doubles("values");
      } else {
        Section r = c.child("ramp");
        e.ramp = RampDensity{r.req<double>("lo"), r.req<double>("hi")};
        r.finish();
      }
      c.finish();
    } else {
      throw ValidationError("config: equilibrium.provenance must be born or custom");
    }
    e.time = s->req<double>("time");
    e.record_every = s->get<std::size_t>("record_every", 0);
    s->finish();
    cfg.equilibrium = e;
  }
  if (auto s = top.opt_child("lyapunov")) {
    LyapunovConfig l;
    const auto ref = s->get<std::string>("reference", "bernoulli");
    if (ref == "bernoulli") {
      l.reference = LyapunovReference::kBernoulli;
    } else if (ref == "flow") {
      l.reference = LyapunovReference::kFlow;
    } else {
      throw ValidationError("config: lyapunov.reference must be bernoulli or flow");
    }
    l.delta0 = s->get<double>("delta0", l.delta0);
    l.window = s->get<double>("window", l.window);
    l.seed_bits = s->get<std::size_t>("seed_bits", l.seed_bits);
    l.x0 = s->get<double>("x0", l.x0);
    s->finish();
    cfg.lyapunov = l;
  }
  top.finish();

  validate_config(cfg);

  YAML::Node copy = YAML::Clone(root);
  copy["seed"] = std::to_string(cfg.seed);
  cfg.canonical.clear();
  canonicalize(copy, cfg.canonical);
  cfg.hash = fnv1a64(cfg.canonical);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading config file " + path.string());
  return parse_config(ss.str(), seed);
}

}  // namespace pilotwave
