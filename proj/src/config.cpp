#include "clpaths/config.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "clpaths/errors.hpp"

namespace clpaths {

// ---------------------------------------------------------------------------
// Line lookup

std::map<std::string, int> json_pointer_lines(const std::string& text) {
  std::map<std::string, int> out;
  struct Frame {
    bool object = false;
    std::string base;
    std::string key;
    int index = 0;
  };
  std::vector<Frame> stack;
  int line = 1;
  std::size_t i = 0;
  auto escape = [](const std::string& k) {
    std::string r;
    for (char c : k) r += c == '~' ? std::string("~0") : c == '/' ? std::string("~1") : std::string(1, c);
    return r;
  };
  auto here = [&]() -> std::string {
    if (stack.empty()) return "";
    const Frame& f = stack.back();
    return f.base + "/" + (f.object ? escape(f.key) : std::to_string(f.index));
  };
  auto read_string = [&]() {
    std::string s;
    ++i;
    while (i < text.size() && text[i] != '"') {
      if (text[i] == '\\' && i + 1 < text.size()) {
        s += text[i + 1];
        i += 2;
        continue;
      }
      if (text[i] == '\n') ++line;
      s += text[i++];
    }
    ++i;
    return s;
  };
  bool expect_key = false;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c)) || c == ':') {
      ++i;
    } else if (c == ',') {
      if (!stack.empty()) {
        if (stack.back().object)
          expect_key = true;
        else
          ++stack.back().index;
      }
      ++i;
    } else if (c == '{' || c == '[') {
      const std::string ptr = here();
      out.emplace(ptr, line);
      stack.push_back({c == '{', ptr, "", 0});
      expect_key = c == '{';
      ++i;
    } else if (c == '}' || c == ']') {
      stack.pop_back();
      expect_key = false;
      ++i;
    } else if (c == '"' && expect_key) {
      stack.back().key = read_string();
      expect_key = false;
    } else {
      out.emplace(here(), line);
      if (c == '"') {
        read_string();
      } else {
        while (i < text.size() && !std::strchr(",}] \t\r\n", text[i])) ++i;
      }
    }
  }
  return out;
}

namespace {

// ---------------------------------------------------------------------------
// Checked reading with located errors

class Reader {
 public:
  Reader(const Json& j, std::string ptr, const std::map<std::string, int>* lines, const std::string* source)
      : j_(j), ptr_(std::move(ptr)), lines_(lines), source_(source) {}

  [[noreturn]] void fail(const std::string& msg) const {
    std::string loc = *source_;
    if (lines_) {
      // Nearest enclosing pointer with a known line.
      std::string p = ptr_;
      while (true) {
        auto it = lines_->find(p);
        if (it != lines_->end()) {
          loc += ":" + std::to_string(it->second);
          break;
        }
        if (p.empty()) break;
        p = p.substr(0, p.rfind('/'));
      }
    }
    throw ConfigError(loc + ": " + (ptr_.empty() ? "/" : ptr_) + ": " + msg);
  }

  const Json& json() const { return j_; }
  const std::string& pointer() const { return ptr_; }

  Reader at(const std::string& key) const { return {j_.at(key), ptr_ + "/" + key, lines_, source_}; }
  Reader at(std::size_t i) const { return {j_.at(i), ptr_ + "/" + std::to_string(i), lines_, source_}; }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  void object(const std::set<std::string>& allowed) const {
    if (!j_.is_object()) fail("expected an object");
    for (const auto& [k, v] : j_.items())
      if (!allowed.count(k)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        Reader(v, ptr_ + "/" + k, lines_, source_).fail("unknown key '" + k + "' (allowed: " + list + ")");
      }
  }
  std::size_t array() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }
  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  long long integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<long long>();
  }
  std::uint64_t unsigned_integer() const {
    if (j_.is_number_unsigned()) return j_.get<std::uint64_t>();
    const long long v = integer();
    if (v < 0) fail("expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  cplx complex() const {
    if (!j_.is_array() || j_.size() != 2 || !j_[0].is_number() || !j_[1].is_number())
      fail("expected a complex number [re, im]");
    return {j_[0].get<double>(), j_[1].get<double>()};
  }
  int int_value() const {
    const long long v = integer();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail("integer out of range");
    return static_cast<int>(v);
  }

  template <class F>
  void opt(const std::string& key, F&& f) const {
    if (has(key)) f(at(key));
  }

 private:
  const Json& j_;
  std::string ptr_;
  const std::map<std::string, int>* lines_;
  const std::string* source_;
};

Density read_density(const Reader& r) {
  r.object({"mode", "gamma", "poly_factors", "exp_poly", "exp_principal"});
  Mode mode = Mode::Line;
  r.opt("mode", [&](const Reader& m) {
    const std::string s = m.string();
    if (s == "line")
      mode = Mode::Line;
    else if (s == "cylinder")
      mode = Mode::Cylinder;
    else
      m.fail("mode must be \"line\" or \"cylinder\"");
  });
  int gamma = 0;
  r.opt("gamma", [&](const Reader& g) { gamma = g.int_value(); });
  std::vector<PolyFactor> poly;
  r.opt("poly_factors", [&](const Reader& pf) {
    for (std::size_t i = 0; i < pf.array(); ++i) {
      const Reader f = pf.at(i);
      f.object({"a", "alpha"});
      if (!f.has("a") || !f.has("alpha")) f.fail("a poly factor needs \"a\" and \"alpha\"");
      poly.push_back({f.at("a").complex(), f.at("alpha").int_value()});
    }
  });
  std::map<int, cplx> exp_poly;
  r.opt("exp_poly", [&](const Reader& ep) {
    if (!ep.json().is_object()) ep.fail("expected an object {\"k\": [re, im]}");
    for (const auto& [k, v] : ep.json().items()) {
      int key = 0;
      try {
        std::size_t used = 0;
        key = std::stoi(k, &used);
        if (used != k.size()) throw std::invalid_argument(k);
      } catch (const std::exception&) {
        ep.at(k).fail("exp_poly keys must be integers");
      }
      exp_poly[key] = ep.at(k).complex();
    }
  });
  std::vector<PrincipalPart> principal;
  r.opt("exp_principal", [&](const Reader& pp) {
    for (std::size_t i = 0; i < pp.array(); ++i) {
      const Reader p = pp.at(i);
      p.object({"b", "d"});
      if (!p.has("b") || !p.has("d")) p.fail("a principal part needs \"b\" and \"d\"");
      PrincipalPart part{p.at("b").complex(), {}};
      const Reader dd = p.at("d");
      for (std::size_t k = 0; k < dd.array(); ++k) part.d.push_back(dd.at(k).complex());
      principal.push_back(std::move(part));
    }
  });
  try {
    return Density(mode, gamma, std::move(poly), std::move(exp_poly), std::move(principal));
  } catch (const InvalidDensity& e) {
    r.fail(e.what());
  }
}

Endpoint read_endpoint(const Reader& r, const Density* d) {
  if (!r.json().is_object() || !r.has("type")) r.fail("an endpoint needs a \"type\"");
  const std::string type = r.at("type").string();
  if (type == "zero") {
    r.object({"type", "z"});
    return FiniteZero{r.at("z").complex()};
  }
  if (type == "infinity") {
    r.object({"type", "angle"});
    return InfinityRay{r.at("angle").number()};
  }
  if (type == "imaginary_infinity") {
    r.object({"type", "sign", "x"});
    ImaginaryInfinity e;
    e.sign = r.at("sign").int_value();
    if (e.sign != 1 && e.sign != -1) r.at("sign").fail("sign must be +1 or -1");
    r.opt("x", [&](const Reader& x) { e.x = x.number(); });
    return e;
  }
  if (type == "essential") {
    r.object({"type", "b", "sector", "angle", "radius"});
    EssentialApproach e;
    e.b = r.at("b").complex();
    e.sector = r.at("sector").int_value();
    r.opt("radius", [&](const Reader& x) { e.radius = x.number(); });
    if (r.has("angle")) {
      e.angle = r.at("angle").number();
    } else {
      if (!d) r.fail("the approach angle is needed when no density is given");
      bool found = false;
      const SingularityCensus c = census(*d);
      for (const auto& a : c.generalized_zero_approaches)
        if (auto ea = std::get_if<EssentialApproach>(&a); ea && std::abs(ea->b - e.b) < 1e-12 && ea->sector == e.sector) {
          e.angle = ea->angle;
          found = true;
        }
      if (!found) r.fail("no essential-singularity approach with this b and sector");
    }
    return e;
  }
  r.at("type").fail("endpoint type must be zero, infinity, imaginary_infinity or essential");
}

std::vector<cplx> read_points(const Reader& r) {
  std::vector<cplx> out;
  for (std::size_t i = 0; i < r.array(); ++i) out.push_back(r.at(i).complex());
  return out;
}

PathSpec read_path(const Reader& r, const Density* d) {
  r.object({"label", "kind", "start", "end", "waypoints", "winding", "enclosed"});
  const std::string kind = r.has("kind") ? r.at("kind").string() : "open";
  std::string label;
  r.opt("label", [&](const Reader& x) { label = x.string(); });
  std::vector<cplx> waypoints;
  r.opt("waypoints", [&](const Reader& x) { waypoints = read_points(x); });
  if (kind == "open") {
    if (!r.has("start") || !r.has("end")) r.fail("an open path needs \"start\" and \"end\"");
    if (r.has("winding") || r.has("enclosed")) r.fail("winding and enclosed apply to closed paths");
    return PathSpec::open(read_endpoint(r.at("start"), d), read_endpoint(r.at("end"), d), waypoints, label);
  }
  if (kind == "closed") {
    if (r.has("start") || r.has("end")) r.fail("a closed path has no start or end");
    int winding = 0;
    r.opt("winding", [&](const Reader& x) { winding = x.int_value(); });
    std::vector<std::string> enclosed;
    r.opt("enclosed", [&](const Reader& x) {
      for (std::size_t i = 0; i < x.array(); ++i) enclosed.push_back(x.at(i).string());
    });
    if (waypoints.empty()) r.fail("a closed path needs waypoints");
    return PathSpec::closed(waypoints, winding, enclosed, label);
  }
  r.at("kind").fail("kind must be \"open\" or \"closed\"");
}

std::vector<PathSpec> read_paths(const Reader& r, const Density* d) {
  std::vector<PathSpec> out;
  for (std::size_t i = 0; i < r.array(); ++i) {
    out.push_back(read_path(r.at(i), d));
    if (out.back().label.empty()) out.back().label = "path" + std::to_string(i);
  }
  return out;
}

void read_quadrature(const Reader& r, QuadratureConfig& q) {
  r.object({"tol", "rel_tol", "tail_eps", "max_extent", "eps_path", "max_intervals"});
  r.opt("tol", [&](const Reader& x) { q.tol = x.number(); });
  r.opt("rel_tol", [&](const Reader& x) { q.rel_tol = x.number(); });
  r.opt("tail_eps", [&](const Reader& x) { q.tail_eps = x.number(); });
  r.opt("max_extent", [&](const Reader& x) { q.max_extent = x.number(); });
  r.opt("eps_path", [&](const Reader& x) { q.eps_path = x.number(); });
  r.opt("max_intervals", [&](const Reader& x) { q.max_intervals = x.int_value(); });
  if (!(q.tol > 0) || !(q.rel_tol >= 0) || !(q.tail_eps > 0) || !(q.max_extent > 0) || !(q.eps_path > 0) ||
      q.max_intervals <= 0)
    r.fail("quadrature tolerances and limits must be positive");
}

void read_cl(const Reader& r, CLConfig& c) {
  r.object({"n_walkers", "dt", "t_burn", "t_measure", "seed", "adaptive", "dt_cap_factor", "start_points",
            "meas_interval", "y_cap", "histogram", "trace_walkers", "trace_interval", "threads"});
  r.opt("n_walkers", [&](const Reader& x) { c.n_walkers = x.int_value(); });
  r.opt("dt", [&](const Reader& x) { c.dt = x.number(); });
  r.opt("t_burn", [&](const Reader& x) { c.t_burn = x.number(); });
  r.opt("t_measure", [&](const Reader& x) { c.t_measure = x.number(); });
  r.opt("seed", [&](const Reader& x) { c.seed = x.unsigned_integer(); });
  r.opt("adaptive", [&](const Reader& x) { c.adaptive = x.boolean(); });
  r.opt("dt_cap_factor", [&](const Reader& x) { c.dt_cap_factor = x.number(); });
  r.opt("start_points", [&](const Reader& x) { c.start_points = read_points(x); });
  r.opt("meas_interval", [&](const Reader& x) { c.meas_interval = x.number(); });
  r.opt("y_cap", [&](const Reader& x) { c.y_cap = x.number(); });
  r.opt("trace_walkers", [&](const Reader& x) { c.trace_walkers = x.int_value(); });
  r.opt("trace_interval", [&](const Reader& x) { c.trace_interval = x.number(); });
  r.opt("threads", [&](const Reader& x) { c.threads = x.int_value(); });
  r.opt("histogram", [&](const Reader& h) {
    h.object({"enabled", "nx", "ny", "replicas"});
    h.opt("enabled", [&](const Reader& x) { c.histogram.enabled = x.boolean(); });
    h.opt("nx", [&](const Reader& x) { c.histogram.nx = x.int_value(); });
    h.opt("ny", [&](const Reader& x) { c.histogram.ny = x.int_value(); });
    h.opt("replicas", [&](const Reader& x) { c.histogram.replicas = x.int_value(); });
  });
  try {
    validate(c);
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
}

void read_fit(const Reader& r, FitSection& f) {
  r.object({"normalize", "bootstrap", "seed", "rank_tol", "basis", "symmetric"});
  r.opt("normalize", [&](const Reader& x) { f.cfg.normalize = x.boolean(); });
  r.opt("bootstrap", [&](const Reader& x) { f.cfg.bootstrap = x.int_value(); });
  r.opt("seed", [&](const Reader& x) { f.cfg.seed = x.unsigned_integer(); });
  r.opt("rank_tol", [&](const Reader& x) { f.cfg.rank_tol = x.number(); });
  auto labels = [](const Reader& x) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < x.array(); ++i) out.push_back(x.at(i).string());
    return out;
  };
  r.opt("basis", [&](const Reader& x) { f.basis = labels(x); });
  r.opt("symmetric", [&](const Reader& x) {
    f.symmetric = labels(x);
    if (!f.symmetric.empty() && f.symmetric.size() != 3) x.fail("symmetric needs exactly three path labels");
  });
  if (f.cfg.bootstrap < 0) r.fail("bootstrap must be non-negative");
}

void read_flux(const Reader& r, std::vector<FluxCurve>& curves) {
  r.object({"curves"});
  r.opt("curves", [&](const Reader& cs) {
    for (std::size_t i = 0; i < cs.array(); ++i) {
      const Reader c = cs.at(i);
      c.object({"polygon", "cylinder_y"});
      if (c.has("polygon") == c.has("cylinder_y")) c.fail("a curve is either {\"polygon\": ...} or {\"cylinder_y\": y0}");
      if (c.has("polygon")) {
        auto pts = read_points(c.at("polygon"));
        if (pts.size() < 3) c.at("polygon").fail("a polygon needs at least three vertices");
        curves.push_back(FluxCurve::polygon(std::move(pts)));
      } else {
        curves.push_back(FluxCurve::cylinder_line(c.at("cylinder_y").number()));
      }
    }
  });
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Byte offset to line and column.
    const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
    int line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON: " +
                      e.what());
  }
  const auto lines = json_pointer_lines(text);
  const Reader r(j, "", &lines, &source);
  r.object({"version", "density", "observables", "paths", "extra_paths", "normalize", "quadrature", "cl", "sde",
            "fit", "flux", "output"});

  ExperimentConfig cfg;
  if (!r.has("density")) r.fail("missing \"density\"");
  cfg.density = read_density(r.at("density"));
  cfg.density_spec = density_to_json(*cfg.density);
  const Density& d = *cfg.density;

  r.opt("observables", [&](const Reader& o) {
    for (std::size_t i = 0; i < o.array(); ++i) {
      const Reader e = o.at(i);
      try {
        cfg.observables.push_back(Observable::parse(e.string()));
      } catch (const InputError& err) {
        e.fail(err.what());
      }
      if (!cfg.observables.back().admitted(d.mode()) && cfg.observables.back().kind() != Observable::Kind::Drift)
        e.fail("observable " + cfg.observables.back().label() + " is not admitted in cylinder mode");
    }
  });
  r.opt("paths", [&](const Reader& p) {
    if (p.json().is_string()) {
      if (p.string() != "auto") p.fail("paths must be \"auto\" or a list of paths");
      cfg.auto_paths = true;
    } else {
      cfg.auto_paths = false;
      cfg.paths = read_paths(p, &d);
    }
  });
  r.opt("extra_paths", [&](const Reader& p) { cfg.extra_paths = read_paths(p, &d); });
  r.opt("normalize", [&](const Reader& x) { cfg.normalize = x.boolean(); });
  r.opt("quadrature", [&](const Reader& x) { read_quadrature(x, cfg.quadrature); });
  r.opt("cl", [&](const Reader& x) { read_cl(x, cfg.cl); });
  r.opt("sde", [&](const Reader& s) {
    s.object({"n_max", "tol_rank"});
    s.opt("n_max", [&](const Reader& x) {
      for (std::size_t i = 0; i < x.array(); ++i) {
        cfg.sde.n_max.push_back(x.at(i).int_value());
        if (cfg.sde.n_max.back() <= 0) x.at(i).fail("n_max must be positive");
      }
    });
    s.opt("tol_rank", [&](const Reader& x) { cfg.sde.tol_rank = x.number(); });
  });
  r.opt("fit", [&](const Reader& x) { read_fit(x, cfg.fit); });
  r.opt("flux", [&](const Reader& x) { read_flux(x, cfg.flux_curves); });
  r.opt("output", [&](const Reader& o) {
    o.object({"dir", "formats"});
    o.opt("dir", [&](const Reader& x) { cfg.output.dir = x.string(); });
    o.opt("formats", [&](const Reader& x) {
      cfg.output.formats.clear();
      for (std::size_t i = 0; i < x.array(); ++i) {
        const std::string f = x.at(i).string();
        if (f != "json" && f != "csv") x.at(i).fail("formats are \"json\" and \"csv\"");
        cfg.output.formats.push_back(f);
      }
    });
  });

  // Fit labels must name known paths.
  std::set<std::string> known;
  if (!cfg.auto_paths)
    for (const auto& p : cfg.paths) known.insert(p.label);
  for (const auto& p : cfg.extra_paths) known.insert(p.label);
  if (!cfg.auto_paths) {
    for (const auto& l : cfg.fit.basis)
      if (!known.count(l)) r.at("fit").fail("fit basis label '" + l + "' is not a path label");
    for (const auto& l : cfg.fit.symmetric)
      if (!known.count(l)) r.at("fit").fail("symmetric label '" + l + "' is not a path label");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void apply_environment(ExperimentConfig& cfg) {
  if (const char* dir = std::getenv("CLPATHS_OUTPUT_DIR"); dir && *dir) cfg.output.dir = dir;
  if (const char* th = std::getenv("CLPATHS_THREADS"); th && *th) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(th, &used);
      if (used != std::strlen(th) || n <= 0) throw std::invalid_argument(th);
      cfg.cl.threads = n;
    } catch (const std::exception&) {
      throw ConfigError(std::string("CLPATHS_THREADS must be a positive integer, got '") + th + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Serialization

Json complex_to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

Json density_to_json(const Density& d) {
  Json j;
  j["mode"] = d.mode() == Mode::Line ? "line" : "cylinder";
  j["gamma"] = d.gamma_power();
  j["poly_factors"] = Json::array();
  for (const auto& f : d.poly_factors()) j["poly_factors"].push_back({{"a", complex_to_json(f.a)}, {"alpha", f.alpha}});
  j["exp_poly"] = Json::object();
  for (const auto& [k, c] : d.exp_poly()) j["exp_poly"][std::to_string(k)] = complex_to_json(c);
  j["exp_principal"] = Json::array();
  for (const auto& p : d.exp_principal()) {
    Json dd = Json::array();
    for (const auto& c : p.d) dd.push_back(complex_to_json(c));
    j["exp_principal"].push_back({{"b", complex_to_json(p.b)}, {"d", dd}});
  }
  return j;
}

Density density_from_json(const Json& j) {
  const std::string source = "<density>";
  return read_density(Reader(j, "", nullptr, &source));
}

Json endpoint_to_json(const Endpoint& e) {
  return std::visit(
      [](const auto& v) -> Json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, FiniteZero>)
          return {{"type", "zero"}, {"z", complex_to_json(v.z)}};
        else if constexpr (std::is_same_v<V, InfinityRay>)
          return {{"type", "infinity"}, {"angle", v.angle}};
        else if constexpr (std::is_same_v<V, ImaginaryInfinity>)
          return {{"type", "imaginary_infinity"}, {"sign", v.sign}, {"x", v.x}};
        else
          return {{"type", "essential"}, {"b", complex_to_json(v.b)}, {"sector", v.sector}, {"angle", v.angle},
                  {"radius", v.radius}};
      },
      e);
}

Json path_to_json(const PathSpec& p) {
  Json j;
  j["label"] = p.label;
  Json wp = Json::array();
  for (const auto& w : p.waypoints) wp.push_back(complex_to_json(w));
  if (p.kind == PathSpec::Kind::Open) {
    j["kind"] = "open";
    j["start"] = endpoint_to_json(*p.start);
    j["end"] = endpoint_to_json(*p.end);
    j["waypoints"] = wp;
  } else {
    j["kind"] = "closed";
    j["waypoints"] = wp;
    j["winding"] = p.winding;
    j["enclosed"] = p.enclosed;
  }
  return j;
}

Json to_json(const ExperimentConfig& cfg) {
  Json j;
  j["version"] = kVersion;
  j["density"] = cfg.density_spec;
  j["observables"] = Json::array();
  for (const auto& o : cfg.observables) j["observables"].push_back(o.label());
  if (cfg.auto_paths) {
    j["paths"] = "auto";
  } else {
    j["paths"] = Json::array();
    for (const auto& p : cfg.paths) j["paths"].push_back(path_to_json(p));
  }
  j["extra_paths"] = Json::array();
  for (const auto& p : cfg.extra_paths) j["extra_paths"].push_back(path_to_json(p));
  j["normalize"] = cfg.normalize;
  const auto& q = cfg.quadrature;
  j["quadrature"] = {{"tol", q.tol},           {"rel_tol", q.rel_tol},   {"tail_eps", q.tail_eps},
                     {"max_extent", q.max_extent}, {"eps_path", q.eps_path}, {"max_intervals", q.max_intervals}};
  const auto& c = cfg.cl;
  Json starts = Json::array();
  for (const auto& s : c.start_points) starts.push_back(complex_to_json(s));
  j["cl"] = {{"n_walkers", c.n_walkers},
             {"dt", c.dt},
             {"t_burn", c.t_burn},
             {"t_measure", c.t_measure},
             {"seed", c.seed},
             {"adaptive", c.adaptive},
             {"dt_cap_factor", c.dt_cap_factor},
             {"start_points", starts},
             {"meas_interval", c.meas_interval},
             {"y_cap", c.y_cap},
             {"histogram",
              {{"enabled", c.histogram.enabled},
               {"nx", c.histogram.nx},
               {"ny", c.histogram.ny},
               {"replicas", c.histogram.replicas}}},
             {"trace_walkers", c.trace_walkers},
             {"trace_interval", c.trace_interval},
             {"threads", c.threads}};
  j["sde"] = {{"n_max", cfg.sde.n_max}, {"tol_rank", cfg.sde.tol_rank}};
  j["fit"] = {{"normalize", cfg.fit.cfg.normalize}, {"bootstrap", cfg.fit.cfg.bootstrap},
              {"seed", cfg.fit.cfg.seed},           {"rank_tol", cfg.fit.cfg.rank_tol},
              {"basis", cfg.fit.basis},             {"symmetric", cfg.fit.symmetric}};
  Json curves = Json::array();
  for (const auto& fc : cfg.flux_curves) {
    if (fc.cylinder_y) {
      curves.push_back({{"cylinder_y", *fc.cylinder_y}});
    } else {
      Json pts = Json::array();
      for (const auto& v : fc.vertices) pts.push_back(complex_to_json(v));
      curves.push_back({{"polygon", pts}});
    }
  }
  j["flux"] = {{"curves", curves}};
  j["output"] = {{"dir", cfg.output.dir}, {"formats", cfg.output.formats}};
  return j;
}

std::vector<PathSpec> experiment_paths(const ExperimentConfig& cfg) {
  std::vector<PathSpec> out = cfg.auto_paths ? spanning_paths(census(*cfg.density)) : cfg.paths;
  out.insert(out.end(), cfg.extra_paths.begin(), cfg.extra_paths.end());
  return out;
}

}  // namespace clpaths
