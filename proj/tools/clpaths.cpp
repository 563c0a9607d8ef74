#include <CLI11.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "clpaths/analysis.hpp"
#include "clpaths/config.hpp"
#include "clpaths/contour.hpp"
#include "clpaths/density.hpp"
#include "clpaths/errors.hpp"
#include "clpaths/langevin.hpp"
#include "clpaths/sde_solver.hpp"

using namespace clpaths;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Output

class Output {
 public:
  Output(const ExperimentConfig& cfg, std::string command)
      : cfg_(cfg), command_(std::move(command)), dir_(cfg.output.dir), resolved_(to_json(cfg)) {
    fs::create_directories(dir_);
    write_text("config.resolved.json", resolved_.dump(2) + "\n");
  }

  bool wants(const std::string& format) const {
    return std::find(cfg_.output.formats.begin(), cfg_.output.formats.end(), format) != cfg_.output.formats.end();
  }

  Json document(const Json& result) const {
    Json doc;
    doc["version"] = kVersion;
    doc["command"] = command_;
    doc["config"] = resolved_;
    doc["result"] = result;
    return doc;
  }

  std::string write_json(const std::string& name, const Json& result) const {
    return write_text(name, document(result).dump(2) + "\n");
  }

  // CSV with the version and the resolved config as comment lines.
  std::string write_csv(const std::string& name, const std::string& header,
                        const std::vector<std::string>& rows) const {
    std::ostringstream os;
    os << "# " << kVersion << "\n# command: " << command_ << "\n# config: " << resolved_.dump() << "\n"
       << header << "\n";
    for (const auto& r : rows) os << r << "\n";
    return write_text(name, os.str());
  }

  std::string write_text(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InputError("cannot write " + p.string());
    out << text;
    return p.string();
  }

  const fs::path& dir() const { return dir_; }
  const Json& resolved() const { return resolved_; }

 private:
  const ExperimentConfig& cfg_;
  std::string command_;
  fs::path dir_;
  Json resolved_;
};

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

Json located_to_json(const std::vector<LocatedOrder>& v) {
  Json out = Json::array();
  for (const auto& l : v) out.push_back({{"z", complex_to_json(l.location)}, {"order", l.order}});
  return out;
}

Json census_to_json(const Density& d) {
  const SingularityCensus c = census(d);
  Json j;
  j["mode"] = c.mode == Mode::Line ? "line" : "cylinder";
  j["finite_zeroes"] = located_to_json(c.finite_zeroes);
  j["poles"] = located_to_json(c.poles);
  j["essential_singularities"] = Json::array();
  for (const auto& b : c.essential_singularities) j["essential_singularities"].push_back(complex_to_json(b));
  j["generalized_zero_approaches"] = Json::array();
  for (const auto& e : c.generalized_zero_approaches) {
    Json ej = endpoint_to_json(e);
    ej["tag"] = describe(e);
    j["generalized_zero_approaches"].push_back(ej);
  }
  j["n_closed"] = c.n_closed;
  j["n_p_prime"] = c.n_p_prime;
  j["n_zero_approaches"] = c.n_zero_approaches;
  if (c.mode == Mode::Line) j["n_g"] = c.n_g;
  j["has_zeroes"] = c.has_zeroes;
  j["n_gamma"] = c.n_gamma;
  j["closed_form_n_gamma"] = closed_form_n_gamma(d);
  return j;
}

Json moment_vector_to_json(const MomentVector& m) {
  Json j;
  j["E"] = Json::object();
  for (const auto& [n, v] : m.E) j["E"][std::to_string(n)] = complex_to_json(v);
  j["F"] = Json::object();
  for (const auto& [l, v] : m.F) j["F"][std::to_string(l)] = complex_to_json(v);
  j["G"] = Json::object();
  for (const auto& [k, v] : m.G) j["G"][std::to_string(k.first) + "," + std::to_string(k.second)] = complex_to_json(v);
  return j;
}

Json record_to_json(const ExpectationRecord& r) {
  return {{"observable", r.observable.label()},
          {"mean", complex_to_json(r.mean)},
          {"err", complex_to_json(r.err)},
          {"n_samples", r.n_samples},
          {"tau_int", r.tau_int},
          {"mean_abs", r.mean_abs},
          {"decay_unverified", r.decay_unverified}};
}

ExpectationRecord record_from_json(const Json& j) {
  ExpectationRecord r;
  r.observable = Observable::parse(j.at("observable").get<std::string>());
  r.mean = {j.at("mean")[0].get<double>(), j.at("mean")[1].get<double>()};
  r.err = {j.at("err")[0].get<double>(), j.at("err")[1].get<double>()};
  r.n_samples = j.at("n_samples").get<std::uint64_t>();
  r.tau_int = j.at("tau_int").get<double>();
  r.mean_abs = j.value("mean_abs", 0.0);
  r.decay_unverified = j.value("decay_unverified", false);
  return r;
}

Json table_to_json(const FunctionalTable& t) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    Json cells = Json::array();
    for (std::size_t j = 0; j < t.observables.size(); ++j) {
      Json c = {{"observable", t.observables[j].label()}};
      if (t.ok(i, j)) {
        c["value"] = complex_to_json(t.values[i][j]);
        c["abs_err"] = t.errors[i][j];
      } else {
        c["failure"] = t.failures[i][j];
      }
      cells.push_back(c);
    }
    Json row = {{"label", t.row_labels[i]}, {"cells", cells}};
    if (i < t.norms.size()) row["norm"] = complex_to_json(t.norms[i]);
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::string> table_csv(const FunctionalTable& t) {
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < t.values.size(); ++i)
    for (std::size_t j = 0; j < t.observables.size(); ++j)
      rows.push_back(t.row_labels[i] + "," + t.observables[j].label() + "," +
                     (t.ok(i, j) ? num(t.values[i][j].real()) + "," + num(t.values[i][j].imag()) + "," +
                                       num(t.errors[i][j])
                                 : std::string("nan,nan,nan")));
  return rows;
}

Json fit_to_json(const FitResult& f) {
  Json coef = Json::array();
  for (std::size_t i = 0; i < f.coefficients.size(); ++i)
    coef.push_back({{"label", f.labels[i]},
                    {"value", complex_to_json(f.coefficients[i])},
                    {"error", complex_to_json(f.errors[i])},
                    {"bootstrap_error", complex_to_json(f.bootstrap_errors[i])}});
  Json cov = Json::array();
  for (const auto& row : f.covariance) {
    Json r = Json::array();
    for (const auto& c : row) r.push_back(complex_to_json(c));
    cov.push_back(r);
  }
  return {{"coefficients", coef}, {"covariance", cov},   {"chi2", f.chi2},
          {"dof", f.dof},         {"constraint_residual", f.constraint_residual},
          {"used", f.used},       {"skipped", f.skipped}};
}

std::vector<PathSpec> select_paths(const std::vector<PathSpec>& all, const std::vector<std::string>& labels) {
  std::vector<PathSpec> out;
  for (const auto& l : labels) {
    auto it = std::find_if(all.begin(), all.end(), [&](const PathSpec& p) { return p.label == l; });
    if (it == all.end()) throw ConfigError("no path labeled '" + l + "'");
    out.push_back(*it);
  }
  return out;
}

// Fit basis: the configured labels, or every path that is not an extra path.
std::vector<PathSpec> fit_basis(const ExperimentConfig& cfg, const std::vector<PathSpec>& all) {
  if (!cfg.fit.basis.empty()) return select_paths(all, cfg.fit.basis);
  return {all.begin(), all.end() - static_cast<std::ptrdiff_t>(cfg.extra_paths.size())};
}

void require_density(const ExperimentConfig& cfg) {
  if (!cfg.density) throw ConfigError("config has no density");
}

std::vector<Observable> require_observables(const ExperimentConfig& cfg) {
  if (cfg.observables.empty()) throw ConfigError("config lists no observables");
  return cfg.observables;
}

// ---------------------------------------------------------------------------
// Histogram files

void write_histogram(const Output& out, const CLResult& r) {
  const Histogram& h = r.histogram;
  std::vector<const Histogram*> blocks{&h};
  for (const auto& rep : r.replicas) blocks.push_back(&rep);
  const fs::path bin = out.dir() / "histogram.bin";
  std::ofstream f(bin, std::ios::binary);
  if (!f) throw InputError("cannot write " + bin.string());
  for (const Histogram* b : blocks)
    for (const auto* ch : {&b->counts(), &b->vx_sums(), &b->vy_sums()})
      f.write(reinterpret_cast<const char*>(ch->data()), static_cast<std::streamsize>(ch->size() * sizeof(double)));
  Json header = {{"file", "histogram.bin"},
                 {"dtype", "float64"},
                 {"byte_order", std::endian::native == std::endian::little ? "little" : "big"},
                 {"nx", h.nx()},
                 {"ny", h.ny()},
                 {"x_lo", h.x_lo()},
                 {"x_hi", h.x_hi()},
                 {"y_lo", h.y_lo()},
                 {"y_hi", h.y_hi()},
                 {"periodic_x", h.periodic_x()},
                 {"total", h.total()},
                 {"replicas", r.replicas.size()},
                 {"channels", {"counts", "vx_sum", "vy_sum"}},
                 {"layout", "block, channel, iy, ix (ix fastest); block 0 holds all walkers, blocks 1.. the replicas"}};
  out.write_json("histogram.json", header);
}

CLResult read_histogram(const fs::path& run_dir) {
  const fs::path hp = run_dir / "histogram.json";
  std::ifstream hin(hp);
  if (!hin) throw InputError("no histogram in " + run_dir.string() + " (run simulate with the histogram enabled)");
  const Json h = Json::parse(hin).at("result");
  const int nx = h.at("nx"), ny = h.at("ny");
  const std::size_t n_rep = h.at("replicas");
  const std::size_t cells = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  std::ifstream bin(run_dir / h.at("file").get<std::string>(), std::ios::binary);
  if (!bin) throw InputError("missing histogram data file in " + run_dir.string());
  auto block = [&]() {
    std::vector<std::vector<double>> ch(3, std::vector<double>(cells));
    for (auto& c : ch) {
      bin.read(reinterpret_cast<char*>(c.data()), static_cast<std::streamsize>(cells * sizeof(double)));
      if (!bin) throw InputError("histogram data file is truncated");
    }
    return Histogram::from_channels(nx, ny, h.at("x_lo"), h.at("x_hi"), h.at("y_lo"), h.at("y_hi"),
                                    h.at("periodic_x"), std::move(ch[0]), std::move(ch[1]), std::move(ch[2]));
  };
  CLResult r;
  r.histogram = block();
  for (std::size_t k = 0; k < n_rep; ++k) r.replicas.push_back(block());
  if (!(r.histogram.total() > 0)) throw InputError("histogram in " + run_dir.string() + " is empty");
  return r;
}

std::vector<ExpectationRecord> read_records(const fs::path& run_dir) {
  std::ifstream in(run_dir / "records.json");
  if (!in) throw InputError("no records.json in " + run_dir.string());
  std::vector<ExpectationRecord> out;
  const Json doc = Json::parse(in);
  for (const auto& j : doc.at("result").at("records")) out.push_back(record_from_json(j));
  return out;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_analyze(const ExperimentConfig& cfg) {
  require_density(cfg);
  Output out(cfg, "analyze");
  const Json res = census_to_json(*cfg.density);
  out.write_json("analyze.json", res);
  std::cout << res.dump(2) << "\n";
  return 0;
}

int cmd_sde(const ExperimentConfig& cfg) {
  require_density(cfg);
  const Density& d = *cfg.density;
  Output out(cfg, "sde");
  const DimensionReport rep = dimension_check(d, cfg.sde.n_max, cfg.sde.tol_rank);
  Json res;
  res["n_gamma"] = rep.n_gamma;
  res["n_sde"] = rep.n_sde.back();
  res["stabilized"] = rep.stabilized;
  res["pass"] = rep.pass;
  res["n_max"] = rep.n_max;
  res["n_sde_per_n_max"] = rep.n_sde;
  if (rep.exact_n_sde) res["exact"] = {{"n_max", rep.exact_n_max}, {"n_sde", *rep.exact_n_sde}};
  res["basis"] = Json::array();
  for (const auto& v : rep.final.basis) res["basis"].push_back(moment_vector_to_json(v));

  // Nullspace membership of the spanning-path moments.
  const SdeSystem sys = build_system(d, rep.n_max.back());
  Json paths = Json::array();
  std::vector<MomentVector> moments;
  int failures = 0;
  for (const auto& p : experiment_paths(cfg)) {
    Json pj = {{"label", p.label}};
    try {
      const MomentVector m = moments_of_functional(d, p, rep.n_max.back(), cfg.quadrature);
      const auto r = residuals(sys, m);
      pj["max_residual"] = r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
      moments.push_back(m);
    } catch (const NumericalError& e) {
      pj["failure"] = e.what();
      ++failures;
    }
    paths.push_back(pj);
  }
  res["residuals"] = paths;
  if (!moments.empty()) res["path_moment_rank"] = moment_rank(sys, moments);
  out.write_json("sde.json", res);
  std::cout << res.dump(2) << "\n";
  return rep.pass && failures == 0 ? 0 : 1;
}

int cmd_integrate(const ExperimentConfig& cfg) {
  require_density(cfg);
  const auto obs = require_observables(cfg);
  Output out(cfg, "integrate");
  const FunctionalTable t = functional_table(*cfg.density, experiment_paths(cfg), obs, cfg.quadrature, cfg.normalize);
  const Json res = {{"normalized", cfg.normalize}, {"rows", table_to_json(t)}};
  if (out.wants("json")) out.write_json("integrate.json", res);
  if (out.wants("csv")) out.write_csv("integrate.csv", "label,observable,re,im,abs_err", table_csv(t));
  std::cout << res.dump(2) << "\n";
  return t.all_ok() ? 0 : 1;
}

CLResult simulate(const ExperimentConfig& cfg, const Output& out, const std::vector<Observable>& obs) {
  const CLResult r = run(*cfg.density, obs, cfg.cl);
  Json recs = Json::array();
  std::vector<std::string> rows;
  for (const auto& rec : r.records) {
    recs.push_back(record_to_json(rec));
    rows.push_back(rec.observable.label() + "," + num(rec.mean.real()) + "," + num(rec.mean.imag()) + "," +
                   num(rec.err.real()) + "," + num(rec.err.imag()) + "," + std::to_string(rec.n_samples) + "," +
                   num(rec.tau_int) + "," + (rec.decay_unverified ? "1" : "0"));
  }
  const Json res = {{"records", recs}, {"steps", r.steps}, {"min_dt_eff", r.min_dt_eff}};
  out.write_json("records.json", res);
  if (out.wants("csv"))
    out.write_csv("records.csv", "observable,re,im,err_re,err_im,n_samples,tau_int,decay_unverified", rows);
  if (cfg.cl.histogram.enabled) write_histogram(out, r);
  if (!r.traces.empty()) {
    std::vector<std::string> tr;
    for (const auto& p : r.traces)
      tr.push_back(std::to_string(p.walker) + "," + num(p.t) + "," + num(p.z.real()) + "," + num(p.z.imag()));
    out.write_csv("traces.csv", "walker,t,x,y", tr);
  }
  return r;
}

int cmd_simulate(const ExperimentConfig& cfg) {
  require_density(cfg);
  const auto obs = require_observables(cfg);
  Output out(cfg, "simulate");
  const CLResult r = simulate(cfg, out, obs);
  Json recs = Json::array();
  for (const auto& rec : r.records) recs.push_back(record_to_json(rec));
  std::cout << Json{{"records", recs}, {"steps", r.steps}}.dump(2) << "\n";
  return 0;
}

int cmd_fit(const ExperimentConfig& cfg, const std::string& run_dir) {
  require_density(cfg);
  const auto obs = require_observables(cfg);
  Output out(cfg, "fit");
  const std::vector<ExpectationRecord> records = run_dir.empty() ? simulate(cfg, out, obs).records : read_records(run_dir);
  const auto all = experiment_paths(cfg);
  const FunctionalTable basis = functional_table(*cfg.density, fit_basis(cfg, all), obs, cfg.quadrature,
                                                 cfg.fit.cfg.normalize);
  Json res;
  res["fit"] = fit_to_json(fit(records, basis, cfg.fit.cfg));
  if (!cfg.fit.symmetric.empty()) {
    const FunctionalTable sym =
        functional_table(*cfg.density, select_paths(all, cfg.fit.symmetric), obs, cfg.quadrature, true);
    const SymmetricFitResult s = fit_symmetric(records, sym, cfg.fit.cfg);
    res["symmetric"] = {{"labels", cfg.fit.symmetric}, {"b", s.b},       {"error", s.error},
                        {"bootstrap_error", s.bootstrap_error}, {"chi2", s.chi2}, {"dof", s.dof}};
  }
  out.write_json("fit.json", res);
  std::cout << res.dump(2) << "\n";
  return 0;
}

int cmd_flux(const ExperimentConfig& cfg, const std::string& run_dir) {
  require_density(cfg);
  if (cfg.flux_curves.empty()) throw ConfigError("flux: config lists no curves (flux.curves)");
  Output out(cfg, "flux");
  CLResult r;
  if (run_dir.empty()) {
    if (!cfg.cl.histogram.enabled) throw ConfigError("flux: the histogram must be enabled");
    std::vector<Observable> obs = cfg.observables;
    r = simulate(cfg, out, obs);
  } else {
    r = read_histogram(run_dir);
  }
  Json curves = Json::array();
  std::vector<std::string> rows;
  for (std::size_t k = 0; k < cfg.flux_curves.size(); ++k) {
    const FluxResult f = flux(r, *cfg.density, cfg.flux_curves[k]);
    curves.push_back({{"index", k}, {"net_flux", f.net_flux}, {"err", f.err}, {"replica_flux", f.replica_flux}});
    rows.push_back(std::to_string(k) + "," + num(f.net_flux) + "," + num(f.err));
  }
  const Json res = {{"curves", curves}};
  out.write_json("flux.json", res);
  if (out.wants("csv")) out.write_csv("flux.csv", "curve,net_flux,err", rows);
  std::cout << res.dump(2) << "\n";
  return 0;
}

int cmd_table1(const ExperimentConfig& cfg) {
  require_density(cfg);
  const auto obs = require_observables(cfg);
  Output out(cfg, "table1");
  const auto all = experiment_paths(cfg);
  const FunctionalTable table = functional_table(*cfg.density, all, obs, cfg.quadrature, true);
  const FunctionalTable raw = functional_table(*cfg.density, all, {Observable::monomial(0)}, cfg.quadrature, false);
  const CLResult r = simulate(cfg, out, obs);
  const FunctionalTable basis = functional_table(*cfg.density, fit_basis(cfg, all), obs, cfg.quadrature, true);
  const FitResult f = fit(r.records, basis, cfg.fit.cfg);

  // Column order of the text table: fit basis first, then the other paths.
  FunctionalTable shown = basis;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (std::find(basis.row_labels.begin(), basis.row_labels.end(), all[i].label) == basis.row_labels.end()) {
      shown.row_labels.push_back(table.row_labels[i]);
      shown.values.push_back(table.values[i]);
      shown.errors.push_back(table.errors[i]);
      shown.failures.push_back(table.failures[i]);
      shown.norms.push_back(table.norms[i]);
    }
  std::string text = table1_text(shown, r.records, f);

  Json res;
  res["functionals"] = table_to_json(table);
  res["normalizations"] = Json::array();
  for (std::size_t i = 0; i < all.size(); ++i)
    res["normalizations"].push_back({{"label", all[i].label}, {"value", complex_to_json(raw.values[i][0])}});
  Json recs = Json::array();
  for (const auto& rec : r.records) recs.push_back(record_to_json(rec));
  res["cl"] = recs;
  res["fit"] = fit_to_json(f);
  if (!cfg.fit.symmetric.empty()) {
    const FunctionalTable sym = functional_table(*cfg.density, select_paths(all, cfg.fit.symmetric), obs,
                                                 cfg.quadrature, true);
    const SymmetricFitResult s = fit_symmetric(r.records, sym, cfg.fit.cfg);
    res["symmetric"] = {{"labels", cfg.fit.symmetric}, {"b", s.b},       {"error", s.error},
                        {"bootstrap_error", s.bootstrap_error}, {"chi2", s.chi2}, {"dof", s.dof}};
    text += "b = " + format_with_error(s.b, s.bootstrap_error) + " (symmetric form over " + cfg.fit.symmetric[0] +
            ", " + cfg.fit.symmetric[1] + ", " + cfg.fit.symmetric[2] + ")\n";
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::ostringstream os;
    os.precision(4);
    os << std::fixed << "(" << all[i].label << ", 1) = " << raw.values[i][0].real() << " "
       << (raw.values[i][0].imag() < 0 ? "- " : "+ ") << std::abs(raw.values[i][0].imag()) << "i\n";
    text += os.str();
  }
  out.write_json("table1.json", res);
  out.write_text("table1.txt", text);
  std::cout << text;
  return 0;
}

int cmd_plotdata(const ExperimentConfig& cfg, const std::string& run_dir) {
  require_density(cfg);
  if (run_dir.empty()) throw ConfigError("plotdata needs --run DIR with the output of simulate");
  Output out(cfg, "plotdata");
  const CLResult r = read_histogram(run_dir);
  const Histogram& h = r.histogram;
  std::vector<std::string> grid;
  const double norm = 1.0 / (h.total() * h.dx() * h.dy());
  for (int iy = 0; iy < h.ny(); ++iy)
    for (int ix = 0; ix < h.nx(); ++ix) {
      const cplx c = h.cell_center(ix, iy);
      const double n = h.count(ix, iy);
      grid.push_back(std::to_string(ix) + "," + std::to_string(iy) + "," + num(c.real()) + "," + num(c.imag()) +
                     "," + num(n * norm) + "," + (n > 0 ? num(h.sum_vx(ix, iy) / n) : "0") + "," +
                     (n > 0 ? num(h.sum_vy(ix, iy) / n) : "0"));
    }
  std::vector<std::string> files;
  files.push_back(out.write_csv("grid.csv", "ix,iy,x,y,P,vx_mean,vy_mean", grid));

  const fs::path traces = fs::path(run_dir) / "traces.csv";
  if (fs::exists(traces)) {
    std::ifstream in(traces);
    std::vector<std::string> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (header) {
        header = false;
        continue;
      }
      rows.push_back(line);
    }
    files.push_back(out.write_csv("traces.csv", "walker,t,x,y", rows));
  }

  std::vector<std::string> overlay;
  for (const auto& p : experiment_paths(cfg)) {
    const auto nodes = path_nodes(p);
    for (std::size_t k = 0; k < nodes.size(); ++k)
      overlay.push_back(p.label + "," + std::to_string(k) + "," + num(nodes[k].real()) + "," + num(nodes[k].imag()));
  }
  files.push_back(out.write_csv("paths.csv", "label,index,x,y", overlay));
  for (const auto& f : files) std::cout << f << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path functionals, Schwinger-Dyson moments and complex Langevin for 1-D complex densities"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  std::string config_path, run_dir;
  auto add = [&](const std::string& name, const std::string& help, bool with_run) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "experiment config (JSON)")->required();
    if (with_run) sub->add_option("--run", run_dir, "output directory of a previous simulate run");
    return sub;
  };
  auto* analyze = add("analyze", "singularity census and N_Gamma", false);
  auto* sde = add("sde", "truncated Schwinger-Dyson system, N_SDE and nullspace membership", false);
  auto* integrate = add("integrate", "path functionals on the observables", false);
  auto* simulate_cmd = add("simulate", "complex Langevin run", false);
  auto* fit_cmd = add("fit", "decompose CL records on path functionals", true);
  auto* flux_cmd = add("flux", "net flux of the stationary current through curves", true);
  auto* table1 = add("table1", "functional table, CL column and fit", false);
  auto* plotdata = add("plotdata", "gridded density, traces and path overlays as CSV", true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg = load_config(config_path);
    apply_environment(cfg);
    if (analyze->parsed()) return cmd_analyze(cfg);
    if (sde->parsed()) return cmd_sde(cfg);
    if (integrate->parsed()) return cmd_integrate(cfg);
    if (simulate_cmd->parsed()) return cmd_simulate(cfg);
    if (fit_cmd->parsed()) return cmd_fit(cfg, run_dir);
    if (flux_cmd->parsed()) return cmd_flux(cfg, run_dir);
    if (table1->parsed()) return cmd_table1(cfg);
    if (plotdata->parsed()) return cmd_plotdata(cfg, run_dir);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed run file: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
