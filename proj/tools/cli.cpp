#include "cli.hpp"

#include "ctk/acceptance.hpp"
#include "ctk/certify.hpp"
#include "ctk/json_io.hpp"
#include "ctk/measures.hpp"
#include "ctk/models.hpp"
#include "ctk/odesim.hpp"
#include "ctk/pairings.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace ctk::cli {

namespace {

struct Common {
  std::string p = "2";
  std::string weight = "identity";
  std::optional<double> rate;
  std::uint64_t seed = 1;
  std::size_t samples = 1000;
  std::string out;
  std::string format = "json";
  bool oracle = false;
  std::string domain;
  std::string condition;
  std::string x0;
  double horizon = 10.0;
  double dt = 0.0;
  bool pair = false;
  bool falsify = false;
  bool quick = false;
  double mutation = 0.0;
  std::string file;
};

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::vector<double> parse_csv(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size() && item.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("not a number: \"" + item + "\"");
    }
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

NormSpec parse_norm(const Common& c) {
  const Exponent p = exponent_from_string(c.p);
  if (c.weight == "identity" || c.weight.empty()) return NormSpec::identity(p);
  if (c.weight.rfind("diag:", 0) == 0) return NormSpec::diagonal(p, to_vector(parse_csv(c.weight.substr(5))));
  if (c.weight.rfind("general:", 0) == 0) return NormSpec::general(p, matrix_from_json(read_json_file(c.weight.substr(8))));
  throw InputError("--weight must be identity, diag:<csv> or general:<file>");
}

std::vector<Vector> parse_states(const std::string& s, Index n) {
  std::vector<Vector> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const Vector v = to_vector(parse_csv(item));
    if (v.size() != n) throw InputError("initial state \"" + item + "\" has dimension " + std::to_string(v.size()) +
                                        ", expected " + std::to_string(n));
    out.push_back(v);
  }
  return out;
}

Box parse_domain(const std::string& s, Index n) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw InputError("--domain must be lo:hi or lo1,..:hi1,..");
  auto side = [&](const std::string& part) {
    const auto v = parse_csv(part);
    if (v.size() == 1) return Vector::Constant(n, v[0]).eval();
    if (static_cast<Index>(v.size()) != n) throw InputError("--domain has the wrong dimension");
    return to_vector(v);
  };
  Box b{side(s.substr(0, colon)), side(s.substr(colon + 1))};
  b.validate();
  return b;
}

double require_rate(const Common& c) {
  if (!c.rate) throw InputError("--rate is required for this command");
  return *c.rate;
}

struct Model {
  std::string type;
  VectorField field;
  Box domain;
  std::optional<HopfieldNetwork> hopfield;
  std::optional<SeparableSystem> separable;
  std::optional<ComparisonSpec> comparison;
  std::optional<LinearInterconnection> linear_ic;
};

Model load_model(const Common& c) {
  const Json j = read_json_file(c.file);
  if (!j.is_object() || !j.contains("type")) throw InputError(c.file + ": model needs a \"type\"");
  Model m;
  m.type = j.at("type").get<std::string>();
  double lo = 0.0, hi = 1.0;
  if (m.type == "hopfield") {
    m.hopfield = hopfield_from_json(j);
    m.field = m.hopfield->field();
    lo = -5.0;
    hi = 5.0;
  } else if (m.type == "separable_monotone" || m.type == "separable_positive") {
    m.separable = separable_from_json(j);
    m.field = m.separable->field();
    hi = 2.0;
  } else if (m.type == "comparison") {
    m.comparison = comparison_from_json(j);
    m.field = m.comparison->field();
    hi = 3.0;
  } else if (m.type == "linear_interconnection") {
    m.linear_ic = linear_interconnection_from_json(j);
    m.comparison = m.linear_ic->comparison();
    m.field = m.linear_ic->plant().field;
    lo = -1.0;
  } else if (m.type == "linear") {
    if (!j.contains("A")) throw InputError("linear model needs \"A\"");
    const Matrix a = matrix_from_json(j.at("A"));
    require_square(a, "A");
    m.field = linear_field(a);
    lo = -1.0;
  } else {
    throw InputError("unknown model type \"" + m.type + "\"");
  }
  const Index n = m.field.dim;
  m.domain = j.contains("domain") ? box_from_json(j.at("domain")) : Box::uniform(n, lo, hi);
  if (!c.domain.empty()) m.domain = parse_domain(c.domain, n);
  if (m.domain.dim() != n) throw InputError("domain dimension does not match the model");
  return m;
}

CheckOptions check_options(const Common& c) {
  CheckOptions co;
  co.seed = c.seed;
  co.samples = c.samples;
  co.sampler.seed = c.seed;
  return co;
}

TrajectoryOptions trajectory_options(const Common& c) {
  TrajectoryOptions to;
  to.horizon = c.horizon;
  to.seed = c.seed;
  return to;
}

void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw InputError("cannot write " + c.out);
  f << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

int cmd_measure(const Common& c, std::ostream& out) {
  Json j = read_json_file(c.file);
  if (j.is_object() && j.contains("A")) j = j.at("A");
  const Matrix a = matrix_from_json(j);
  require_square(a, "matrix");
  const NormSpec ns = parse_norm(c);
  SamplerOptions so;
  so.seed = c.seed;
  const auto mu = matrix_measure(a, ns, so);
  const auto mup = conic_measure(a, ns, so);
  Json r = {{"command", "measure"},
            {"seed", c.seed},
            {"norm", to_json(ns)},
            {"mu", mu.value},
            {"mu_method", to_string(mu.method)},
            {"mu_bound", to_string(mu.bound)},
            {"mu_plus", mup.value},
            {"mu_plus_method", to_string(mup.method)},
            {"mu_plus_bound", to_string(mup.bound)}};
  if (c.oracle) {
    const auto o = conic_measure_limit_oracle(a, ns, {}, so);
    r["oracle"] = {{"mu_plus", o.value},
                   {"gap", std::abs(o.value - mup.value)},
                   {"nonmonotone_in_h", o.evidence.nonmonotone_in_h},
                   {"converged", o.evidence.extrapolation_converged},
                   {"samples", o.evidence.samples}};
  }
  if (c.format == "csv") {
    std::ostringstream os;
    os << std::setprecision(17) << "mu,mu_plus\n" << mu.value << "," << mup.value << "\n";
    emit(c, os.str(), out);
  } else {
    emit(c, dump(r), out);
  }
  return ok;
}

Vector eta_from_norm(const NormSpec& ns, Index n) {
  if (ns.kind() == WeightKind::identity) return Vector::Ones(n);
  if (ns.kind() == WeightKind::diagonal) return std::get<DiagonalWeight>(ns.weight()).eta;
  throw InputError("eta conditions take --weight diag:<eta>");
}

int verdict(const Certificate& cert) { return cert.certified() ? ok : refuted; }

int cmd_certify(const Common& c, std::ostream& out) {
  const Model m = load_model(c);
  const NormSpec ns = parse_norm(c);
  const auto co = check_options(c);
  const auto to = trajectory_options(c);
  const Index n = m.field.dim;
  std::string id = c.condition;
  if (id.empty()) {
    if (m.hopfield) id = "hopfield";
    else if (m.separable) id = "separable";
    else if (m.comparison && m.comparison->mode == ComparisonSpec::Mode::matrosov) id = condition::comparison_small_gain;
    else if (m.comparison) id = "interconnection";
    else id = condition::one_sided_lipschitz;
  }
  Json r = {{"command", "certify"}, {"model", m.type}, {"seed", c.seed}};
  int code = ok;
  auto single = [&](const Certificate& cert) {
    r["certificate"] = to_json(cert);
    code = verdict(cert);
  };
  const auto pairs = [&] { return sample_pairs(m.domain, 6, false, c.seed); };
  auto initial_states = [&] {
    std::vector<Vector> xs;
    for (const auto& [x, y] : sample_pairs(m.domain, 6, false, c.seed)) xs.push_back(x);
    return xs;
  };
  if (id == "hopfield") {
    if (!m.hopfield) throw InputError("condition hopfield needs a hopfield model");
    HopfieldOptions ho;
    ho.domain = m.domain;
    ho.check = co;
    ho.horizon = c.horizon;
    const auto h = hopfield_certificate(*m.hopfield, ns.exponent(), ho);
    r["hopfield"] = to_json(h);
    code = h.certified() ? ok : refuted;
  } else if (id == "separable" || id == condition::separable_incremental || id == condition::separable_structure ||
             id == condition::separable_positive || id == condition::separable_positive_structure) {
    if (!m.separable) throw InputError("condition " + id + " needs a separable model");
    const auto rep = separable_contraction(*m.separable, ns, require_rate(c), m.domain, co);
    if (id == "separable") {
      r["dissipation"] = to_json(rep.dissipation);
      r["structure"] = to_json(rep.structure);
      r["notes"] = rep.notes;
      code = rep.dissipation.certified() && rep.structure.certified() ? ok : refuted;
    } else {
      single(id == rep.dissipation.condition ? rep.dissipation : rep.structure);
      if (id != rep.dissipation.condition && id != rep.structure.condition)
        throw InputError("condition " + id + " does not match the model flavor");
    }
  } else if (id == condition::comparison_small_gain) {
    if (!m.comparison) throw InputError("condition " + id + " needs a comparison model");
    single(matrosov_certify(*m.comparison, ns, require_rate(c), m.domain, co));
  } else if (id == "interconnection" || id == condition::interconnection_pairing ||
             id == condition::interconnection_average_jacobian) {
    if (!m.comparison) throw InputError("condition " + id + " needs a comparison model");
    const auto rep = interconnection_certify(*m.comparison, ns, require_rate(c), m.domain, co);
    if (id == "interconnection") {
      r["interconnection"] = to_json(rep);
      code = rep.pairing.certified() && (!rep.jacobian || rep.jacobian->certified()) ? ok : refuted;
    } else if (id == condition::interconnection_pairing || !rep.jacobian) {
      single(rep.pairing);
    } else {
      single(*rep.jacobian);
    }
  } else if (id == condition::jacobian_conic_measure) {
    single(check_jacobian_conic(m.field, m.domain, ns, require_rate(c), co));
  } else if (id == condition::ordered_one_sided_lipschitz || id == condition::one_sided_lipschitz) {
    single(check_one_sided_lipschitz(m.field, ns, require_rate(c), m.domain, id == condition::ordered_one_sided_lipschitz,
                                     co));
  } else if (id == condition::dini_contraction) {
    single(check_dini_contraction(m.field, ns, require_rate(c), pairs(), to));
  } else if (id == condition::trajectory_contraction) {
    single(check_trajectory_contraction(m.field, ns, require_rate(c), m.domain, pairs(), to));
  } else if (id == condition::l1_eta_incremental || id == condition::l1_eta_positive) {
    single(check_l1_eta(m.field, eta_from_norm(ns, n), require_rate(c), id == condition::l1_eta_incremental, m.domain,
                        co));
  } else if (id == condition::linf_eta_incremental || id == condition::linf_eta_positive) {
    single(check_linf_eta(m.field, eta_from_norm(ns, n), require_rate(c), id == condition::linf_eta_incremental,
                          m.domain, co));
  } else if (id == condition::equilibrium_pairing) {
    single(check_equilibrium_contraction(m.field, ns, require_rate(c), m.domain, co, c.horizon));
  } else if (id == condition::equilibrium_trajectory) {
    single(check_equilibrium_trajectory(m.field, ns, require_rate(c), initial_states(), to));
  } else if (id == condition::equilibrium_dini) {
    single(check_equilibrium_dini(m.field, ns, require_rate(c), initial_states(), to));
  } else if (id == condition::factored_conic) {
    single(check_factored_conic(m.field, ns, require_rate(c), m.domain, co));
  } else {
    throw InputError("unknown condition \"" + id + "\"");
  }
  r["passed"] = code == ok;
  emit(c, dump(r), out);
  return code;
}

int cmd_simulate(const Common& c, std::ostream& out) {
  const Model m = load_model(c);
  const NormSpec ns = parse_norm(c);
  const Index n = m.field.dim;
  if (c.x0.empty()) throw InputError("--x0 is required");
  const auto states = parse_states(c.x0, n);
  if (!(c.horizon > 0)) throw InputError("--horizon must be positive");
  auto norm = [&](const Vector& v) { return weighted_norm(v, ns); };
  std::ostringstream os;
  os << std::setprecision(12);
  Json runs = Json::array();

  auto grid = [&](const Trajectory& tr) {
    std::vector<double> ts;
    if (c.dt > 0) {
      for (double t = 0.0; t <= c.horizon + 1e-12 * c.horizon; t += c.dt) ts.push_back(std::min(t, c.horizon));
    } else {
      ts = tr.times();
    }
    return ts;
  };

  if (c.pair) {
    if (states.size() != 2) throw InputError("--pair needs exactly two initial states");
    const auto tr = flow(stack_pair(m.field), 0.0, stack(states[0], states[1]), c.horizon);
    if (!tr.ok()) throw NumericalError("simulate: " + tr.message);
    const double d0 = norm(states[0] - states[1]);
    if (c.format == "csv") {
      os << "t";
      for (Index i = 0; i < n; ++i) os << ",x" << i + 1;
      for (Index i = 0; i < n; ++i) os << ",y" << i + 1;
      os << ",distance" << (c.rate ? ",envelope" : "") << "\n";
    }
    Json rows = Json::array();
    for (double t : grid(tr)) {
      const Vector z = tr.state_at(t);
      const double d = norm(top_half(z) - bottom_half(z));
      if (c.format == "csv") {
        os << t;
        for (Index i = 0; i < 2 * n; ++i) os << "," << z(i);
        os << "," << d;
        if (c.rate) os << "," << std::exp(*c.rate * t) * d0;
        os << "\n";
      } else {
        Json row = {{"t", t}, {"x", to_json(top_half(z))}, {"y", to_json(bottom_half(z))}, {"distance", d}};
        if (c.rate) row["envelope"] = std::exp(*c.rate * t) * d0;
        rows.push_back(row);
      }
    }
    runs.push_back(rows);
  } else {
    if (c.format == "csv") {
      os << "run,t";
      for (Index i = 0; i < n; ++i) os << ",x" << i + 1;
      os << ",norm,dini\n";
    }
    for (std::size_t r = 0; r < states.size(); ++r) {
      const auto tr = flow(m.field, 0.0, states[r], c.horizon);
      if (!tr.ok()) throw NumericalError("simulate: " + tr.message);
      Json rows = Json::array();
      const auto ts = grid(tr);
      for (std::size_t k = 0; k < ts.size(); ++k) {
        const double t = ts[k];
        const Vector x = tr.state_at(t);
        // Forward Dini derivative of the norm at integrator nodes.
        std::optional<double> dini;
        if (c.dt <= 0 && k + 1 < tr.size()) dini = forward_dini(tr, k, norm).value;
        if (c.format == "csv") {
          os << r << "," << t;
          for (Index i = 0; i < n; ++i) os << "," << x(i);
          os << "," << norm(x) << ",";
          if (dini) os << *dini;
          os << "\n";
        } else {
          rows.push_back({{"t", t}, {"x", to_json(x)}, {"norm", norm(x)}, {"dini", dini ? Json(*dini) : Json()}});
        }
      }
      runs.push_back(rows);
    }
  }
  if (c.format == "csv") {
    emit(c, os.str(), out);
  } else {
    emit(c, dump({{"command", "simulate"}, {"model", m.type}, {"seed", c.seed}, {"norm", to_json(ns)}, {"runs", runs}}),
         out);
  }
  return ok;
}

int cmd_hopfield(const Common& c, std::ostream& out) {
  const Model m = load_model(c);
  if (!m.hopfield) throw InputError("hopfield command needs a hopfield model");
  HopfieldOptions ho;
  ho.domain = m.domain;
  ho.check = check_options(c);
  ho.horizon = c.horizon;
  const auto cert = hopfield_certificate(*m.hopfield, exponent_from_string(c.p), ho);
  Json r = {{"command", "hopfield"}, {"seed", c.seed}, {"certificate", to_json(cert)}};
  if (cert.contracting && m.hopfield->input.is_constant()) {
    const auto states = c.x0.empty() ? std::vector<Vector>{} : parse_states(c.x0, m.field.dim);
    const auto eq = hopfield_equilibrium(*m.hopfield, cert, states);
    Json limits = Json::array();
    for (const auto& l : eq.limits) limits.push_back(to_json(l));
    r["equilibrium"] = {{"x_star", to_json(eq.x_star)},
                        {"residual", eq.residual},
                        {"newton_iterations", eq.newton_iterations},
                        {"settle_time", eq.settle_time},
                        {"max_increase_distance", eq.max_increase_distance},
                        {"max_increase_vector_field", eq.max_increase_vector_field},
                        {"lyapunov_nonincreasing", eq.lyapunov_nonincreasing},
                        {"limits", limits}};
  }
  emit(c, dump(r), out);
  return cert.certified() ? ok : refuted;
}

int cmd_iss(const Common& c, std::ostream& out) {
  const Model m = load_model(c);
  if (!m.comparison) throw InputError("iss command needs a comparison or linear_interconnection model");
  const NormSpec ns = parse_norm(c);
  const double rate = require_rate(c);
  const auto co = check_options(c);
  const ComparisonSpec& spec = *m.comparison;
  const Index n = spec.dim();
  Box cert_domain = m.domain;
  if (m.linear_ic) cert_domain = Box::uniform(n, 0.0, 10.0);
  Certificate cert;
  Json r = {{"command", "iss"}, {"model", m.type}, {"seed", c.seed}, {"c", rate}};
  if (spec.mode == ComparisonSpec::Mode::matrosov) {
    cert = matrosov_certify(spec, ns, rate, cert_domain, co);
  } else {
    const auto rep = interconnection_certify(spec, ns, rate, cert_domain, co);
    cert = rep.pairing;
    r["interconnection"] = to_json(rep);
  }
  r["certificate"] = to_json(cert);
  const IssPlant plant = m.linear_ic ? m.linear_ic->plant() : comparison_plant(spec);
  const auto states = c.x0.empty() ? std::vector<Vector>{Vector::Ones(n)} : parse_states(c.x0, n);
  IssOptions io;
  io.require_certificate = !c.falsify;
  Json runs = Json::array();
  bool passed = true;
  for (const auto& x0 : states) {
    const auto rep = simulate_iss(spec, plant, x0, c.horizon, ns, rate, &cert, io);
    Json jr = to_json(rep);
    jr["x0"] = to_json(x0);
    runs.push_back(jr);
    passed = passed && rep.passed();
  }
  r["runs"] = runs;
  r["passed"] = passed;
  emit(c, dump(r), out);
  return passed ? ok : refuted;
}

int cmd_selftest(const Common& c, std::ostream& out) {
  acceptance::Options o;
  o.quick = c.quick;
  o.mutation = c.mutation;
  o.seed = c.seed;
  const auto results = acceptance::run_all(o);
  std::ostringstream os;
  std::size_t passed = 0;
  for (const auto& res : results) {
    os << acceptance::format_line(res) << "\n";
    if (res.passed) ++passed;
  }
  os << passed << "/" << results.size() << " criteria passed\n";
  emit(c, os.str(), out);
  return passed == results.size() ? ok : refuted;
}

void add_common(CLI::App* sub, Common& c, bool model_file) {
  sub->add_option("--p", c.p, "norm exponent: 1, 2, ..., inf")->capture_default_str();
  sub->add_option("--weight", c.weight, "identity | diag:<csv> | general:<json matrix file>")->capture_default_str();
  sub->add_option("--rate", c.rate, "rate: b for one-sided bounds, c for decay conditions");
  sub->add_option("--seed", c.seed, "seed for every sampler")->capture_default_str();
  sub->add_option("--samples", c.samples, "samples per check")->capture_default_str();
  sub->add_option("--out", c.out, "write the report here instead of stdout");
  sub->add_option("--format", c.format, "json | csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  sub->add_flag("--oracle", c.oracle, "cross-check against the definitional limit");
  if (model_file) sub->add_option("file", c.file, "model or matrix JSON file")->required();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contraction certificates for monotone and positive systems"};
  app.require_subcommand(1);
  Common c;

  auto* measure = app.add_subcommand("measure", "matrix measure and conic matrix measure of a matrix");
  add_common(measure, c, true);

  auto* certify = app.add_subcommand("certify", "check a contraction condition on a model (exit 1 when refuted)");
  add_common(certify, c, true);
  certify->add_option("--condition", c.condition, "condition id (default depends on the model type)");
  certify->add_option("--domain", c.domain, "box lo:hi or lo1,..:hi1,..");
  certify->add_option("--horizon", c.horizon, "simulation horizon for trajectory conditions")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "integrate a model and trace norms");
  add_common(simulate, c, true);
  simulate->add_option("--x0", c.x0, "initial states, e.g. \"1,0;0,1\"")->required();
  simulate->add_option("--horizon", c.horizon, "final time")->capture_default_str();
  simulate->add_option("--dt", c.dt, "resample on a uniform grid (0: integrator steps)")->capture_default_str();
  simulate->add_flag("--pair", c.pair, "simulate two states jointly and report their distance");
  simulate->add_option("--domain", c.domain, "box lo:hi (unused by the integrator)");

  auto* hopfield = app.add_subcommand("hopfield", "Perron-weighted certificate and equilibrium of a Hopfield model");
  add_common(hopfield, c, true);
  hopfield->add_option("--x0", c.x0, "initial states for the Lyapunov traces");
  hopfield->add_option("--domain", c.domain, "sampling box lo:hi");
  hopfield->add_option("--horizon", c.horizon, "trajectory check horizon")->capture_default_str();

  auto* iss = app.add_subcommand("iss", "certify a comparison system at rate c and check ISS envelopes");
  add_common(iss, c, true);
  iss->add_option("--x0", c.x0, "initial states");
  iss->add_option("--horizon", c.horizon, "simulation horizon")->capture_default_str();
  iss->add_option("--domain", c.domain, "certification box lo:hi");
  iss->add_flag("--falsify", c.falsify, "evaluate envelopes even when c is not certified");

  auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");
  selftest->add_flag("--quick", c.quick, "reduced sample counts");
  selftest->add_option("--seed", c.seed, "seed")->capture_default_str();
  selftest->add_option("--out", c.out, "write the table here instead of stdout");
  selftest->add_option("--mutate", c.mutation)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : input_error;
  }

  try {
    if (*measure) return cmd_measure(c, out);
    if (*certify) return cmd_certify(c, out);
    if (*simulate) return cmd_simulate(c, out);
    if (*hopfield) return cmd_hopfield(c, out);
    if (*iss) return cmd_iss(c, out);
    if (*selftest) return cmd_selftest(c, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return input_error;
  } catch (const HypothesisError& e) {
    err << "hypothesis not met: " << e.what() << "\n";
    return input_error;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return numerical_error;
  } catch (const Json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return input_error;
  }
  return input_error;
}

}  // namespace ctk::cli
