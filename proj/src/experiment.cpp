#include "betagas/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

#ifndef BETAGAS_VERSION
#define BETAGAS_VERSION "0.0.0"
#endif

namespace betagas {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void require_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  // top-level keys are named bare
  if (!obj.is_object()) throw ConfigError("expected an object", where.empty() ? "config" : where);
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "'", where.empty() ? key : where + "." + key);
    }
  }
}

double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError("expected a number", where);
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("expected a finite number", where);
  return x;
}

double get_positive(const json& v, const std::string& where) {
  const double x = get_number(v, where);
  if (!(x > 0.0)) throw ConfigError("expected a positive number", where);
  return x;
}

long get_integer(const json& v, const std::string& where, long min_value) {
  if (!v.is_number_integer()) throw ConfigError("expected an integer", where);
  const long x = v.get<long>();
  if (x < min_value) {
    throw ConfigError("expected an integer >= " + std::to_string(min_value), where);
  }
  return x;
}

bool get_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ConfigError("expected true or false", where);
  return v.get<bool>();
}

cplx get_complex(const json& v, const std::string& where) {
  if (v.is_number()) return {get_number(v, where), 0.0};
  if (!v.is_array() || v.size() != 2) throw ConfigError("expected [re, im]", where);
  return {get_number(v[0], where + "[0]"), get_number(v[1], where + "[1]")};
}

std::uint64_t get_seed(const json& v, const std::string& where) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
    throw ConfigError("expected a non-negative integer seed", where);
  }
  return v.get<std::uint64_t>();
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int require_n(const ExperimentConfig& cfg) {
  if (!cfg.n) throw ConfigError("n is required for " + cfg.kind, "n");
  return *cfg.n;
}

double require_scalar_beta(const ExperimentConfig& cfg) {
  if (cfg.beta_ladder) throw ConfigError(cfg.kind + " takes a single beta", "beta");
  return cfg.betas.front();
}

ChainConfig chain_for(const ExperimentConfig& cfg, double beta) {
  ChainConfig c = cfg.chain;
  c.beta = beta;
  c.seed = cfg.seed;
  c.threads = cfg.threads;
  return c;
}

SpacingOptions spacing_options(const ExperimentConfig& cfg) {
  SpacingOptions o;
  o.epsilon = cfg.epsilon;
  o.c_override = cfg.c_override;
  o.independent_eta = cfg.independent_eta;
  o.scale = cfg.scale;
  return o;
}

void write_document(const fs::path& path, const ExperimentConfig& cfg, const json& result,
                    ExperimentOutcome& out) {
  write_atomic(path, output_document(cfg, result).dump(2) + "\n");
  out.files.push_back(path);
}

ExperimentOutcome run_scale_info(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  out.result = to_json(scale_info(cfg.model, cfg.center, require_n(cfg), cfg.scale));
  write_document(cfg.out_dir / "scale_info.json", cfg, out.result, out);
  return out;
}

void append_samples_csv(std::string& csv, const SampleSet& set) {
  for (const auto& chain : set.chains) {
    for (std::size_t s = 0; s < chain.samples.size(); ++s) {
      const auto pts = chain.samples[s].points();
      for (std::size_t p = 0; p < pts.size(); ++p) {
        csv += format_double(set.beta) + "," + std::to_string(chain.chain_id) + "," +
               std::to_string(s) + "," + std::to_string(p) + "," + format_double(pts[p].real()) +
               "," + format_double(pts[p].imag()) + "\n";
      }
    }
  }
}

json diagnostics(const SampleSet& set) {
  json chains = json::array();
  for (const auto& c : set.chains) {
    chains.push_back({{"chain_id", c.chain_id},
                      {"seed", c.seed},
                      {"samples", c.samples.size()},
                      {"acceptance_rate", c.acceptance_rate},
                      {"proposal_scale_final", c.proposal_scale_final},
                      {"energy_trace", c.energy_trace}});
  }
  // per-chain values are in "chains"; the top level carries the chain mean
  double scale = 0.0;
  for (const auto& c : set.chains) scale += c.proposal_scale_final;
  if (!set.chains.empty()) scale /= double(set.chains.size());
  return {{"beta", set.beta},
          {"n", set.n},
          {"seed", set.base_seed},
          {"proposal_scale_final", scale},
          {"sample_count", set.sample_count()},
          {"acceptance_rate", set.acceptance_rate()},
          {"mean_energy", set.mean_energy()},
          {"warnings", set.warnings()},
          {"chains", chains}};
}

ExperimentOutcome run_sample(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  const int n = require_n(cfg);
  std::string csv = "beta,chain_id,sample_index,particle_index,re,im\n";
  if (cfg.beta_ladder) {
    const TemperingResult t = run_tempering(cfg.model, n, cfg.betas, chain_for(cfg, cfg.betas.front()));
    json per_beta = json::array();
    for (const auto& set : t.per_beta) {
      append_samples_csv(csv, set);
      per_beta.push_back(diagnostics(set));
    }
    out.result = {{"tempering", true}, {"per_beta", per_beta}, {"swap_acceptance", t.swap_acceptance}};
  } else {
    const SampleSet set = run_chain(cfg.model, n, chain_for(cfg, cfg.betas.front()));
    append_samples_csv(csv, set);
    out.result = diagnostics(set);
    out.result["tempering"] = false;
  }
  write_atomic(cfg.out_dir / "samples.csv", csv);
  out.files.push_back(cfg.out_dir / "samples.csv");
  write_document(cfg.out_dir / "diagnostics.json", cfg, out.result, out);
  return out;
}

ExperimentOutcome run_fekete(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  const int n = require_n(cfg);
  if (n < 2) throw ConfigError("fekete needs n >= 2", "n");
  std::mt19937_64 rng(cfg.seed);
  const double jitter = cfg.fekete_jitter * micro_scale(cfg.model, cfg.model.symmetry_center(), n);
  const Configuration start = equilibrium_seeded(cfg.model, n, rng, jitter);
  const Configuration best = minimize_energy(cfg.model, start, cfg.fekete);
  const FeketeSpacing sp = fekete_spacing(cfg.model, best, cfg.center);
  std::string csv = "particle_index,re,im\n";
  for (int j = 0; j < best.size(); ++j) {
    csv += std::to_string(j) + "," + format_double(best[j].real()) + "," +
           format_double(best[j].imag()) + "\n";
  }
  out.result = {{"n", n},
                {"energy", total_energy(best, cfg.model)},
                {"gradient_sup_norm", gradient_sup_norm(energy_gradient(best, cfg.model))},
                {"min_distance", sp.min_distance},
                {"rescaled_min_spacing", sp.rescaled},
                {"lattice_normalized_min_spacing",
                 sp.lattice_normalized ? json(*sp.lattice_normalized) : json(nullptr)},
                {"reference_lower", 1.0 / std::sqrt(std::exp(1.0))},
                {"reference_lattice", std::sqrt(2.0) * std::pow(3.0, -0.25)}};
  write_atomic(cfg.out_dir / "fekete.csv", csv);
  out.files.push_back(cfg.out_dir / "fekete.csv");
  write_document(cfg.out_dir / "fekete.json", cfg, out.result, out);
  return out;
}

CheckReport mass_check(const ExperimentConfig& cfg) {
  const int n = require_n(cfg);
  const double beta = require_scalar_beta(cfg);
  MassIdentityOptions opts;
  opts.sample_budget = cfg.verify.mass_budget;
  opts.seed = cfg.seed;
  opts.threads = cfg.threads;
  const MassIdentityResult r =
      verify_mass_identity(cfg.model, n, beta, {cfg.center, cfg.verify.u_radius}, opts);
  CheckReport rep;
  rep.name = "mass";
  rep.trials = n <= 2 ? 1 : cfg.verify.mass_budget;
  rep.worst_case = std::abs(r.estimate - r.target);
  // quadrature paths carry a deterministic tolerance, Monte Carlo a 4 sigma band
  rep.bound = n == 1 ? 1e-6 : n == 2 ? 1e-3 : 4.0 * r.std_error;
  rep.pass = rep.worst_case <= rep.bound;
  return rep;
}

CheckReport gradient_check(const ExperimentConfig& cfg) {
  const double beta = require_scalar_beta(cfg);
  const GradientLemmaResult r =
      verify_gradient_lemma(cfg.model, require_n(cfg), beta, chain_for(cfg, beta), cfg.scale.M);
  CheckReport rep;
  rep.name = "gradient";
  rep.trials = static_cast<long>(cfg.chain.chains);
  rep.worst_case = r.estimate;
  rep.bound = r.bound;
  rep.pass = r.estimate <= r.bound;
  return rep;
}

ExperimentOutcome run_verify(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  json reports = json::array();
  for (const auto& check : cfg.verify.checks) {
    std::vector<CheckReport> batch;
    if (check == "replacement") {
      batch.push_back(verify_replacement(cfg.verify.trials, cfg.seed));
    } else if (check == "mass") {
      batch.push_back(mass_check(cfg));
    } else if (check == "bernstein") {
      batch.push_back(verify_bernstein(cfg.model, cfg.center, require_n(cfg), cfg.verify.trials, cfg.seed));
    } else if (check == "morrey") {
      for (double b : cfg.verify.morrey_betas) {
        CheckReport r = verify_morrey(b, cfg.verify.trials, cfg.seed, cfg.scale.M);
        r.name = "morrey(beta=" + format_double(b) + ")";
        batch.push_back(r);
      }
    } else if (check == "gradient") {
      batch.push_back(gradient_check(cfg));
    }
    for (const auto& r : batch) {
      out.checks_passed = out.checks_passed && r.pass;
      reports.push_back(to_json(r));
    }
  }
  out.result = {{"checks", reports}, {"pass", out.checks_passed}};
  write_document(cfg.out_dir / "verify.json", cfg, out.result, out);
  return out;
}

std::string s0_column(const SpacingReport& rep) {
  std::string csv = "s0\n";
  for (double s : rep.s0_samples) csv += format_double(s) + "\n";
  return csv;
}

ExperimentOutcome run_spacing(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  const double beta = require_scalar_beta(cfg);
  const SpacingReport rep = run_spacing_experiment(cfg.model, require_n(cfg), beta, cfg.center,
                                                   chain_for(cfg, beta), spacing_options(cfg));
  out.result = to_json(rep);
  out.checks_passed = rep.theorem_consistent() && rep.packing_failures == 0;
  write_document(cfg.out_dir / "spacing_report.json", cfg, out.result, out);
  if (cfg.s0_csv) {
    write_atomic(cfg.out_dir / "s0_samples.csv", s0_column(rep));
    out.files.push_back(cfg.out_dir / "s0_samples.csv");
  }
  return out;
}

ExperimentOutcome run_sweep(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  const BetaSweep sweep = beta_sweep(cfg.model, require_n(cfg), cfg.betas, cfg.center,
                                     chain_for(cfg, cfg.betas.front()), spacing_options(cfg),
                                     cfg.bootstrap);
  json reports = json::array(), medians = json::array();
  std::string csv = "beta,median_s0,band_lo,band_hi,eta_hat,events\n";
  for (std::size_t i = 0; i < sweep.reports.size(); ++i) {
    const auto& rep = sweep.reports[i];
    const auto& m = sweep.s0_medians[i];
    reports.push_back(to_json(rep));
    medians.push_back({{"beta", rep.beta}, {"median", m.median}, {"lo", m.lo}, {"hi", m.hi}});
    csv += format_double(rep.beta) + "," + format_double(m.median) + "," + format_double(m.lo) +
           "," + format_double(m.hi) + "," + format_double(rep.eta_hat) + "," +
           std::to_string(rep.s0_samples.size()) + "\n";
    out.checks_passed = out.checks_passed && rep.theorem_consistent() && rep.packing_failures == 0;
  }
  out.result = {{"reports", reports}};
  if (sweep.monotone) out.result["trend"] = {{"medians", medians}, {"monotone", *sweep.monotone}};
  write_document(cfg.out_dir / "beta_sweep.json", cfg, out.result, out);
  write_atomic(cfg.out_dir / "beta_sweep.csv", csv);
  out.files.push_back(cfg.out_dir / "beta_sweep.csv");
  return out;
}

void one_line_error(std::ostream& err, const std::string& what, const std::string& where) {
  err << json{{"error", what}, {"where", where}}.dump() << "\n";
}

}  // namespace

std::string version_string() { return BETAGAS_VERSION; }

PotentialModel parse_potential(const json& spec) {
  require_keys(spec, {"family", "center"}, "potential");
  const cplx s = spec.contains("center") ? get_complex(spec["center"], "potential.center") : cplx{};
  if (!spec.contains("family")) throw ConfigError("missing family", "potential.family");
  const json& fam = spec["family"];
  try {
    if (fam.is_string()) {
      if (fam.get<std::string>() == "ginibre") return PotentialModel::ginibre(s);
      throw ConfigError("unknown family '" + fam.get<std::string>() + "'", "potential.family");
    }
    if (fam.is_object() && fam.size() == 1) {
      if (fam.contains("monomial")) {
        const long k = get_integer(fam["monomial"], "potential.family.monomial", 1);
        if (k > 64) throw ConfigError("monomial degree too large", "potential.family.monomial");
        return PotentialModel::monomial(static_cast<int>(k), s);
      }
      if (fam.contains("radial_polynomial")) {
        const json& cs = fam["radial_polynomial"];
        if (!cs.is_array() || cs.empty()) {
          throw ConfigError("expected a non-empty coefficient list", "potential.family.radial_polynomial");
        }
        std::vector<double> coeffs;
        for (std::size_t i = 0; i < cs.size(); ++i) {
          coeffs.push_back(get_number(cs[i], "potential.family.radial_polynomial[" + std::to_string(i) + "]"));
        }
        return PotentialModel::radial_polynomial(std::move(coeffs), s);
      }
    }
  } catch (const InvalidPotential& e) {
    throw ConfigError(e.what(), "potential.family");
  }
  throw ConfigError("expected \"ginibre\", {\"monomial\": k} or {\"radial_polynomial\": [...]}",
                    "potential.family");
}

ExperimentConfig parse_config(const json& doc) {
  require_keys(doc, {"kind", "potential", "n", "beta", "center", "chain", "epsilon", "c_override",
                     "seed", "threads", "output", "verify", "fekete", "scale", "spacing"},
               "");
  ExperimentConfig cfg;
  if (doc.contains("kind")) {
    if (!doc["kind"].is_string()) throw ConfigError("expected a string", "kind");
    cfg.kind = doc["kind"].get<std::string>();
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end()) {
      throw ConfigError("unknown experiment kind '" + cfg.kind + "'", "kind");
    }
  }
  cfg.potential_spec = doc.contains("potential") ? doc["potential"] : json{{"family", "ginibre"}};
  cfg.model = parse_potential(cfg.potential_spec);
  if (doc.contains("n")) cfg.n = static_cast<int>(get_integer(doc["n"], "n", 1));
  if (cfg.n && *cfg.n > 100000) throw ConfigError("n is unreasonably large", "n");

  if (doc.contains("beta")) {
    const json& b = doc["beta"];
    cfg.betas.clear();
    if (b.is_array()) {
      if (b.empty()) throw ConfigError("empty beta ladder", "beta");
      cfg.beta_ladder = true;
      for (std::size_t i = 0; i < b.size(); ++i) {
        cfg.betas.push_back(get_positive(b[i], "beta[" + std::to_string(i) + "]"));
        if (i > 0 && !(cfg.betas[i] > cfg.betas[i - 1])) {
          throw ConfigError("beta ladder must be strictly ascending without duplicates",
                            "beta[" + std::to_string(i) + "]");
        }
      }
    } else {
      cfg.betas.push_back(get_positive(b, "beta"));
    }
  }
  if (doc.contains("center")) cfg.center = get_complex(doc["center"], "center");

  if (doc.contains("chain")) {
    const json& c = doc["chain"];
    require_keys(c, {"steps", "burn_in", "thinning", "proposal_scale", "target_acceptance", "adapt",
                     "chains"},
                 "chain");
    if (c.contains("steps")) cfg.chain.steps = static_cast<int>(get_integer(c["steps"], "chain.steps", 1));
    if (c.contains("burn_in")) cfg.chain.burn_in = static_cast<int>(get_integer(c["burn_in"], "chain.burn_in", 0));
    if (c.contains("thinning")) cfg.chain.thinning = static_cast<int>(get_integer(c["thinning"], "chain.thinning", 1));
    if (c.contains("proposal_scale")) cfg.chain.proposal_scale = get_positive(c["proposal_scale"], "chain.proposal_scale");
    if (c.contains("target_acceptance")) {
      cfg.chain.target_acceptance = get_number(c["target_acceptance"], "chain.target_acceptance");
    }
    if (c.contains("adapt")) cfg.chain.adapt = get_bool(c["adapt"], "chain.adapt");
    if (c.contains("chains")) cfg.chain.chains = static_cast<int>(get_integer(c["chains"], "chain.chains", 1));
  }
  try {
    cfg.chain.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), "chain");
  }

  if (doc.contains("epsilon")) {
    cfg.epsilon = get_number(doc["epsilon"], "epsilon");
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)", "epsilon");
  }
  if (doc.contains("c_override") && !doc["c_override"].is_null()) {
    cfg.c_override = get_positive(doc["c_override"], "c_override");
  }
  if (doc.contains("seed")) cfg.seed = get_seed(doc["seed"], "seed");
  if (doc.contains("threads")) cfg.threads = static_cast<int>(get_integer(doc["threads"], "threads", 0));

  if (doc.contains("output")) {
    const json& o = doc["output"];
    require_keys(o, {"dir", "s0_csv"}, "output");
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) throw ConfigError("expected a path string", "output.dir");
      cfg.out_dir = o["dir"].get<std::string>();
    }
    if (o.contains("s0_csv")) cfg.s0_csv = get_bool(o["s0_csv"], "output.s0_csv");
  }

  if (doc.contains("verify")) {
    const json& v = doc["verify"];
    require_keys(v, {"checks", "trials", "u_radius", "morrey_betas", "mass_budget"}, "verify");
    if (v.contains("checks")) {
      if (!v["checks"].is_array() || v["checks"].empty()) {
        throw ConfigError("expected a non-empty list of checks", "verify.checks");
      }
      cfg.verify.checks.clear();
      static const std::set<std::string> known{"replacement", "mass", "bernstein", "morrey", "gradient"};
      for (const auto& c : v["checks"]) {
        if (!c.is_string() || !known.count(c.get<std::string>())) {
          throw ConfigError("unknown check " + c.dump(), "verify.checks");
        }
        cfg.verify.checks.push_back(c.get<std::string>());
      }
    }
    if (v.contains("trials")) cfg.verify.trials = get_integer(v["trials"], "verify.trials", 1);
    if (v.contains("u_radius")) cfg.verify.u_radius = get_positive(v["u_radius"], "verify.u_radius");
    if (v.contains("mass_budget")) {
      cfg.verify.mass_budget = static_cast<int>(get_integer(v["mass_budget"], "verify.mass_budget", 2));
    }
    if (v.contains("morrey_betas")) {
      const json& mb = v["morrey_betas"];
      if (!mb.is_array() || mb.empty()) throw ConfigError("expected a non-empty list", "verify.morrey_betas");
      cfg.verify.morrey_betas.clear();
      for (std::size_t i = 0; i < mb.size(); ++i) {
        const double b = get_number(mb[i], "verify.morrey_betas[" + std::to_string(i) + "]");
        if (!(b > 1.0)) throw ConfigError("Morrey checks need beta > 1", "verify.morrey_betas");
        cfg.verify.morrey_betas.push_back(b);
      }
    }
  }

  if (doc.contains("fekete")) {
    const json& f = doc["fekete"];
    require_keys(f, {"tol", "max_iters", "jitter"}, "fekete");
    if (f.contains("tol")) cfg.fekete.tol = get_positive(f["tol"], "fekete.tol");
    if (f.contains("max_iters")) cfg.fekete.max_iters = static_cast<int>(get_integer(f["max_iters"], "fekete.max_iters", 1));
    if (f.contains("jitter")) cfg.fekete_jitter = get_positive(f["jitter"], "fekete.jitter");
  }

  if (doc.contains("scale")) {
    const json& s = doc["scale"];
    require_keys(s, {"M", "C", "n0"}, "scale");
    if (s.contains("M")) cfg.scale.M = get_positive(s["M"], "scale.M");
    if (s.contains("C")) cfg.scale.C = get_number(s["C"], "scale.C");
    if (s.contains("n0")) cfg.scale.n0 = static_cast<int>(get_integer(s["n0"], "scale.n0", 0));
  }

  if (doc.contains("spacing")) {
    const json& s = doc["spacing"];
    require_keys(s, {"independent_eta", "bootstrap"}, "spacing");
    if (s.contains("independent_eta")) cfg.independent_eta = get_bool(s["independent_eta"], "spacing.independent_eta");
    if (s.contains("bootstrap")) cfg.bootstrap = static_cast<int>(get_integer(s["bootstrap"], "spacing.bootstrap", 1));
  }
  if (cfg.independent_eta && cfg.chain.chains < 2) {
    throw ConfigError("independent eta estimation needs chain.chains >= 2", "spacing.independent_eta");
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string(), "config");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what(), "config");
  }
  return parse_config(doc);
}

void apply_overrides(ExperimentConfig& cfg, const Overrides& o) {
  if (o.kind) {
    if (!cfg.kind.empty() && cfg.kind != *o.kind) {
      throw ConfigError("config kind '" + cfg.kind + "' does not match subcommand '" + *o.kind + "'",
                        "kind");
    }
    cfg.kind = *o.kind;
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) {
    if (*o.threads < 0) throw ConfigError("threads must be >= 0", "threads");
    cfg.threads = *o.threads;
  }
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (cfg.kind.empty()) throw ConfigError("no experiment kind given", "kind");
}

json ExperimentConfig::resolved() const {
  json chain_json{{"steps", chain.steps},
                  {"burn_in", chain.burn_in},
                  {"thinning", chain.thinning},
                  {"proposal_scale", chain.proposal_scale ? json(*chain.proposal_scale) : json(nullptr)},
                  {"target_acceptance", chain.target_acceptance},
                  {"adapt", chain.adapt},
                  {"chains", chain.chains}};
  json pot = potential_spec;
  if (!pot.contains("center")) pot["center"] = complex_json(model.symmetry_center());
  return {{"kind", kind},
          {"potential", pot},
          {"n", n ? json(*n) : json(nullptr)},
          {"beta", beta_ladder ? json(betas) : json(betas.front())},
          {"center", complex_json(center)},
          {"chain", chain_json},
          {"epsilon", epsilon},
          {"c_override", c_override ? json(*c_override) : json(nullptr)},
          {"seed", seed},
          {"threads", threads},
          {"output", {{"dir", out_dir.string()}, {"s0_csv", s0_csv}}},
          {"verify",
           {{"checks", verify.checks},
            {"trials", verify.trials},
            {"u_radius", verify.u_radius},
            {"morrey_betas", verify.morrey_betas},
            {"mass_budget", verify.mass_budget}}},
          {"fekete", {{"tol", fekete.tol}, {"max_iters", fekete.max_iters}, {"jitter", fekete_jitter}}},
          {"scale", {{"M", scale.M}, {"C", scale.C}, {"n0", scale.n0}}},
          {"spacing", {{"independent_eta", independent_eta}, {"bootstrap", bootstrap}}}};
}

void write_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) {
      fs::remove(tmp);
      throw std::runtime_error("failed writing " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

json output_document(const ExperimentConfig& cfg, const json& result) {
  return {{"header", {{"timestamp", utc_timestamp()}}},
          {"version", version_string()},
          {"config", cfg.resolved()},
          {"result", result}};
}

json to_json(const ScaleInfo& info) {
  json h = json::array();
  for (const auto& c : info.h_coeffs) h.push_back(complex_json(c));
  return {{"center", complex_json(info.center)},
          {"n", info.n},
          {"k", info.k},
          {"tau0", info.tau0},
          {"r_n", info.r_n},
          {"h_coeffs", h},
          {"q0", info.q0},
          {"cn_bound", info.cn_bound},
          {"K", info.K},
          {"K_certified", info.K_certified},
          {"T", info.T},
          {"M", info.M}};
}

json to_json(const SpacingReport& r) {
  json out{{"n", r.n},
           {"beta", r.beta},
           {"center", complex_json(r.center)},
           {"r_n", r.r_n},
           {"total_samples", r.total_samples},
           {"eta_hat", r.eta_hat},
           {"eta_std_error", r.eta_std_error},
           {"events", r.s0_samples.size()},
           {"s0_samples", r.s0_samples},
           {"nD_samples", r.nD_samples},
           {"epsilon", r.epsilon},
           {"c", r.c},
           {"c_from_proof", r.c_from_proof},
           {"K", r.K},
           {"T", r.T},
           {"packing_checked", r.packing_checked},
           {"packing_failures", r.packing_failures},
           {"acceptance_rate", r.acceptance_rate},
           {"warnings", r.warnings},
           {"theorem_consistent", r.theorem_consistent()}};
  if (r.bound) {
    out["bound"] = {{"threshold", r.bound->threshold},
                    {"m0", r.bound->m0},
                    {"probability_bound", r.bound->probability_bound}};
  } else {
    out["bound"] = nullptr;
  }
  out["empirical_conditional"] = r.empirical_conditional ? json(*r.empirical_conditional) : json(nullptr);
  return out;
}

json to_json(const CheckReport& r) {
  return {{"name", r.name},
          {"trials", r.trials},
          {"worst_case", r.worst_case},
          {"bound", r.bound},
          {"pass", r.pass}};
}

ExperimentOutcome execute(const ExperimentConfig& cfg) {
  if (cfg.kind == "scale-info") return run_scale_info(cfg);
  if (cfg.kind == "sample") return run_sample(cfg);
  if (cfg.kind == "fekete") return run_fekete(cfg);
  if (cfg.kind == "verify") return run_verify(cfg);
  if (cfg.kind == "spacing-experiment") return run_spacing(cfg);
  if (cfg.kind == "beta-sweep") return run_sweep(cfg);
  throw ConfigError("unknown experiment kind '" + cfg.kind + "'", "kind");
}

int run_from_file(const fs::path& config_path, const Overrides& overrides, std::ostream& out,
                  std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    apply_overrides(cfg, overrides);
  } catch (const ConfigError& e) {
    one_line_error(err, e.what(), e.where());
    return exit_config;
  }
  try {
    const ExperimentOutcome res = execute(cfg);
    out << output_document(cfg, res.result).dump(2) << "\n";
    if (!res.checks_passed) {
      one_line_error(err, "verification check failed", cfg.kind);
      return exit_verification;
    }
    return exit_ok;
  } catch (const ConfigError& e) {
    one_line_error(err, e.what(), e.where());
    return exit_config;
  } catch (const RefinementExhausted& e) {
    one_line_error(err, e.what(), "quadrature");
  } catch (const BracketError& e) {
    one_line_error(err, e.what(), "root_finder");
  } catch (const StalledDescent& e) {
    one_line_error(err, e.what(), "fekete");
  } catch (const DegeneratePoint& e) {
    one_line_error(err, e.what(), "microscale");
  } catch (const std::exception& e) {
    one_line_error(err, e.what(), cfg.kind);
  }
  return exit_numeric;
}

}  // namespace betagas
