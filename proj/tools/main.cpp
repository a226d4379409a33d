// debtav: command-line front end for the estimation and survey-module pipeline.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "debtav/choice_data.hpp"
#include "debtav/csv.hpp"
#include "debtav/errors.hpp"
#include "debtav/estimation.hpp"
#include "debtav/manifest.hpp"
#include "debtav/predictor.hpp"
#include "debtav/selection.hpp"
#include "debtav/simulation.hpp"
#include "debtav/staircase.hpp"

#include "serve.hpp"

namespace fs = std::filesystem;
using namespace debtav;

namespace {

fs::path data_dir() {
  if (const char* env = std::getenv("DEBTAV_DATA")) return env;
  return DEBTAV_DEFAULT_DATA_DIR;
}

fs::path or_default(const std::string& given, const char* file) {
  return given.empty() ? data_dir() / file : fs::path(given);
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw ValidationError(std::string(what) + " not found: " + p.string());
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + p.string());
  return out;
}

fs::path manifest_path(const fs::path& output) {
  return output.parent_path() / (output.filename().string() + ".manifest.json");
}

std::vector<int> parse_ks(const std::string& text) {
  std::vector<int> ks;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) {
    try {
      std::size_t used = 0;
      ks.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ValidationError("bad fold count '" + part + "'");
    }
  }
  if (ks.empty()) throw ValidationError("no fold counts given");
  return ks;
}

HierarchicalConfig load_hconfig(const std::string& population, double s) {
  HierarchicalConfig hc;
  const fs::path pop = or_default(population, "population.json");
  require_file(pop, "population file");
  hc.population = PopulationDistribution::load(pop);
  hc.shrinkage = s;
  return hc;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::size_t agents = 100;
  std::uint64_t seed = 0;
  double mu = 0.1;
  std::string catalog, population, out_dir = ".";
  int replicates = 1;
};

int cmd_simulate(const SimulateArgs& a) {
  Manifest m("simulate");
  MplCatalog catalog;
  if (!a.catalog.empty()) {
    require_file(a.catalog, "MPL catalog");
    catalog = MplCatalog::load(a.catalog);
    m.input(a.catalog);
  } else {
    catalog = reference_design(a.replicates);
    m.settings()["design"] = "reference";
    m.settings()["replicates"] = a.replicates;
  }
  const fs::path pop = or_default(a.population, "population.json");
  require_file(pop, "population file");
  m.input(pop);
  const auto agents = simulate_population(PopulationDistribution::load(pop), a.mu, a.agents,
                                          catalog, {}, a.seed);
  const fs::path dir(a.out_dir);
  std::vector<ChoiceRecord> all;
  for (const auto& ag : agents) all.insert(all.end(), ag.choices.begin(), ag.choices.end());
  {
    auto out = open_out(dir / "choices.csv");
    write_choices(out, all);
  }
  {
    auto out = open_out(dir / "truth.csv");
    write_truth(out, agents);
  }
  m.seed(a.seed);
  m.settings()["agents"] = a.agents;
  m.settings()["mu"] = a.mu;
  m.output(dir / "choices.csv");
  m.output(dir / "truth.csv");
  m.write(dir / "simulate.manifest.json");
  std::cout << agents.size() << " agents, " << all.size() << " choices -> "
            << (dir / "choices.csv").string() << "\n";
  return 0;
}

struct EstimateArgs {
  std::string choices, catalog, population, out = "estimates.csv";
  double shrinkage = 0.0;
  unsigned threads = 0;
  int replicates = 1;
};

int cmd_estimate(const EstimateArgs& a) {
  Manifest m("estimate");
  require_file(a.choices, "choice file");
  MplCatalog catalog;
  if (!a.catalog.empty()) {
    require_file(a.catalog, "MPL catalog");
    catalog = MplCatalog::load(a.catalog);
    m.input(a.catalog);
  } else {
    catalog = reference_design(a.replicates);
    m.settings()["design"] = "reference";
    m.settings()["replicates"] = a.replicates;
  }
  const HierarchicalConfig hc = load_hconfig(a.population, a.shrinkage);
  const ChoiceData data = load_choices(a.choices, catalog);
  for (const std::string& w : data.warnings) std::cerr << "warning: " << w << "\n";
  const EstimationResult result = estimate_all(data.records, catalog, hc, a.threads);
  {
    auto out = open_out(a.out);
    write_estimates(out, result.estimates);
  }
  const EstimationSummary& s = result.summary;
  std::cout << "consistent " << s.consistent << ", discarded " << s.discarded << ", failed "
            << s.failed << "\n";
  if (s.gamma_median) {
    std::cout << "gamma min " << format_gamma(*s.gamma_min) << ", median "
              << format_gamma(*s.gamma_median) << ", max " << format_gamma(*s.gamma_max)
              << ", debt averse " << format_gamma(*s.share_debt_averse * 100.0) << "%\n";
  }
  m.input(a.choices);
  m.input(or_default(a.population, "population.json"));
  m.settings()["shrinkage"] = a.shrinkage;
  m.settings()["starts"] = hc.starts;
  m.settings()["start_seed"] = hc.seed;
  m.settings()["consistency_threshold"] = hc.consistency_threshold;
  m.output(a.out);
  m.write(manifest_path(a.out));
  return 0;
}

struct CalibrateArgs {
  std::string catalog, population, grid = "0.0001:1:log25", out = "calibration.csv";
  std::size_t agents = 100;
  double mu = 0.1;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  int replicates = 1;
};

int cmd_calibrate(const CalibrateArgs& a) {
  Manifest m("calibrate");
  MplCatalog catalog;
  if (!a.catalog.empty()) {
    require_file(a.catalog, "MPL catalog");
    catalog = MplCatalog::load(a.catalog);
    m.input(a.catalog);
  } else {
    catalog = reference_design(a.replicates);
    m.settings()["design"] = "reference";
    m.settings()["replicates"] = a.replicates;
  }
  CalibrationConfig cc;
  cc.estimation = load_hconfig(a.population, 0.0);
  cc.population = cc.estimation.population;
  cc.mu = a.mu;
  cc.agents = a.agents;
  cc.seed = a.seed;
  cc.threads = a.threads;
  const std::vector<double> grid = parse_grid(a.grid);
  const CalibrationResult r = calibrate_shrinkage(catalog, grid, cc);
  {
    auto out = open_out(a.out);
    out << "s,mse_gamma,estimated,failures,disqualified\n";
    for (const CalibrationRow& row : r.table) {
      out << csv::format_double(row.s) << ',' << csv::format_double(row.mse_gamma) << ','
          << row.estimated << ',' << row.failures << ',' << (row.disqualified ? 1 : 0) << '\n';
    }
  }
  for (const CalibrationRow& row : r.table) {
    std::cout << "s=" << csv::format_double(row.s) << "  mse=" << csv::format_double(row.mse_gamma)
              << "  failures=" << row.failures << (row.disqualified ? "  (disqualified)" : "")
              << "\n";
  }
  if (r.best_s) {
    std::cout << "best s " << csv::format_double(*r.best_s) << "\n";
  } else {
    std::cout << "no admissible s\n";
  }
  m.input(or_default(a.population, "population.json"));
  m.seed(a.seed);
  m.settings()["grid"] = grid;
  m.settings()["agents"] = a.agents;
  m.settings()["mu"] = a.mu;
  m.settings()["best_s"] = r.best_s ? nlohmann::json(*r.best_s) : nlohmann::json(nullptr);
  m.output(a.out);
  m.write(manifest_path(a.out));
  return r.best_s ? 0 : 3;
}

struct SelectArgs {
  std::string estimates, responses, items, exclusions, out = "selection.json";
  std::string ks = "5,10", tie_rule = "one-se";
  std::size_t replicates = 100, max_size = 6, top = 10;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool all_estimates = false;
};

int cmd_select(const SelectArgs& a) {
  Manifest m("select");
  require_file(a.estimates, "estimates file");
  require_file(a.responses, "responses file");
  const fs::path items_path = or_default(a.items, "items.json");
  const fs::path excl_path = or_default(a.exclusions, "exclusions.json");
  require_file(items_path, "item catalog");
  require_file(excl_path, "exclusion list");

  const ItemCatalog items = ItemCatalog::load(items_path);
  const FilteredPool pool = filter_pool(items.items(), load_exclusions(excl_path));
  std::vector<std::string> ids;
  for (const ItemDefinition& d : pool.kept) ids.push_back(d.id);
  const RegressionDataset data = build_dataset(read_estimates(a.estimates),
                                               load_responses(a.responses, items), ids,
                                               !a.all_estimates);
  std::cerr << "pool " << pool.kept.size() << " items (" << pool.excluded.size()
            << " excluded), " << data.size() << " subjects (" << data.dropped << " dropped)\n";

  SelectionConfig sc;
  sc.search.max_size = a.max_size;
  sc.search.top = a.top;
  sc.search.threads = a.threads;
  sc.cv.ks = parse_ks(a.ks);
  sc.cv.replicates = a.replicates;
  sc.cv.seed = a.seed;
  sc.rule = parse_tie_rule(a.tie_rule);
  std::vector<std::size_t> cols(ids.size());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
  const SelectionRun run = run_selection(data, cols, sc);
  nlohmann::json report = selection_report(run, sc);
  report["excluded"] = nlohmann::json::array();
  for (const ItemDefinition& d : pool.excluded) {
    report["excluded"].push_back({{"item_id", d.id}, {"reason", to_string(*d.exclusion)}});
  }
  report["subjects"] = data.size();
  report["dropped_subjects"] = data.dropped;
  {
    auto out = open_out(a.out);
    out << report.dump(2) << '\n';
  }
  const ModelCandidate& pick = run.winners[run.selection.index];
  std::cout << "recommended size " << pick.size() << ":";
  for (const std::string& p : pick.predictors) std::cout << ' ' << p;
  std::cout << "  (mean CV-MSE " << csv::format_double(run.selection.mean_mse) << ")\n";

  for (const auto& p : {a.estimates, a.responses}) m.input(p);
  m.input(items_path);
  m.input(excl_path);
  m.seed(a.seed);
  m.settings()["ks"] = sc.cv.ks;
  m.settings()["replicates"] = a.replicates;
  m.settings()["max_size"] = a.max_size;
  m.settings()["top"] = a.top;
  m.settings()["tie_rule"] = a.tie_rule;
  m.output(a.out);
  m.write(manifest_path(a.out));
  return 0;
}

struct PredictArgs {
  std::optional<double> q1, q2, scale_min, scale_max;
  std::string spec, batch, out;
  bool verbose = false;
};

int cmd_predict(const PredictArgs& a) {
  const fs::path spec_path = or_default(a.spec, "module_spec.json");
  require_file(spec_path, "module spec");
  const SurveyModuleSpec spec = SurveyModuleSpec::load(spec_path);
  if (!a.batch.empty()) {
    require_file(a.batch, "responses file");
    Manifest m("predict");
    std::ifstream in(a.batch);
    std::vector<std::string> incomplete;
    if (a.out.empty()) {
      incomplete = predict_batch(spec, in, a.batch, std::cout);
    } else {
      auto out = open_out(a.out);
      incomplete = predict_batch(spec, in, a.batch, out);
    }
    for (const std::string& s : incomplete) {
      std::cerr << "warning: subject " << s << " lacks a module item; skipped\n";
    }
    if (!a.out.empty()) {
      m.input(spec_path);
      m.input(a.batch);
      m.output(a.out);
      m.write(manifest_path(a.out));
    }
    return 0;
  }
  if (!a.q1 || !a.q2) throw ValidationError("give --q1 and --q2, or --batch FILE");
  if (spec.items.size() != 2) throw ValidationError("--q1/--q2 need a two-item module spec");
  std::vector<ModuleAnswer> answers;
  for (std::size_t i = 0; i < 2; ++i) {
    answers.push_back({spec.items[i].id, i == 0 ? *a.q1 : *a.q2, a.scale_min, a.scale_max});
  }
  const Prediction p = predict_gamma(spec, answers);
  std::cout << format_gamma(p.gamma_hat) << "\n";
  if (a.verbose) {
    std::cout << format_decomposition(p) << "\n"
              << "gamma_hat " << csv::format_double(p.gamma_hat) << "\n"
              << "classification " << to_string(p.classification) << "\n";
  }
  return 0;
}

struct StaircaseArgs {
  std::string answers;
  int sp = 0;
};

int cmd_staircase(const StaircaseArgs& a) {
  if (!a.answers.empty()) {
    std::vector<Answer> path;
    std::stringstream ss(a.answers);
    for (std::string part; std::getline(ss, part, ',');) path.push_back(parse_answer(part));
    std::cout << staircase_switchpoint(path).value << "\n";
    return 0;
  }
  if (a.sp != 0) {
    const auto choices = switchpoint_to_mpl_choices(make_switchpoint(a.sp));
    const auto repay = staircase_repayments_sorted();
    for (std::size_t i = 0; i < choices.size(); ++i) {
      std::cout << csv::format_double(repay[i]) << ',' << to_string(choices[i]) << "\n";
    }
    return 0;
  }
  std::cout << staircase_to_json().dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"debt-aversion estimation and survey-module toolkit"};
  app.set_version_flag("--version", DEBTAV_VERSION);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "simulate synthetic agents and their choices");
  s->add_option("--agents", sim.agents, "number of agents")->check(CLI::PositiveNumber);
  s->add_option("--seed", sim.seed, "random seed")->required();
  s->add_option("--mu", sim.mu, "logit noise scale")->check(CLI::PositiveNumber);
  s->add_option("--catalog", sim.catalog, "MPL catalog JSON (default: reference design)");
  s->add_option("--replicates", sim.replicates, "reference design replicates")->check(CLI::PositiveNumber);
  s->add_option("--population", sim.population, "population JSON");
  s->add_option("--out-dir", sim.out_dir, "output directory");

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "hierarchical ML estimates per subject");
  e->add_option("--choices", est.choices, "choices CSV")->required();
  e->add_option("--catalog", est.catalog, "MPL catalog JSON (default: reference design)");
  e->add_option("--replicates", est.replicates, "reference design replicates")->check(CLI::PositiveNumber);
  e->add_option("--population", est.population, "population JSON");
  e->add_option("--shrinkage,-s", est.shrinkage, "shrinkage exponent s")->check(CLI::NonNegativeNumber);
  e->add_option("--threads", est.threads, "worker threads (0 = all cores)");
  e->add_option("--out,-o", est.out, "estimates CSV");

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "grid search for the shrinkage exponent");
  c->add_option("--catalog", cal.catalog, "MPL catalog JSON (default: reference design)");
  c->add_option("--replicates", cal.replicates, "reference design replicates")->check(CLI::PositiveNumber);
  c->add_option("--population", cal.population, "population JSON");
  c->add_option("--grid", cal.grid, "a:b:logN, a:b:linN or a comma list");
  c->add_option("--agents", cal.agents, "simulated agents")->check(CLI::PositiveNumber);
  c->add_option("--mu", cal.mu, "logit noise scale")->check(CLI::PositiveNumber);
  c->add_option("--seed", cal.seed, "random seed")->required();
  c->add_option("--threads", cal.threads, "worker threads (0 = all cores)");
  c->add_option("--out,-o", cal.out, "table CSV");

  SelectArgs sel;
  auto* l = app.add_subcommand("select", "best-subset search and cross-validated module choice");
  l->add_option("--estimates", sel.estimates, "estimates CSV")->required();
  l->add_option("--responses", sel.responses, "survey responses CSV")->required();
  l->add_option("--items", sel.items, "item catalog JSON");
  l->add_option("--exclusions", sel.exclusions, "exclusion list JSON");
  l->add_option("--k", sel.ks, "fold counts, comma separated");
  l->add_option("--replicates", sel.replicates, "CV replicates")->check(CLI::PositiveNumber);
  l->add_option("--seed", sel.seed, "random seed")->required();
  l->add_option("--max-size", sel.max_size, "largest subset size")->check(CLI::PositiveNumber);
  l->add_option("--top", sel.top, "models kept per size")->check(CLI::PositiveNumber);
  l->add_option("--tie-rule", sel.tie_rule, "one-se or exact");
  l->add_flag("--all-estimates", sel.all_estimates, "keep discarded estimates too");
  l->add_option("--threads", sel.threads, "worker threads (0 = all cores)");
  l->add_option("--out,-o", sel.out, "report JSON");

  PredictArgs pre;
  auto* p = app.add_subcommand("predict", "gamma-hat from the survey module");
  p->add_option("--q1", pre.q1, "answer to the first item");
  p->add_option("--q2", pre.q2, "answer to the second item");
  p->add_option("--scale-min", pre.scale_min, "lowest point of the answer scale");
  p->add_option("--scale-max", pre.scale_max, "highest point of the answer scale");
  p->add_option("--spec", pre.spec, "module spec JSON");
  p->add_option("--batch", pre.batch, "responses CSV to score");
  p->add_option("--out,-o", pre.out, "predictions CSV (batch mode)");
  p->add_flag("--verbose,-v", pre.verbose, "show the term decomposition");

  StaircaseArgs st;
  auto* t = app.add_subcommand("staircase", "print the staircase tree or evaluate a path");
  t->add_option("--answers", st.answers, "four accept/reject answers, comma separated");
  t->add_option("--sp", st.sp, "switchpoint to expand into 15 decisions")->check(CLI::Range(1, 16));

  std::string design_out = "reference_design.json";
  int design_reps = 1;
  auto* d = app.add_subcommand("design", "write the synthetic reference MPL catalog");
  d->add_option("--replicates", design_reps, "interleaved replicates")->check(CLI::PositiveNumber);
  d->add_option("--out,-o", design_out, "catalog JSON");

  ServeArgs srv;
  auto* v = app.add_subcommand("serve", "HTTP service for the survey UI");
  v->add_option("--spec", srv.spec, "module spec JSON");
  v->add_option("--responses", srv.responses, "responses CSV to append to");
  v->add_option("--bind", srv.bind, "host:port (env DEBTAV_BIND overrides the default)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) return cmd_simulate(sim);
    if (*e) return cmd_estimate(est);
    if (*c) return cmd_calibrate(cal);
    if (*l) return cmd_select(sel);
    if (*p) return cmd_predict(pre);
    if (*t) return cmd_staircase(st);
    if (*d) {
      reference_design(design_reps).save(design_out);
      return 0;
    }
    if (*v) {
      if (srv.spec.empty()) srv.spec = (data_dir() / "module_spec.json").string();
      return run_server(srv);
    }
  } catch (const std::exception& ex) {
    std::cerr << "debtav: " << ex.what() << "\n";
    return 2;
  }
  return 1;
}
