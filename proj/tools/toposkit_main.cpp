// Command-line entry point: fixtures in, verified constructions and
// machine-readable reports out. Exit codes: 0 pass, 1 verified failure,
// 2 usage or input error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "toposkit/diagram.hpp"
#include "toposkit/laws.hpp"

namespace {

using namespace toposkit;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kInputError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  out << content;
}

std::map<std::string, double> parse_tolerance_overrides(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const std::string& item : items) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--tolerance expects NAME=VALUE, got '" + item + "'");
    out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
  }
  return out;
}

int cmd_validate(const std::string& path) {
  Diagram d = parse_diagram(read_file(path));
  ValidationResult res = validate(d);
  if (res.pass) {
    std::cout << "validate: all " << d.relations.size() << " relations hold\n";
    return kPass;
  }
  std::cout << "validate: relation '" << res.violated << "' fails at element '" << res.element
            << "'\n";
  return kFail;
}

int cmd_solve(const std::string& path) {
  Diagram d = parse_diagram(read_file(path));
  ValidationResult rel = validate(d);
  if (!rel.pass) {
    std::cout << "solve: relation '" << rel.violated << "' fails at element '" << rel.element
              << "'\n";
    return kFail;
  }
  SolveResult res = solve(d);
  switch (res.level) {
    case SolveResult::Level::Composite:
      if (res.composite_fn)
        std::cout << "composite: " << res.composite_fn->describe() << "\n";
      else
        std::cout << "composite square: " << res.composite_square->src().describe() << " => "
                  << res.composite_square->dst().describe() << "\n";
      break;
    case SolveResult::Level::SetLevel: {
      const SetConstruction& c = res.set_construction;
      std::cout << "object " << c.object.name << " = {";
      for (std::size_t i = 0; i < c.object.size(); ++i)
        std::cout << (i ? ", " : " ") << c.object.elements[i];
      std::cout << " } (" << c.object.size() << " elements)\n";
      for (const FinFn& leg : c.legs) std::cout << "leg: " << leg.describe() << "\n";
      std::cout << "certificate: " << res.set_certificate.cones_checked
                << " test cones, unique mediating arrow for each; "
                << res.set_certificate.certificate.size() << " samples retained\n";
      break;
    }
    case SolveResult::Level::ArrowLevel: {
      const ArrowLimitResult& ar = *res.arrow_result;
      std::cout << "apex arrow: " << ar.apex.describe() << "\n";
      std::cout << "domain level: " << ar.dom_check.cones_checked
                << " test cones verified; codomain level: " << ar.cod_check.cones_checked
                << " test cones verified\n";
      std::cout << "all " << ar.legs.size() << " legs are commuting squares: "
                << (ar.legs_commute ? "yes" : "no") << "\n";
      break;
    }
  }
  return res.verified() ? kPass : kFail;
}

int cmd_classify(const std::string& path, std::string square_name) {
  Diagram d = parse_diagram(read_file(path));
  const Square* sub = nullptr;
  if (square_name.empty()) {
    if (d.squares.size() != 1)
      throw std::invalid_argument("classify: file declares " + std::to_string(d.squares.size()) +
                                  " squares; pick one with --square");
    sub = &d.squares[0].second;
    square_name = d.squares[0].first;
  } else {
    sub = d.square(square_name);
    if (!sub) throw std::invalid_argument("classify: unknown square '" + square_name + "'");
  }
  Square chi = classify(*sub);
  std::cout << "classifying square '" << square_name << "'\n";
  const FinFn& psi = chi.top();
  for (std::size_t i = 0; i < psi.dom().size(); ++i)
    std::cout << "  psi(" << psi.dom().elements[i] << ") = " << psi.cod().elements[psi.apply(i)]
              << "\n";
  const FinFn& chi_o = chi.bottom();
  for (std::size_t i = 0; i < chi_o.dom().size(); ++i)
    std::cout << "  chi_O(" << chi_o.dom().elements[i] << ") = "
              << chi_o.cod().elements[chi_o.apply(i)] << "\n";
  ClassifierRecovery rec = verify_classification(*sub, chi);
  std::cout << "pullback against true recovers the subobject: " << (rec.pass ? "yes" : "no")
            << "\n";
  if (!rec.pass) std::cout << "  " << rec.failure << "\n";
  return rec.pass ? kPass : kFail;
}

int cmd_expo(const std::string& path, const std::string& f_name, const std::string& g_name,
             std::size_t max_test_size) {
  Diagram d = parse_diagram(read_file(path));
  const FinFn* f = d.arrowobj(f_name);
  const FinFn* g = d.arrowobj(g_name);
  if (!f) throw std::invalid_argument("expo: unknown arrowobj '" + f_name + "'");
  if (!g) throw std::invalid_argument("expo: unknown arrowobj '" + g_name + "'");
  Exponential e = exponential(*f, *g);
  std::cout << "|E| = " << e.object.dom().size() << " commuting squares, |F| = "
            << e.object.cod().size() << " functions\n";
  bool all_pass = true;
  std::size_t tested = 0;
  for (std::size_t a_in = 0; a_in <= max_test_size; ++a_in) {
    std::vector<std::string> ins;
    for (std::size_t i = 0; i < a_in; ++i) ins.push_back("a" + std::to_string(i));
    FinSet dom("A" + std::to_string(a_in), ins);
    for (std::size_t a_out = 0; a_out <= max_test_size; ++a_out) {
      std::vector<std::string> outs;
      for (std::size_t i = 0; i < a_out; ++i) outs.push_back("b" + std::to_string(i));
      FinSet cod("B" + std::to_string(a_out), outs);
      for (const FinFn& a : all_functions(dom, cod)) {
        CurryingCheck c = check_currying(*f, *g, a);
        ++tested;
        if (!c.pass) {
          all_pass = false;
          std::cout << "currying FAILED for test object " << a.describe() << ": " << c.failure
                    << "\n";
        }
      }
    }
  }
  std::cout << "currying bijection Hom(a x f, g) ~ Hom(a, g^f): " << tested
            << " test objects, " << (all_pass ? "all pass" : "failures above") << "\n";
  return all_pass ? kPass : kFail;
}

int cmd_laws(std::uint64_t seed, const std::vector<std::string>& tolerances,
             const std::string& out_path, int verbosity) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.tolerance_overrides = parse_tolerance_overrides(tolerances);
  Report rep = run_laws(cfg);
  std::string csv = rep.to_csv();
  std::cout << csv;
  if (!out_path.empty()) write_file(out_path, csv);
  if (verbosity > 0) {
    for (const CheckResult& c : rep.checks)
      std::cerr << (c.pass ? "pass " : "FAIL ") << c.name << " (" << c.elapsed_ms << " ms)\n";
  }
  std::size_t failed = 0;
  for (const CheckResult& c : rep.checks)
    if (!c.pass) ++failed;
  std::cerr << rep.checks.size() - failed << "/" << rep.checks.size() << " checks passed\n";
  return rep.all_pass() ? kPass : kFail;
}

int cmd_train(const std::string& path, double eps, std::size_t steps, std::uint64_t seed,
              const std::string& out_path, double lambda, double task_weight) {
  Diagram d = parse_diagram(read_file(path));
  CompileOptions copts;
  copts.lambda = lambda;
  copts.task_weight = task_weight;
  ErrorFunction err = ErrorFunction::quadratic();
  Learner learner = compile_to_learner(d, eps, err, copts);

  SplitRng rng(seed);
  Vec params = initial_params(d, rng);
  if (params.size() != learner.param_dim)
    throw std::logic_error("train: initial parameter size mismatch");

  // Synthetic dataset: a hidden random block provides a fixed
  // permutation-equivariant target map when shapes allow, otherwise a random
  // affine target on the learner's own dimensions.
  SplitRng data_rng = rng.split("data");
  SplitRng target_rng = rng.split("target");
  std::size_t dataset_size = 16;
  std::vector<std::pair<Vec, Vec>> dataset;
  bool block_shaped = false;
  std::size_t bd = 0, bn = 0;
  if (!d.bindings.empty()) {
    const ParamFnSpec* spec = d.paramfn(d.bindings[0].second);
    if (spec && spec->kind == ParamFnSpec::Kind::Block) {
      block_shaped = true;
      bd = spec->dims[0];
      bn = spec->dims[1];
    }
  }
  if (block_shaped && learner.in_dim == bd * bn && learner.out_dim == bd * bn) {
    TransformerBlock hidden = TransformerBlock::random(bd, bn, 2, 2, 4, target_rng);
    for (std::size_t i = 0; i < dataset_size; ++i) {
      Matrix x = Matrix::random(bd, bn, data_rng);
      dataset.emplace_back(x.data(), forward(hidden, x).data());
    }
  } else {
    ParamFn target = pf::affine(learner.in_dim, learner.out_dim);
    Vec tp = vecs::random(target.param_dim, target_rng);
    for (std::size_t i = 0; i < dataset_size; ++i) {
      Vec a = vecs::random(learner.in_dim, data_rng);
      dataset.emplace_back(a, target.implement(tp, a));
    }
  }

  auto total_loss = [&](const Vec& p) {
    double acc = 0.0;
    for (const auto& [a, b] : dataset) {
      Vec out = learner.implement(p, a);
      for (std::size_t j = 0; j < out.size(); ++j) acc += err.e(out[j], b[j]);
    }
    return acc;
  };

  std::ostringstream trace;
  trace.precision(17);
  trace << "step,loss\n";
  double initial = total_loss(params);
  trace << 0 << "," << initial << "\n";
  double final_loss = initial;
  for (std::size_t step = 1; step <= steps; ++step) {
    const auto& [a, b] = dataset[(step - 1) % dataset.size()];
    params = learner.update(params, a, b);
    if (!vecs::all_finite(params)) {
      std::cout << "train: diverged (non-finite parameters) at step " << step << "\n";
      return kFail;
    }
    final_loss = total_loss(params);
    if (!std::isfinite(final_loss)) {
      std::cout << "train: diverged (non-finite loss) at step " << step << "\n";
      return kFail;
    }
    trace << step << "," << final_loss << "\n";
  }
  if (!out_path.empty()) write_file(out_path, trace.str());
  std::cout.precision(17);
  std::cout << "initial loss " << initial << ", final loss " << final_loss << " after " << steps
            << " steps\n";
  return kPass;
}

int cmd_force(const std::string& path, const std::string& formula_text, std::size_t bound,
              bool check_natural) {
  Diagram d = parse_diagram(read_file(path));
  std::map<std::string, Subobject> subobjects;
  for (const auto& [name, decl] : d.subobjs) subobjects.emplace(name, d.subobject(name));
  std::map<std::string, ArrowObject> arrow_objects;
  for (const auto& [name, obj] : d.arrowobjs) arrow_objects.emplace(name, obj);

  if (d.elements.empty())
    throw std::invalid_argument("force: file declares no generalized elements");
  Env env;
  std::map<std::string, ArrowObject> free_types;
  const ArrowObject* stage = nullptr;
  for (const auto& [var, sq_name] : d.elements) {
    const Square* sq = d.square(sq_name);
    if (!stage)
      stage = &sq->src();
    else if (!(*stage == sq->src()))
      throw std::invalid_argument("force: elements '" + var + "' has a different stage");
    env.emplace(var, *sq);
    free_types.emplace(var, sq->dst());
  }

  Formula phi = parse_formula(formula_text, subobjects, arrow_objects, free_types);
  ForcingContext cx(ForcingOptions{bound});
  bool forced = cx.forces(*stage, env, phi);
  std::cout << "stage " << stage->dom().name << (forced ? " forces " : " does not force ")
            << formula_text << "\n";
  if (check_natural && env.size() == 1) {
    const auto& [var, sq] = *env.begin();
    NaturalityReport rep = check_monotonicity_local_character(phi, var, {sq}, cx);
    std::cout << "monotonicity: " << (rep.monotone ? "holds" : "FAILS")
              << ", local character: " << (rep.local ? "holds" : "FAILS") << " over "
              << rep.arrows_checked << " arrows\n";
    if (!rep.monotone || !rep.local) return kFail;
  }
  return forced ? kPass : kFail;
}

int cmd_equivariance(std::size_t dd, std::size_t nn, std::size_t hh, std::size_t mm,
                     std::size_t rr, std::size_t trials, std::uint64_t seed, double tol) {
  SplitRng rng = SplitRng(seed).split("equivariance");
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    TransformerBlock block = TransformerBlock::random(dd, nn, hh, mm, rr, rng);
    Matrix x = Matrix::random(dd, nn, rng, -3.0, 3.0);
    Permutation p = Permutation::random(nn, rng);
    worst = std::max(worst, check_equivariance(block, x, p));
  }
  std::cout.precision(17);
  std::cout << "max |forward(XP) - forward(X)P| over " << trials << " trials: " << worst
            << " (tolerance " << tol << ")\n";
  return worst <= tol ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workbench for universal constructions over finite functions and "
               "compositional learners"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 42;
  std::string out_path;
  std::vector<std::string> tolerances;
  int verbosity = 0;
  app.add_option("--seed", seed, "seed for all randomized checks");
  app.add_option("--out", out_path, "output file for reports and traces");
  app.add_option("--tolerance", tolerances, "override NAME=VALUE for a named check");
  app.add_flag("-v,--verbose", verbosity, "verbose diagnostics on stderr");

  std::string file, square_name, f_name = "F", g_name = "G", formula_text;
  double eps = 0.05, lambda = 1.0, task_weight = 1.0, tol = 1e-8;
  std::size_t steps = 500, bound = 3, max_test_size = 2;
  std::size_t dd = 4, nn = 5, hh = 2, mm = 2, rr = 4, trials = 100;
  bool check_natural = false;

  CLI::App* solve_cmd = app.add_subcommand("solve", "solve a diagram file and verify the result");
  solve_cmd->add_option("file", file)->required();

  CLI::App* validate_cmd = app.add_subcommand("validate", "check the declared relations");
  validate_cmd->add_option("file", file)->required();

  CLI::App* classify_cmd =
      app.add_subcommand("classify", "three-valued characteristic of a monic square");
  classify_cmd->add_option("file", file)->required();
  classify_cmd->add_option("--square", square_name, "square to classify");

  CLI::App* expo_cmd = app.add_subcommand("expo", "exponential object and currying check");
  expo_cmd->add_option("file", file)->required();
  expo_cmd->add_option("--f", f_name, "arrowobj for the exponent");
  expo_cmd->add_option("--g", g_name, "arrowobj for the base");
  expo_cmd->add_option("--max-test-size", max_test_size, "component bound for test objects");

  CLI::App* laws_cmd = app.add_subcommand("laws", "run the full invariant suite");

  CLI::App* train_cmd = app.add_subcommand("train", "compile a diagram and train it");
  train_cmd->add_option("file", file)->required();
  train_cmd->add_option("--eps", eps, "learning rate");
  train_cmd->add_option("--steps", steps, "number of update steps");
  train_cmd->add_option("--lambda", lambda, "equalizer consistency weight");
  train_cmd->add_option("--task-weight", task_weight, "equalizer task loss weight");

  CLI::App* force_cmd = app.add_subcommand("force", "evaluate the forcing relation");
  force_cmd->add_option("file", file)->required();
  force_cmd->add_option("formula", formula_text)->required();
  force_cmd->add_option("--bound", bound, "component bound for quantified stages");
  force_cmd->add_flag("--check-natural", check_natural, "also verify monotonicity/local character");

  CLI::App* equi_cmd = app.add_subcommand("equivariance", "permutation equivariance of blocks");
  equi_cmd->add_option("--d", dd);
  equi_cmd->add_option("--n", nn);
  equi_cmd->add_option("--h", hh);
  equi_cmd->add_option("--m", mm);
  equi_cmd->add_option("--r", rr);
  equi_cmd->add_option("--trials", trials);
  equi_cmd->add_option("--tol", tol, "equivariance tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(file);
    if (validate_cmd->parsed()) return cmd_validate(file);
    if (classify_cmd->parsed()) return cmd_classify(file, square_name);
    if (expo_cmd->parsed()) return cmd_expo(file, f_name, g_name, max_test_size);
    if (laws_cmd->parsed()) return cmd_laws(seed, tolerances, out_path, verbosity);
    if (train_cmd->parsed())
      return cmd_train(file, eps, steps, seed, out_path, lambda, task_weight);
    if (force_cmd->parsed()) return cmd_force(file, formula_text, bound, check_natural);
    if (equi_cmd->parsed()) return cmd_equivariance(dd, nn, hh, mm, rr, trials, seed, tol);
  } catch (const DiagramError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kInputError;
}
