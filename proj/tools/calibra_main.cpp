#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "calibra/error.hpp"
#include "calibra/expr.hpp"
#include "calibra/scenario.hpp"

namespace {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int emit_report(const calibra::Report& rep, const std::string& out_path) {
  const auto doc = calibra::report_json(rep);
  std::cout << doc.dump(2) << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "calibra: cannot write '" << out_path << "'\n";
      return 2;
    }
    out << doc.dump(2) << "\n";
  }
  return calibra::report_exit_code(rep);
}

int cmd_run(const std::string& config_path) {
  const auto cfg = calibra::parse_config_file(config_path);
  return emit_report(calibra::run_scenario(cfg), "");
}

int cmd_scenario_list() {
  for (const auto& s : calibra::scenario_catalog()) {
    std::cout << s.id << "\n  " << s.description << "\n  checks:";
    for (const auto& c : s.default_checks) std::cout << " " << c;
    std::cout << "\n";
  }
  return 0;
}

struct CheckArgs {
  std::string scenario;
  std::string checks;
  double tol = 0.0;
  std::string grid;
  long seed = 0;
  std::string out;
};

int cmd_check(const CheckArgs& a) {
  calibra::ScenarioConfig cfg;
  cfg.scenario = a.scenario;
  calibra::find_scenario(a.scenario);
  for (const auto& name : split_list(a.checks)) cfg.checks.push_back({name, {}, {}});
  if (a.tol > 0.0) cfg.tolerance = a.tol;
  if (!a.grid.empty()) {
    std::vector<int> g;
    for (const auto& part : split_list(a.grid)) {
      try {
        g.push_back(std::stoi(part));
      } catch (const std::exception&) {
        throw calibra::ConfigError("--grid expects integers, got '" + part + "'");
      }
    }
    cfg.grid = g;
  }
  cfg.seed = a.seed;
  return emit_report(calibra::run_scenario(cfg), a.out);
}

struct EvalArgs {
  std::string expr;
  std::string at;
  int jet = 2;
};

int cmd_expr_eval(const EvalArgs& a) {
  std::vector<double> coords;
  for (const auto& part : split_list(a.at)) {
    try {
      coords.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw calibra::ConfigError("--at expects numbers, got '" + part + "'");
    }
  }
  const int dim = static_cast<int>(coords.size());
  const calibra::Expression e = calibra::parse_expression(a.expr, dim);
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x(i) = coords[i];

  nlohmann::ordered_json doc;
  doc["expression"] = e.str();
  if (a.jet <= 0) {
    doc["value"] = e.value(x);
  } else if (a.jet == 1) {
    doc["value"] = e.value(x);
    const Eigen::VectorXd g = e.gradient(x);
    doc["gradient"] = std::vector<double>(g.data(), g.data() + g.size());
  } else {
    const calibra::Jet j = e.jet(x);
    doc["value"] = j.v;
    doc["gradient"] = std::vector<double>(j.g.data(), j.g.data() + j.g.size());
    auto rows = nlohmann::ordered_json::array();
    for (int r = 0; r < j.h.rows(); ++r) {
      std::vector<double> row(j.h.cols());
      for (int ccol = 0; ccol < j.h.cols(); ++ccol) row[ccol] = j.h(r, ccol);
      rows.push_back(row);
    }
    doc["hessian"] = std::move(rows);
  }
  std::cout << doc.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"calibra: numerical checks for calibrated pluripotential geometry"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "execute a JSON scenario config");
  run->add_option("config", config_path, "path to config.json")->required();

  auto* scenario = app.add_subcommand("scenario", "catalog inspection");
  scenario->require_subcommand(1);
  scenario->add_subcommand("list", "list catalog scenarios");

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "run checks against a catalog scenario");
  check->add_option("scenario", ca.scenario, "catalog scenario id")->required();
  check->add_option("--checks", ca.checks, "comma-separated check names");
  check->add_option("--tol", ca.tol, "tolerance override for every check");
  check->add_option("--grid", ca.grid, "grid override, integer or comma list");
  check->add_option("--seed", ca.seed, "sampling seed");
  check->add_option("--out", ca.out, "also write the report to this file");

  EvalArgs ea;
  auto* expr = app.add_subcommand("expr", "expression utilities");
  expr->require_subcommand(1);
  auto* eval = expr->add_subcommand("eval", "evaluate an expression with derivatives");
  eval->add_option("expression", ea.expr, "expression text")->required();
  eval->add_option("--at", ea.at, "comma-separated coordinates; count sets the dimension");
  eval->add_option("--jet", ea.jet, "derivative order to report: 0, 1 or 2");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run)) return cmd_run(config_path);
    if (app.got_subcommand(scenario)) return cmd_scenario_list();
    if (app.got_subcommand(check)) return cmd_check(ca);
    if (app.got_subcommand(expr)) return cmd_expr_eval(ea);
  } catch (const calibra::ParseError& e) {
    std::cerr << "calibra: " << e.what() << "\n";
    return 2;
  } catch (const calibra::ConfigError& e) {
    std::cerr << "calibra: " << e.what() << "\n";
    return 2;
  } catch (const calibra::Error& e) {
    std::cerr << "calibra: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
