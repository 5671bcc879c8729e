#include <chrono>
#include <fstream>
#include <limits>
#include <set>
#include <string>

#include "calibra/error.hpp"
#include "calibra/scenario.hpp"
#include "check_util.hpp"

namespace calibra {

namespace {

const std::set<std::string>& proposition_ids() {
  static const std::set<std::string> ids = {"P3.1", "P5.1", "P5.2", "C5.1", "P5.4",
                                            "C6.1", "P7.1", "P7.2", "P7.3", "P7.4"};
  return ids;
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

double default_tolerance(const std::string& check) {
  if (starts_with(check, "hadamard")) return 1e-8;
  if (starts_with(check, "toric_volume")) return 1e-5;
  if (check == "ricci_two_form") return 1e-9;
  if (check == "lagrangian_determinant") return 1e-8;
  if (check == "square_distance") return 1e-8;
  if (check == "second_variation") return 1e-4;
  if (check == "psh_defect") return 1e-8;
  return 1e-6;
}

// Tag used when a check dies before producing its own records.
std::string fallback_tag(const std::string& check) {
  if (proposition_ids().count(check)) return check;
  if (check == "hessian_transfer") return "P2.2";
  if (check == "radius_hessian") return "S3";
  if (starts_with(check, "hadamard")) return "S1";
  if (check == "psh_defect") return "E3";
  if (check == "first_variation") return "E4";
  if (check == "second_variation") return "E5";
  if (starts_with(check, "toric_volume")) return "T8.1";
  if (check == "lagrangian_determinant") return "S9";
  if (check == "ricci_two_form") return "S9";
  if (check == "square_distance") return "S4";
  return "S1";
}

// ------------------------------------------------------------ config parsing

using nlohmann::json;

void expect_keys(const json& j, const std::string& where,
                 const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in " + where);
}

std::vector<double> number_array(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(where + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::string> string_array(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ConfigError(where + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<int> grid_value(const json& j, const std::string& where) {
  if (j.is_number_integer()) {
    const int n = j.get<int>();
    if (n <= 0) throw ConfigError(where + " must be positive");
    return {n};
  }
  if (j.is_array()) {
    std::vector<int> out;
    for (const auto& v : j) {
      if (!v.is_number_integer() || v.get<int>() <= 0)
        throw ConfigError(where + " entries must be positive integers");
      out.push_back(v.get<int>());
    }
    return out;
  }
  throw ConfigError(where + " must be an integer or an array of integers");
}

ChartDomain parse_domain(const json& j, const std::string& where) {
  expect_keys(j, where, {"lo", "hi", "periodic"});
  if (!j.contains("lo") || !j.contains("hi"))
    throw ConfigError(where + " needs 'lo' and 'hi'");
  const auto lo = number_array(j.at("lo"), where + ".lo");
  const auto hi = number_array(j.at("hi"), where + ".hi");
  if (lo.size() != hi.size() || lo.empty())
    throw ConfigError(where + ": 'lo' and 'hi' must have equal nonzero length");
  ChartDomain dom(Eigen::Map<const Eigen::VectorXd>(lo.data(), lo.size()),
                  Eigen::Map<const Eigen::VectorXd>(hi.data(), hi.size()));
  if (j.contains("periodic")) {
    for (double d : number_array(j.at("periodic"), where + ".periodic")) {
      const int axis = static_cast<int>(d);
      if (axis < 0 || axis >= dom.dim() || axis != d)
        throw ConfigError(where + ".periodic entries must be valid axis indices");
      dom.set_periodic(axis);
    }
  }
  return dom;
}

MetricField parse_metric(const json& j, const std::string& where) {
  expect_keys(j, where, {"domain", "diagonal", "entries"});
  if (!j.contains("domain")) throw ConfigError(where + " needs a 'domain'");
  ChartDomain dom = parse_domain(j.at("domain"), where + ".domain");
  if (j.contains("diagonal") == j.contains("entries"))
    throw ConfigError(where + " needs exactly one of 'diagonal' or 'entries'");
  if (j.contains("diagonal"))
    return MetricField::diagonal(dom, string_array(j.at("diagonal"), where + ".diagonal"));
  const json& rows = j.at("entries");
  if (!rows.is_array()) throw ConfigError(where + ".entries must be an array of rows");
  std::vector<std::vector<std::string>> entries;
  for (const auto& row : rows)
    entries.push_back(string_array(row, where + ".entries row"));
  return MetricField::from_expressions(dom, entries);
}

Scenario parse_geometry(const json& j) {
  expect_keys(j, "geometry",
              {"total", "base", "projection", "fibre_param", "fibre_domain"});
  for (const char* key : {"total", "base", "projection", "fibre_param", "fibre_domain"})
    if (!j.contains(key))
      throw ConfigError(std::string("geometry needs '") + key + "'");
  MetricField total = parse_metric(j.at("total"), "geometry.total");
  MetricField base = parse_metric(j.at("base"), "geometry.base");
  Scenario s;
  s.id = "custom";
  s.description = "inline geometry";
  s.submersion = RiemannianSubmersion::from_expressions(
      std::move(total), std::move(base),
      string_array(j.at("projection"), "geometry.projection"),
      string_array(j.at("fibre_param"), "geometry.fibre_param"),
      parse_domain(j.at("fibre_domain"), "geometry.fibre_domain"));
  s.field = "x1^2";
  const ChartDomain& bd = s.submersion->base().domain();
  s.probe_base.resize(bd.dim());
  for (int i = 0; i < bd.dim(); ++i) s.probe_base(i) = 0.5 * (bd.lo(i) + bd.hi(i));
  s.probe_direction = Eigen::VectorXd::Zero(bd.dim());
  s.probe_direction(0) = 1.0;
  return s;
}

}  // namespace

ScenarioConfig parse_config(const json& doc) {
  expect_keys(doc, "config",
              {"scenario", "geometry", "checks", "tolerance", "grid", "seed", "fields"});
  ScenarioConfig cfg;

  const bool has_id = doc.contains("scenario");
  const bool has_geo = doc.contains("geometry");
  if (has_id == has_geo)
    throw ConfigError("config needs exactly one of 'scenario' or 'geometry'");
  if (has_id) {
    if (!doc.at("scenario").is_string())
      throw ConfigError("'scenario' must be a string id");
    cfg.scenario = doc.at("scenario").get<std::string>();
    find_scenario(cfg.scenario);  // reject unknown ids before running anything
  } else {
    cfg.inline_geometry = parse_geometry(doc.at("geometry"));
    cfg.scenario = cfg.inline_geometry->id;
  }

  if (doc.contains("checks")) {
    if (!doc.at("checks").is_array()) throw ConfigError("'checks' must be an array");
    for (const auto& item : doc.at("checks")) {
      CheckRequest req;
      if (item.is_string()) {
        req.name = item.get<std::string>();
      } else if (item.is_object()) {
        expect_keys(item, "checks entry", {"name", "tolerance", "grid"});
        if (!item.contains("name") || !item.at("name").is_string())
          throw ConfigError("checks entry needs a string 'name'");
        req.name = item.at("name").get<std::string>();
        if (item.contains("tolerance")) {
          if (!item.at("tolerance").is_number() || item.at("tolerance").get<double>() <= 0)
            throw ConfigError("check tolerance must be a positive number");
          req.tolerance = item.at("tolerance").get<double>();
        }
        if (item.contains("grid")) req.grid = grid_value(item.at("grid"), "check grid");
      } else {
        throw ConfigError("checks entries must be names or objects");
      }
      cfg.checks.push_back(std::move(req));
    }
  }

  if (doc.contains("tolerance")) {
    if (!doc.at("tolerance").is_number() || doc.at("tolerance").get<double>() <= 0)
      throw ConfigError("'tolerance' must be a positive number");
    cfg.tolerance = doc.at("tolerance").get<double>();
  }
  if (doc.contains("grid")) cfg.grid = grid_value(doc.at("grid"), "'grid'");
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_integer())
      throw ConfigError("'seed' must be an integer");
    cfg.seed = doc.at("seed").get<long>();
  }
  if (doc.contains("fields")) {
    if (!doc.at("fields").is_object())
      throw ConfigError("'fields' must be an object of expressions");
    for (const auto& [key, value] : doc.at("fields").items()) {
      if (!value.is_string())
        throw ConfigError("field override '" + key + "' must be a string expression");
      cfg.fields[key] = value.get<std::string>();
    }
  }
  return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(doc);
}

// ------------------------------------------------------------ execution

Report run_scenario(const ScenarioConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario& scen =
      cfg.inline_geometry ? *cfg.inline_geometry : find_scenario(cfg.scenario);

  std::vector<CheckRequest> requests = cfg.checks;
  if (requests.empty())
    for (const auto& name : scen.default_checks) requests.push_back({name, {}, {}});

  Report rep;
  rep.scenario = scen.id;
  rep.seed = cfg.seed;
  if (cfg.grid) rep.grid = *cfg.grid;

  for (const auto& req : requests) {
    const double tol = req.tolerance ? *req.tolerance
                       : cfg.tolerance ? *cfg.tolerance
                                       : default_tolerance(req.name);
    CheckContext c{scen, tol, req.grid ? *req.grid : std::vector<int>{},
                   check_stream(cfg.seed, req.name), &cfg.fields};
    try {
      if (proposition_ids().count(req.name))
        proposition_check(req.name, c, rep.checks);
      else if (req.name == "hessian_transfer")
        hessian_transfer_check(c, rep.checks);
      else if (req.name == "radius_hessian")
        radius_hessian_check(c, rep.checks);
      else if (req.name == "hadamard_sup")
        hadamard_check(c, true, rep.checks);
      else if (req.name == "hadamard_integral")
        hadamard_check(c, false, rep.checks);
      else if (req.name == "psh_defect")
        psh_defect_check(c, rep.checks);
      else if (req.name == "first_variation")
        first_variation_check(c, rep.checks);
      else if (req.name == "second_variation")
        variation_check(c, rep.checks);
      else if (req.name == "toric_volume")
        toric_volume_analysis(c, rep.checks);
      else if (req.name == "lagrangian_determinant")
        lagrangian_determinant_check(c, rep.checks);
      else if (req.name == "ricci_two_form")
        ricci_two_form_check(c, rep.checks);
      else if (req.name == "square_distance")
        square_distance_check(c, rep.checks);
      else
        throw ConfigError("unknown check id '" + req.name + "'");
    } catch (const ConfigError&) {
      throw;  // misconfiguration, not a numerical verdict
    } catch (const ParseError&) {
      throw;
    } catch (const HypothesisViolatedError& e) {
      rep.checks.push_back(detail::hypothesis_record(req.name, fallback_tag(req.name),
                                                     1.0, tol, e.what()));
    } catch (const Error& e) {
      CheckRecord rec;
      rec.name = req.name;
      rec.paper_tag = fallback_tag(req.name);
      rec.residual = std::numeric_limits<double>::infinity();
      rec.tolerance = tol;
      rec.pass = false;
      rec.witness["error"] = e.what();
      rep.checks.push_back(std::move(rec));
    }
  }

  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return rep;
}

nlohmann::ordered_json report_json(const Report& rep) {
  nlohmann::ordered_json doc;
  doc["scenario"] = rep.scenario;
  doc["seed"] = rep.seed;
  doc["grid"] = rep.grid;
  doc["checks"] = nlohmann::ordered_json::array();
  for (const auto& rec : rep.checks) {
    nlohmann::ordered_json r;
    r["name"] = rec.name;
    r["paper_tag"] = rec.paper_tag;
    r["residual"] = rec.residual;
    r["tolerance"] = rec.tolerance;
    r["pass"] = rec.pass;
    if (!rec.witness.is_null()) r["witness"] = rec.witness;
    doc["checks"].push_back(std::move(r));
  }
  doc["wall_ms"] = rep.wall_ms;
  return doc;
}

int report_exit_code(const Report& rep) {
  bool fail = false;
  for (const auto& rec : rep.checks) {
    if (rec.hypothesis_violated) return 3;
    fail = fail || !rec.pass;
  }
  return fail ? 1 : 0;
}

}  // namespace calibra
