#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <json.hpp>

#include "calibra/g2.hpp"
#include "calibra/kahler.hpp"
#include "calibra/submersion.hpp"

namespace calibra {

// Fixed enumeration of paper tags a check record may carry.
const std::vector<std::string>& paper_tags();
bool known_paper_tag(const std::string& tag);

// One verified statement inside a report.  The residual/tolerance pair
// determines the pass flag; a hypothesis violation is a failing record whose
// witness explains which precondition broke.
struct CheckRecord {
  std::string name;
  std::string paper_tag;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool hypothesis_violated = false;
  nlohmann::ordered_json witness;  // null when there is nothing to add
};

struct Report {
  std::string scenario;
  long seed = 0;
  std::vector<int> grid;  // echo of the config override, may be empty
  std::vector<CheckRecord> checks;
  double wall_ms = 0.0;
};

nlohmann::ordered_json report_json(const Report& rep);
// 0 all pass, 1 any failure, 3 any hypothesis violation.
int report_exit_code(const Report& rep);

// Surface-of-revolution data for the toric analysis: metric
// a(u)^2 du^2 + r(u)^2 dtheta^2 over the u-range.
struct ToricProfile {
  std::string radius;      // r(x) as a one-variable expression
  std::string arc_factor;  // a(x) as a one-variable expression
  ChartDomain domain;
};

struct Scenario {
  std::string id;
  std::string description;
  std::optional<RiemannianSubmersion> submersion;
  std::optional<KahlerStructure> kahler;
  std::optional<G2Structure> g2;
  std::optional<ToricProfile> toric;
  std::string field;  // default test function on the total chart
  std::vector<std::string> default_checks;
  Eigen::VectorXd probe_base, probe_direction;
};

const std::vector<Scenario>& scenario_catalog();
const Scenario& find_scenario(const std::string& id);  // ConfigError if unknown

struct CheckRequest {
  std::string name;
  std::optional<double> tolerance;
  std::optional<std::vector<int>> grid;
};

struct ScenarioConfig {
  std::string scenario;  // catalog id; "custom" when geometry is inline
  std::optional<Scenario> inline_geometry;
  std::vector<CheckRequest> checks;  // empty means the scenario defaults
  std::optional<double> tolerance;
  std::optional<std::vector<int>> grid;
  long seed = 0;
  std::map<std::string, std::string> fields;  // expression overrides, e.g. "f"
};

// Strict parse: unknown keys anywhere raise ConfigError.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig parse_config_file(const std::string& path);

Report run_scenario(const ScenarioConfig& cfg);

// Everything a single check driver needs.  tol and grid are the resolved
// per-check values; stream seeds the low-discrepancy sampling.
struct CheckContext {
  const Scenario& scenario;
  double tol;
  std::vector<int> grid;
  long stream;
  const std::map<std::string, std::string>* fields;

  std::string field_or(const std::string& key, const std::string& fallback) const;
};

long check_stream(long seed, const std::string& check_name);

// rho(X, Y) = Ric(JX, Y) at p.
double ricci_two_form(const KahlerStructure& k, const Eigen::VectorXd& p,
                      const Eigen::VectorXd& X, const Eigen::VectorXd& Y);

void hessian_transfer_check(const CheckContext& c, std::vector<CheckRecord>& out);
void radius_hessian_check(const CheckContext& c, std::vector<CheckRecord>& out);
void hadamard_check(const CheckContext& c, bool supremum, std::vector<CheckRecord>& out);
void psh_defect_check(const CheckContext& c, std::vector<CheckRecord>& out);
void proposition_check(const std::string& prop, const CheckContext& c,
                       std::vector<CheckRecord>& out);
void variation_check(const CheckContext& c, std::vector<CheckRecord>& out);
void first_variation_check(const CheckContext& c, std::vector<CheckRecord>& out);
void toric_volume_analysis(const CheckContext& c, std::vector<CheckRecord>& out);
void lagrangian_determinant_check(const CheckContext& c, std::vector<CheckRecord>& out);
void ricci_two_form_check(const CheckContext& c, std::vector<CheckRecord>& out);
void square_distance_check(const CheckContext& c, std::vector<CheckRecord>& out);

}  // namespace calibra
