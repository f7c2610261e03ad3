#include <cmath>
#include <limits>
#include <sstream>

#include "bbmflow/verification.hpp"
#include "json.hpp"

namespace bbmflow {

using json = nlohmann::ordered_json;

namespace {

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json config_json(const VerifyConfig& c) {
  const auto& tol = c.tolerance;
  return json{
      {"scenario", to_string(c.scenario)},
      {"s", c.s},
      {"sigma", c.sigma},
      {"p", c.p},
      {"p1", c.p1},
      {"p2", c.p2},
      {"t", c.t},
      {"t_grid", c.t_grid},
      {"modes", c.modes},
      {"count", c.count},
      {"holdout", c.holdout},
      {"aux_count", c.aux_count},
      {"seed", c.seed},
      {"seed2", c.seed2},
      {"dt", c.dt},
      {"v_grid", c.v_grid},
      {"epsilons", c.epsilons},
      {"lipschitz_cases", c.lipschitz_cases},
      {"floor_replicates", c.floor_replicates},
      {"alpha", c.alpha},
      {"forced_C", c.forced_C ? json(*c.forced_C) : json(nullptr)},
      {"anchors", c.anchors},
      {"compare_dt", c.compare_dt},
      {"tolerance",
       {{"ratio_spread_max", tol.ratio_spread_max},
        {"shrink_ratio_max", tol.shrink_ratio_max},
        {"se_multiplier", tol.se_multiplier},
        {"lipschitz_rel_tol", tol.lipschitz_rel_tol},
        {"subgaussian_slope_max", tol.subgaussian_slope_max},
        {"log_slope_target", tol.log_slope_target},
        {"log_slope_tol", tol.log_slope_tol}}},
  };
}

VerifyConfig config_from(const json& j) {
  VerifyConfig c;
  c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  c.s = j.at("s").get<double>();
  c.sigma = j.at("sigma").get<double>();
  c.p = j.at("p").get<double>();
  c.p1 = j.at("p1").get<double>();
  c.p2 = j.at("p2").get<double>();
  c.t = j.at("t").get<double>();
  c.t_grid = j.at("t_grid").get<std::vector<double>>();
  c.modes = j.at("modes").get<int>();
  c.count = j.at("count").get<std::size_t>();
  c.holdout = j.at("holdout").get<std::size_t>();
  c.aux_count = j.at("aux_count").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.seed2 = j.at("seed2").get<std::uint64_t>();
  c.dt = j.at("dt").get<double>();
  c.v_grid = j.at("v_grid").get<std::vector<double>>();
  c.epsilons = j.at("epsilons").get<std::vector<double>>();
  c.lipschitz_cases = j.at("lipschitz_cases").get<std::size_t>();
  c.floor_replicates = j.at("floor_replicates").get<std::size_t>();
  c.alpha = j.at("alpha").get<double>();
  if (!j.at("forced_C").is_null()) c.forced_C = j["forced_C"].get<double>();
  c.anchors = j.at("anchors").get<bool>();
  c.compare_dt = j.at("compare_dt").get<bool>();
  const json& tol = j.at("tolerance");
  c.tolerance.ratio_spread_max = tol.at("ratio_spread_max").get<double>();
  c.tolerance.shrink_ratio_max = tol.at("shrink_ratio_max").get<double>();
  c.tolerance.se_multiplier = tol.at("se_multiplier").get<double>();
  c.tolerance.lipschitz_rel_tol = tol.at("lipschitz_rel_tol").get<double>();
  c.tolerance.subgaussian_slope_max = tol.at("subgaussian_slope_max").get<double>();
  c.tolerance.log_slope_target = tol.at("log_slope_target").get<double>();
  c.tolerance.log_slope_tol = tol.at("log_slope_tol").get<double>();
  return c;
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "";
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

std::string report_to_json(const VerifyReport& report, int indent) {
  json metrics = json::object();
  for (const auto& m : report.metrics) metrics[m.name] = number(m.value);
  json tables = json::array();
  for (const auto& t : report.tables) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json r = json::array();
      for (double x : row) r.push_back(number(x));
      rows.push_back(std::move(r));
    }
    tables.push_back(json{{"name", t.name}, {"columns", t.columns}, {"labels", t.labels}, {"rows", rows}});
  }
  json j{{"schema", 1},
         {"scenario", to_string(report.scenario)},
         {"pass", report.pass},
         {"metrics", metrics},
         {"tables", tables},
         {"notes", report.notes},
         {"config", config_json(report.config)}};
  return j.dump(indent) + "\n";
}

VerifyReport report_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw std::invalid_argument(std::string("report_from_json: ") + ex.what());
  }
  try {
    if (j.at("schema").get<int>() != 1) throw std::invalid_argument("report_from_json: unsupported schema");
    VerifyReport r;
    r.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    r.pass = j.at("pass").get<bool>();
    for (const auto& [name, value] : j.at("metrics").items()) r.metrics.push_back({name, number_from(value)});
    for (const auto& t : j.at("tables")) {
      Table table{t.at("name").get<std::string>(), t.at("columns").get<std::vector<std::string>>(),
                  t.at("labels").get<std::vector<std::string>>(), {}};
      for (const auto& row : t.at("rows")) {
        std::vector<double> values;
        for (const auto& x : row) values.push_back(number_from(x));
        table.rows.push_back(std::move(values));
      }
      r.tables.push_back(std::move(table));
    }
    r.notes = j.at("notes").get<std::vector<std::string>>();
    r.config = config_from(j.at("config"));
    return r;
  } catch (const json::exception& ex) {
    throw std::invalid_argument(std::string("report_from_json: ") + ex.what());
  }
}

std::string report_to_csv(const VerifyReport& report) {
  std::ostringstream os;
  for (const auto& t : report.tables) {
    os << "# " << t.name << "\n";
    const bool labelled = !t.labels.empty();
    if (labelled) os << "label,";
    for (std::size_t k = 0; k < t.columns.size(); ++k) os << (k ? "," : "") << t.columns[k];
    os << "\n";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      if (labelled) os << (r < t.labels.size() ? t.labels[r] : "") << ",";
      for (std::size_t k = 0; k < t.rows[r].size(); ++k) os << (k ? "," : "") << csv_number(t.rows[r][k]);
      os << "\n";
    }
  }
  return os.str();
}

}  // namespace bbmflow
