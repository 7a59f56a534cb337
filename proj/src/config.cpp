#include "pkglab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace pkglab::config {

namespace {

template <typename T>
T get(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

Vec3 get_vec3(const Json& j, const char* key, const Vec3& fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_array() || v.size() != 3) {
    throw ConfigError(std::string("config key '") + key + "' must be [x, y, z]");
  }
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number()) {
      throw ConfigError(std::string("config key '") + key + "' must hold numbers");
    }
    out(i) = v[static_cast<std::size_t>(i)].get<double>();
  }
  return out;
}

PathLossModel get_path_loss(const Json& j, const PathLossModel& fallback,
                            const std::string& where) {
  reject_unknown_keys(j, {"beta0_db", "alpha", "d0"}, where);
  return {get(j, "beta0_db", fallback.beta0_db), get(j, "alpha", fallback.alpha),
          get(j, "d0", fallback.d0)};
}

Json vec3_json(const Vec3& v) { return Json::array({v(0), v(1), v(2)}); }

}  // namespace

void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> names(allowed.begin(), allowed.end());
  std::ostringstream unknown;
  for (const auto& item : j.items()) {
    if (!names.count(item.key())) unknown << " '" << item.key() << "'";
  }
  if (!unknown.str().empty()) throw ConfigError(where + ": unknown key(s)" + unknown.str());
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return Json::parse(buffer.str(), nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

Scenario scenario_from_json(const Json& j) {
  reject_unknown_keys(j,
                      {"M", "L", "L_H", "L_V", "carrier_hz", "wavelength_m",
                       "irs_spacing_wavelengths", "irs_spacing_m", "bs", "irs", "bob", "eve",
                       "eve_distance_wavelengths", "kappa", "eta", "P_b_dbm", "P_max_dbm",
                       "rho", "noise", "path_loss"},
                      "scenario");
  if (j.contains("carrier_hz") && j.contains("wavelength_m")) {
    throw ConfigError("scenario: give carrier_hz or wavelength_m, not both");
  }
  double lambda = kSpeedOfLight / kDefaultCarrierHz;
  if (j.contains("carrier_hz")) {
    const double f = get(j, "carrier_hz", kDefaultCarrierHz);
    if (!(f > 0.0)) throw ConfigError("scenario: carrier_hz must be positive");
    lambda = kSpeedOfLight / f;
  }
  lambda = get(j, "wavelength_m", lambda);
  if (!(lambda > 0.0)) throw ConfigError("scenario: wavelength must be positive");

  const int M = get(j, "M", 4);
  Scenario s;
  if (j.contains("L_H") || j.contains("L_V")) {
    if (j.contains("L")) throw ConfigError("scenario: give L or L_H/L_V, not both");
    s.geometry = default_geometry(M, 1, lambda);
    s.geometry.L_H = get(j, "L_H", 1);
    s.geometry.L_V = get(j, "L_V", 1);
  } else {
    s.geometry = default_geometry(M, get(j, "L", 16), lambda);
  }
  if (j.contains("irs_spacing_m") && j.contains("irs_spacing_wavelengths")) {
    throw ConfigError("scenario: give one IRS spacing key, not both");
  }
  s.geometry.delta = get(j, "irs_spacing_wavelengths", 0.5) * lambda;
  s.geometry.delta = get(j, "irs_spacing_m", s.geometry.delta);
  s.geometry.bs_position = get_vec3(j, "bs", s.geometry.bs_position);
  s.geometry.irs_position = get_vec3(j, "irs", s.geometry.irs_position);
  s.geometry.bob_position = get_vec3(j, "bob", s.geometry.bob_position);
  if (j.contains("eve")) {
    if (j.contains("eve_distance_wavelengths")) {
      throw ConfigError("scenario: give eve or eve_distance_wavelengths, not both");
    }
    s.geometry.eve_position = get_vec3(j, "eve", s.geometry.eve_position);
  } else {
    place_eve(s.geometry, get(j, "eve_distance_wavelengths", 0.5) * lambda);
  }

  StatisticsOptions& o = s.options;
  o.kappa = get(j, "kappa", o.kappa);
  o.eta = get(j, "eta", o.eta);
  o.P_b_dbm = get(j, "P_b_dbm", o.P_b_dbm);
  o.P_max_dbm = get(j, "P_max_dbm", o.P_max_dbm);
  if (j.contains("rho") && !j.at("rho").is_null()) o.rho_override = get(j, "rho", 0.0);
  if (j.contains("noise")) {
    const Json& n = j.at("noise");
    reject_unknown_keys(n, {"psd_dbm_per_hz", "bandwidth_hz", "noise_figure_db"}, "noise");
    o.noise.psd_dbm_per_hz = get(n, "psd_dbm_per_hz", o.noise.psd_dbm_per_hz);
    o.noise.bandwidth_hz = get(n, "bandwidth_hz", o.noise.bandwidth_hz);
    o.noise.noise_figure_db = get(n, "noise_figure_db", o.noise.noise_figure_db);
    if (!(o.noise.bandwidth_hz > 0.0)) throw ConfigError("noise: bandwidth must be positive");
  }
  if (j.contains("path_loss")) {
    const Json& p = j.at("path_loss");
    reject_unknown_keys(p, {"direct", "reflect"}, "path_loss");
    if (p.contains("direct")) o.direct = get_path_loss(p.at("direct"), o.direct, "path_loss.direct");
    if (p.contains("reflect")) {
      o.reflect = get_path_loss(p.at("reflect"), o.reflect, "path_loss.reflect");
    }
  }
  if (!(o.eta >= 0.0 && o.eta <= 1.0)) throw ConfigError("scenario: eta must lie in [0, 1]");
  if (!(o.kappa >= 0.0)) throw ConfigError("scenario: kappa must be >= 0");
  if (!std::isfinite(o.P_b_dbm) || !std::isfinite(o.P_max_dbm)) {
    throw ConfigError("scenario: powers must be finite");
  }
  s.geometry.validate();
  return s;
}

Json scenario_to_json(const Scenario& s) {
  const auto& g = s.geometry;
  const auto& o = s.options;
  Json j;
  j["M"] = g.M;
  j["L_H"] = g.L_H;
  j["L_V"] = g.L_V;
  j["wavelength_m"] = g.lambda;
  j["irs_spacing_m"] = g.delta;
  j["bs"] = vec3_json(g.bs_position);
  j["irs"] = vec3_json(g.irs_position);
  j["bob"] = vec3_json(g.bob_position);
  j["eve"] = vec3_json(g.eve_position);
  j["kappa"] = o.kappa;
  j["eta"] = o.eta;
  j["P_b_dbm"] = o.P_b_dbm;
  j["P_max_dbm"] = o.P_max_dbm;
  if (o.rho_override) j["rho"] = *o.rho_override;
  j["noise"] = {{"psd_dbm_per_hz", o.noise.psd_dbm_per_hz},
                {"bandwidth_hz", o.noise.bandwidth_hz},
                {"noise_figure_db", o.noise.noise_figure_db}};
  auto model = [](const PathLossModel& m) {
    return Json{{"beta0_db", m.beta0_db}, {"alpha", m.alpha}, {"d0", m.d0}};
  };
  j["path_loss"] = {{"direct", model(o.direct)}, {"reflect", model(o.reflect)}};
  return j;
}

}  // namespace pkglab::config
