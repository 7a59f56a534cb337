#pragma once

#include <string>

#include <json.hpp>

#include "pkglab/channel.hpp"

namespace pkglab::config {

using Json = nlohmann::json;

/// Reads a JSON document; // and /* */ comments are permitted. Throws
/// ConfigError on I/O or syntax problems.
Json read_json_file(const std::string& path);

/// Scenario from a JSON object. Every key is optional and falls back to the
/// default scenario; unknown keys are rejected. Recognized keys:
///   M, L (perfect square) or L_H + L_V, carrier_hz or wavelength_m,
///   irs_spacing_wavelengths, bs, irs, bob, eve ([x, y, z] meters),
///   eve_distance_wavelengths (Eve offset from Bob along -x, used when "eve"
///   is absent), kappa, eta, P_b_dbm, P_max_dbm, rho (override),
///   noise {psd_dbm_per_hz, bandwidth_hz, noise_figure_db},
///   path_loss {direct, reflect: {beta0_db, alpha, d0}}.
Scenario scenario_from_json(const Json& j);

/// Fully explicit form that scenario_from_json reads back unchanged.
Json scenario_to_json(const Scenario& scenario);

/// Throws ConfigError listing keys of `j` not present in `allowed`.
void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed,
                         const std::string& where);

}  // namespace pkglab::config
