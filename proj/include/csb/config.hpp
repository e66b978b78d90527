#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "csb/init.hpp"
#include "csb/integrator.hpp"
#include "csb/model.hpp"

namespace csb {

// Full description of one run. Defaults are a small well-posed simplified
// system; a config file overrides any subset of keys.
struct RunConfig {
  InitConfig init{};
  ModelParams params{};
  StepControl ctl{};
  double t_end = 10.0;
  double sample_every = 0.1;
  std::string output_dir = "results";
  std::optional<std::string> scenario;  // set when launched by name

  // Nested validators plus cross-field checks (t_end, sample cadence, and
  // n/dim agreement between init and params).
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

// Parse failure carrying the offending key (dotted path) and the violated
// constraint. what() is "<path>: <reason>".
struct ConfigError : std::runtime_error {
  std::string path;
  std::string reason;

  ConfigError(std::string path_, std::string reason_)
      : std::runtime_error(path_ + ": " + reason_),
        path(std::move(path_)),
        reason(std::move(reason_)) {}
};

// Flat INI-style text: [section] headers, one "key = value" per line, full
// lines starting with '#' or ';' are comments. Sections: init, model, step,
// run. Unknown sections or keys are rejected; omitted keys keep defaults.
// pos_box / vel_box take either two numbers (every axis) or 2*dim numbers
// (per axis, lo hi lo hi ...). n and dim live under [init] and are shared
// with the model automatically.
RunConfig parse_config(const std::string& text);

// Inverse of parse_config: emits every key with shortest round-trip decimal
// numbers, so parse_config(print_config(c)) == c for any valid c.
std::string print_config(const RunConfig& c);

// File convenience wrapper; I/O failures surface as ConfigError on the path.
RunConfig load_config_file(const std::string& path);

}  // namespace csb
