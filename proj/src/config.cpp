#include "csb/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string_view>
#include <vector>

namespace csb {

namespace {

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& path, const std::string& tok) {
  double v = 0.0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e)
    throw ConfigError(path, "not a number: '" + tok + "'");
  return v;
}

long long to_ll(const std::string& path, const std::string& tok) {
  long long v = 0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e)
    throw ConfigError(path, "not an integer: '" + tok + "'");
  return v;
}

std::uint64_t to_u64(const std::string& path, const std::string& tok) {
  std::uint64_t v = 0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e)
    throw ConfigError(path, "not an unsigned integer: '" + tok + "'");
  return v;
}

int to_int(const std::string& path, const std::string& tok) {
  long long v = to_ll(path, tok);
  if (v < -(1LL << 31) || v >= (1LL << 31))
    throw ConfigError(path, "integer out of range: '" + tok + "'");
  return static_cast<int>(v);
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<Interval> parse_box(const std::string& path,
                                const std::string& val, int dim) {
  std::vector<std::string> toks = split_ws(val);
  if (toks.size() == 2 && dim != 1)
    return uniform_box(to_double(path, toks[0]), to_double(path, toks[1]),
                       dim);
  if (toks.size() == size_t(2) * size_t(dim)) {
    std::vector<Interval> out(static_cast<size_t>(dim));
    for (int k = 0; k < dim; ++k) {
      out[size_t(k)].lo = to_double(path, toks[size_t(2 * k)]);
      out[size_t(k)].hi = to_double(path, toks[size_t(2 * k + 1)]);
    }
    return out;
  }
  throw ConfigError(path, "expected 2 numbers (all axes) or 2*dim numbers "
                          "(lo hi per axis), got " +
                              std::to_string(toks.size()));
}

using Entries = std::map<std::string, std::string>;

const std::string* find(const std::map<std::string, Entries>& sec,
                        const std::string& s, const std::string& k) {
  auto it = sec.find(s);
  if (it == sec.end()) return nullptr;
  auto jt = it->second.find(k);
  return jt == it->second.end() ? nullptr : &jt->second;
}

}  // namespace

void RunConfig::validate() const {
  init.validate();
  params.validate();
  ctl.validate();
  if (init.n != params.n || init.dim != params.dim)
    throw std::invalid_argument("init and model disagree on n or dim");
  if (!std::isfinite(t_end) || t_end < 0.0)
    throw std::invalid_argument("t_end must be finite and >= 0");
  if (!std::isfinite(sample_every))
    throw std::invalid_argument("sample_every must be finite");
  if (output_dir.empty())
    throw std::invalid_argument("output_dir must be nonempty");
  if (scenario && scenario->empty())
    throw std::invalid_argument("scenario name must be nonempty when given");
}

RunConfig parse_config(const std::string& text) {
  static const std::map<std::string, std::set<std::string>> kSchema = {
      {"init", {"n", "dim", "seed", "pos_box", "vel_box"}},
      {"model", {"variant", "kernel", "alpha", "k1", "k2", "k_tilde", "big_r"}},
      {"step", {"abs_tol", "rel_tol", "dt_init", "dt_min", "dt_max",
                "proximity_factor", "r_floor", "exec"}},
      {"run", {"t_end", "sample_every", "output_dir", "scenario"}},
  };

  std::map<std::string, Entries> sec;
  std::string cur;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config", "line " + std::to_string(lineno) +
                                        ": unterminated section header");
      cur = trim(line.substr(1, line.size() - 2));
      if (kSchema.find(cur) == kSchema.end())
        throw ConfigError(cur, "unknown section (expected init, model, "
                               "step, or run)");
      sec[cur];
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config", "line " + std::to_string(lineno) +
                                      ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config",
                        "line " + std::to_string(lineno) + ": empty key");
    if (cur.empty())
      throw ConfigError("config", "line " + std::to_string(lineno) +
                                      ": key '" + key +
                                      "' outside any [section]");
    if (kSchema.at(cur).find(key) == kSchema.at(cur).end())
      throw ConfigError(cur + "." + key, "unknown key");
    if (!sec[cur].emplace(key, val).second)
      throw ConfigError(cur + "." + key, "duplicate key");
  }

  RunConfig cfg;
  if (const auto* v = find(sec, "init", "n"))
    cfg.init.n = to_int("init.n", *v);
  if (const auto* v = find(sec, "init", "dim"))
    cfg.init.dim = to_int("init.dim", *v);
  if (const auto* v = find(sec, "init", "seed"))
    cfg.init.seed = to_u64("init.seed", *v);
  if (cfg.init.dim < 1) throw ConfigError("init.dim", "init.dim must be >= 1");
  if (const auto* v = find(sec, "init", "pos_box"))
    cfg.init.pos_box = parse_box("init.pos_box", *v, cfg.init.dim);
  else
    cfg.init.pos_box = uniform_box(-5.0, 5.0, cfg.init.dim);
  if (const auto* v = find(sec, "init", "vel_box"))
    cfg.init.vel_box = parse_box("init.vel_box", *v, cfg.init.dim);
  else
    cfg.init.vel_box = uniform_box(-1.0, 1.0, cfg.init.dim);

  if (const auto* v = find(sec, "model", "variant")) {
    if (*v == "original")
      cfg.params.variant = ModelVariant::Original;
    else if (*v == "simplified")
      cfg.params.variant = ModelVariant::Simplified;
    else
      throw ConfigError("model.variant",
                        "expected one of: original, simplified");
  }
  if (const auto* v = find(sec, "model", "kernel")) {
    if (*v == "singular")
      cfg.params.kernel.kind = KernelKind::Singular;
    else if (*v == "regular")
      cfg.params.kernel.kind = KernelKind::Regular;
    else
      throw ConfigError("model.kernel", "expected one of: singular, regular");
  }
  if (const auto* v = find(sec, "model", "alpha"))
    cfg.params.kernel.alpha = to_double("model.alpha", *v);
  if (const auto* v = find(sec, "model", "k1"))
    cfg.params.k1 = to_double("model.k1", *v);
  if (const auto* v = find(sec, "model", "k2"))
    cfg.params.k2 = to_double("model.k2", *v);
  if (const auto* v = find(sec, "model", "k_tilde"))
    cfg.params.k_tilde = to_double("model.k_tilde", *v);
  if (const auto* v = find(sec, "model", "big_r"))
    cfg.params.big_r = to_double("model.big_r", *v);

  if (const auto* v = find(sec, "step", "abs_tol"))
    cfg.ctl.abs_tol = to_double("step.abs_tol", *v);
  if (const auto* v = find(sec, "step", "rel_tol"))
    cfg.ctl.rel_tol = to_double("step.rel_tol", *v);
  if (const auto* v = find(sec, "step", "dt_init"))
    cfg.ctl.dt_init = to_double("step.dt_init", *v);
  if (const auto* v = find(sec, "step", "dt_min"))
    cfg.ctl.dt_min = to_double("step.dt_min", *v);
  if (const auto* v = find(sec, "step", "dt_max"))
    cfg.ctl.dt_max = to_double("step.dt_max", *v);
  if (const auto* v = find(sec, "step", "proximity_factor"))
    cfg.ctl.proximity_factor = to_double("step.proximity_factor", *v);
  if (const auto* v = find(sec, "step", "r_floor"))
    cfg.ctl.r_floor = to_double("step.r_floor", *v);
  if (const auto* v = find(sec, "step", "exec")) {
    if (*v == "serial")
      cfg.ctl.exec = Exec::Serial;
    else if (*v == "parallel")
      cfg.ctl.exec = Exec::Parallel;
    else
      throw ConfigError("step.exec", "expected one of: serial, parallel");
  }

  if (const auto* v = find(sec, "run", "t_end"))
    cfg.t_end = to_double("run.t_end", *v);
  if (const auto* v = find(sec, "run", "sample_every"))
    cfg.sample_every = to_double("run.sample_every", *v);
  if (const auto* v = find(sec, "run", "output_dir")) cfg.output_dir = *v;
  if (const auto* v = find(sec, "run", "scenario")) cfg.scenario = *v;

  cfg.params.n = cfg.init.n;
  cfg.params.dim = cfg.init.dim;

  try {
    cfg.init.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("init", e.what());
  }
  try {
    cfg.params.kernel.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model.alpha", e.what());
  }
  try {
    cfg.params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("model", e.what());
  }
  try {
    cfg.ctl.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("step", e.what());
  }
  if (!std::isfinite(cfg.t_end) || cfg.t_end < 0.0)
    throw ConfigError("run.t_end", "must be finite and >= 0");
  if (!std::isfinite(cfg.sample_every))
    throw ConfigError("run.sample_every", "must be finite");
  if (cfg.output_dir.empty())
    throw ConfigError("run.output_dir", "must be nonempty");
  if (cfg.scenario && cfg.scenario->empty())
    throw ConfigError("run.scenario", "must be nonempty when given");
  return cfg;
}

std::string print_config(const RunConfig& c) {
  c.validate();
  std::ostringstream out;
  out << "[init]\n";
  out << "n = " << c.init.n << "\n";
  out << "dim = " << c.init.dim << "\n";
  out << "seed = " << c.init.seed << "\n";
  out << "pos_box =";
  for (const Interval& iv : c.init.pos_box)
    out << " " << fmt(iv.lo) << " " << fmt(iv.hi);
  out << "\n";
  out << "vel_box =";
  for (const Interval& iv : c.init.vel_box)
    out << " " << fmt(iv.lo) << " " << fmt(iv.hi);
  out << "\n\n";

  out << "[model]\n";
  out << "variant = "
      << (c.params.variant == ModelVariant::Original ? "original"
                                                     : "simplified")
      << "\n";
  out << "kernel = "
      << (c.params.kernel.kind == KernelKind::Singular ? "singular"
                                                       : "regular")
      << "\n";
  out << "alpha = " << fmt(c.params.kernel.alpha) << "\n";
  out << "k1 = " << fmt(c.params.k1) << "\n";
  out << "k2 = " << fmt(c.params.k2) << "\n";
  out << "k_tilde = " << fmt(c.params.k_tilde) << "\n";
  out << "big_r = " << fmt(c.params.big_r) << "\n\n";

  out << "[step]\n";
  out << "abs_tol = " << fmt(c.ctl.abs_tol) << "\n";
  out << "rel_tol = " << fmt(c.ctl.rel_tol) << "\n";
  out << "dt_init = " << fmt(c.ctl.dt_init) << "\n";
  out << "dt_min = " << fmt(c.ctl.dt_min) << "\n";
  out << "dt_max = " << fmt(c.ctl.dt_max) << "\n";
  out << "proximity_factor = " << fmt(c.ctl.proximity_factor) << "\n";
  out << "r_floor = " << fmt(c.ctl.r_floor) << "\n";
  out << "exec = " << (c.ctl.exec == Exec::Parallel ? "parallel" : "serial")
      << "\n\n";

  out << "[run]\n";
  out << "t_end = " << fmt(c.t_end) << "\n";
  out << "sample_every = " << fmt(c.sample_every) << "\n";
  out << "output_dir = " << c.output_dir << "\n";
  if (c.scenario) out << "scenario = " << *c.scenario << "\n";
  return out.str();
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot read config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace csb
