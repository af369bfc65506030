#include "nsfem/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "nsfem/fractional.hpp"

namespace nsfem {

ModelSpec ModelConfig::to_model() const {
  ModelSpec m;
  m.bc = bc;
  m.gamma = gamma;
  m.a1 = CoefficientField::constant(a1_diffusion, a1_reaction, a1_advection);
  m.a2 = CoefficientField::constant(a2_diffusion, a2_reaction, a2_advection);
  // A2 must be invertible; with Dirichlet data a pure diffusion is coercive too.
  if (bc == BoundaryCondition::kDirichlet && a2_diffusion > 0.0 && a2_reaction >= 0.0 &&
      a2_advection.isZero(0.0)) {
    m.a2.coercive = true;
  }
  if (nonlinearity == "sin") {
    m.nonlinearity = Nonlinearity::sine();
    m.nonlinearity->lipschitz = lipschitz;
  } else if (nonlinearity != "none") {
    throw ConfigError(fmt::format("unknown nonlinearity '{}' (expected none or sin)", nonlinearity));
  }
  if (initial_value != 0.0) {
    const double v = initial_value;
    m.initial = [v](const Point&) { return v; };
  }
  return m;
}

double ExperimentConfig::resolution_for(double h) const {
  return k ? *k : default_resolution(model.gamma, h, c0);
}

namespace {

void require_steps(double T, double step, const char* what) {
  SchemeParams p;
  p.dt = step;
  p.final_time = T;
  try {
    p.num_steps();
  } catch (const DomainError& e) {
    throw ConfigError(fmt::format("{}: {}", what, e.what()));
  }
}

void require_multiple(double coarse, double fine, const char* what) {
  const double r = coarse / fine;
  if (r < 1.0 - 1e-12 || std::abs(r - std::round(r)) > 1e-9 * r) {
    throw ConfigError(fmt::format("{} ({}) must be an integer multiple of dt_ref ({})", what,
                                  coarse, fine));
  }
}

void validate_common(const ExperimentConfig& c) {
  if (!(c.model.gamma > 0.0 && c.model.gamma <= 1.0)) {
    throw ConfigError(fmt::format("gamma must lie in (0, 1], got {}", c.model.gamma));
  }
  if (!(c.final_time > 0.0)) throw ConfigError("T must be positive");
  if (c.replicates < 1) throw ConfigError("replicates must be at least 1");
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
  if (c.k && !(*c.k > 0.0)) throw ConfigError("k must be positive");
  if (!(c.c0 > 0.0)) throw ConfigError("c0 must be positive");
  if (!(c.tol > 0.0)) throw ConfigError("tol must be positive");
  require_steps(c.final_time, c.reference_dt(), "dt_ref");
}

}  // namespace

void ExperimentConfig::validate_spatial() const {
  validate_common(*this);
  if (level_min < 0 || level_max < level_min) {
    throw ConfigError(fmt::format("invalid level range {}..{}", level_min, level_max));
  }
  if (level_ref <= level_max && !(allow_degenerate && level_ref == level_max)) {
    throw ConfigError(
        fmt::format("level_ref ({}) must exceed level_max ({})", level_ref, level_max));
  }
  require_steps(final_time, dt, "dt");
  require_multiple(dt, reference_dt(), "dt");
}

void ExperimentConfig::validate_time() const {
  validate_common(*this);
  if (time_level < 0) throw ConfigError("time_level must be nonnegative");
  if (dt_list.empty()) throw ConfigError("dt_list must name at least one time step");
  for (double step : dt_list) {
    require_steps(final_time, step, "dt_list entry");
    require_multiple(step, reference_dt(), "dt_list entry");
  }
}

namespace {

using boost::property_tree::ptree;

double to_double(const std::string& key, const std::string& text) {
  std::string t = boost::algorithm::trim_copy(text);
  // Accept powers of two written as 2^-10.
  if (boost::algorithm::starts_with(t, "2^")) {
    try {
      return std::ldexp(1.0, std::stoi(t.substr(2)));
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("key '{}': cannot parse '{}'", key, text));
    }
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("key '{}': cannot parse '{}' as a number", key, text));
  }
}

long long to_integer(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::trim_copy(text);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("key '{}': cannot parse '{}' as an integer", key, text));
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::trim_copy(text);
  try {
    std::size_t used = 0;
    if (!t.empty() && t.front() == '-') throw std::invalid_argument("negative");
    const unsigned long long v = std::stoull(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("key '{}': cannot parse '{}' as an unsigned integer", key, text));
  }
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::algorithm::is_any_of(","));
  std::vector<double> out;
  for (const auto& p : parts) {
    if (boost::algorithm::trim_copy(p).empty()) continue;
    out.push_back(to_double(key, p));
  }
  return out;
}

Eigen::Vector2d to_vec2(const std::string& key, const std::string& text) {
  const auto v = to_list(key, text);
  if (v.size() != 2) throw ConfigError(fmt::format("key '{}' expects two comma-separated values", key));
  return {v[0], v[1]};
}

BoundaryCondition to_bc(const std::string& text) {
  const std::string t = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(text));
  if (t == "neumann") return BoundaryCondition::kNeumann;
  if (t == "dirichlet") return BoundaryCondition::kDirichlet;
  throw ConfigError(fmt::format("unknown boundary condition '{}'", text));
}

void apply_model(ModelConfig& m, const std::string& key, const std::string& value) {
  if (key == "bc") m.bc = to_bc(value);
  else if (key == "gamma") m.gamma = to_double(key, value);
  else if (key == "a1_diffusion") m.a1_diffusion = to_double(key, value);
  else if (key == "a1_reaction") m.a1_reaction = to_double(key, value);
  else if (key == "a1_advection") m.a1_advection = to_vec2(key, value);
  else if (key == "a2_diffusion") m.a2_diffusion = to_double(key, value);
  else if (key == "a2_reaction") m.a2_reaction = to_double(key, value);
  else if (key == "a2_advection") m.a2_advection = to_vec2(key, value);
  else if (key == "nonlinearity") m.nonlinearity = boost::algorithm::trim_copy(value);
  else if (key == "lipschitz") m.lipschitz = to_double(key, value);
  else if (key == "initial_value") m.initial_value = to_double(key, value);
  else throw ConfigError(fmt::format("unknown key '{}' in [model]", key));
}

void apply_scheme(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "T") c.final_time = to_double(key, value);
  else if (key == "dt") c.dt = to_double(key, value);
  else if (key == "dt_ref") c.dt_ref = to_double(key, value);
  else if (key == "k") {
    if (boost::algorithm::trim_copy(value) == "auto") c.k.reset();
    else c.k = to_double(key, value);
  } else if (key == "c0") c.c0 = to_double(key, value);
  else if (key == "tol") c.tol = to_double(key, value);
  else throw ConfigError(fmt::format("unknown key '{}' in [scheme]", key));
}

int to_int(const std::string& key, const std::string& value) {
  const long long v = to_integer(key, value);
  if (v < -1000000000LL || v > 1000000000LL) throw ConfigError(fmt::format("key '{}' out of range", key));
  return static_cast<int>(v);
}

void apply_experiment(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "level_min") c.level_min = to_int(key, value);
  else if (key == "level_max") c.level_max = to_int(key, value);
  else if (key == "level_ref") c.level_ref = to_int(key, value);
  else if (key == "time_level") c.time_level = to_int(key, value);
  else if (key == "dt_list") c.dt_list = to_list(key, value);
  else if (key == "replicates") c.replicates = to_int(key, value);
  else if (key == "seed") c.seed = to_u64(key, value);
  else if (key == "output") c.output = boost::algorithm::trim_copy(value);
  else if (key == "threads") c.threads = to_int(key, value);
  else throw ConfigError(fmt::format("unknown key '{}' in [experiment]", key));
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("config parse error: {}", e.what()));
  }
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) {
      throw ConfigError(fmt::format("key '{}' outside of a section", section));
    }
    if (section != "model" && section != "scheme" && section != "experiment") {
      throw ConfigError(fmt::format("unknown section [{}]", section));
    }
    for (const auto& [key, node] : body) {
      const std::string value = node.get_value<std::string>();
      if (section == "model") apply_model(c.model, key, value);
      else if (section == "scheme") apply_scheme(c, key, value);
      else apply_experiment(c, key, value);
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  return parse_config(in);
}

}  // namespace nsfem
