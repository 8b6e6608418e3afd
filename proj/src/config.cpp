#include "lbr/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "lbr/errors.hpp"

namespace lbr {
namespace {

using nlohmann::json;

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }

const json& require_object(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr.empty() ? "/" : ptr, "expected an object");
  return j;
}

void reject_unknown(const json& obj, const std::string& ptr, std::initializer_list<const char*> known) {
  for (const auto& item : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return item.key() == k; }))
      throw ConfigError(child(ptr, item.key()), "unknown field");
  }
}

double number(const json& obj, const std::string& key, const std::string& ptr, std::optional<double> fallback) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(child(ptr, key), "required field is missing");
  }
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(child(ptr, key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(child(ptr, key), "expected a finite number");
  return x;
}

std::uint64_t count(const json& obj, const std::string& key, const std::string& ptr, std::uint64_t fallback,
                    std::uint64_t min_value) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ConfigError(child(ptr, key), "expected a nonnegative integer");
  const auto x = v.get<std::uint64_t>();
  if (x < min_value) throw ConfigError(child(ptr, key), "must be at least " + std::to_string(min_value));
  return x;
}

std::vector<double> number_list(const json& obj, const std::string& key, const std::string& ptr,
                                std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError(child(ptr, key), "expected a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(child(child(ptr, key), std::to_string(i)), "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

void check_times(const std::vector<double>& times, double horizon, const std::string& ptr, bool sorted) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    const std::string at = child(ptr, std::to_string(i));
    if (!(times[i] >= 0.0 && times[i] <= horizon))
      throw ConfigError(at, "time must lie in [0, horizon] = [0, " + std::to_string(horizon) + "]");
    if (sorted && i > 0 && !(times[i] > times[i - 1])) throw ConfigError(at, "times must be strictly increasing");
  }
}

JumpDist parse_jump(const json& j, const std::string& ptr) {
  require_object(j, ptr);
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError(child(ptr, "kind"), "expected a string");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    reject_unknown(j, ptr, {"kind", "c"});
    return ConstantJump{number(j, "c", ptr, std::nullopt)};
  }
  if (kind == "normal") {
    reject_unknown(j, ptr, {"kind", "mean", "sd"});
    const double sd = number(j, "sd", ptr, std::nullopt);
    if (!(sd >= 0.0)) throw ConfigError(child(ptr, "sd"), "must be >= 0");
    return NormalJump{number(j, "mean", ptr, std::nullopt), sd};
  }
  if (kind == "two_point") {
    reject_unknown(j, ptr, {"kind", "a", "b", "p"});
    const double p = number(j, "p", ptr, std::nullopt);
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(child(ptr, "p"), "must lie in [0, 1]");
    return TwoPointJump{number(j, "a", ptr, std::nullopt), number(j, "b", ptr, std::nullopt), p};
  }
  throw ConfigError(child(ptr, "kind"), "unknown jump law '" + kind + "' (constant | normal | two_point)");
}

json jump_to_json(const JumpDist& dist) {
  return std::visit(
      [](const auto& d) -> json {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantJump>) return {{"kind", "constant"}, {"c", d.c}};
        if constexpr (std::is_same_v<T, NormalJump>) return {{"kind", "normal"}, {"mean", d.mean}, {"sd", d.sd}};
        if constexpr (std::is_same_v<T, TwoPointJump>)
          return {{"kind", "two_point"}, {"a", d.a}, {"b", d.b}, {"p", d.p}};
      },
      dist);
}

const std::set<std::string> suite_names{"marginal", "stationarity", "poisson-counts", "clock-identity"};

SuiteConfig parse_suite(const json& j, const std::string& ptr, double horizon) {
  require_object(j, ptr);
  reject_unknown(j, ptr,
                 {"name", "N", "significance", "permutations", "times", "lags", "level_offset", "clock_step",
                  "pilot"});
  SuiteConfig s;
  if (!j.contains("name") || !j.at("name").is_string())
    throw ConfigError(child(ptr, "name"), "expected a suite name");
  s.name = j.at("name").get<std::string>();
  if (!suite_names.count(s.name))
    throw ConfigError(child(ptr, "name"),
                      "unknown suite '" + s.name + "' (marginal | stationarity | poisson-counts | clock-identity)");
  if (s.name == "stationarity") s.replicates = 5000;
  if (s.name == "clock-identity") s.replicates = 1000;
  s.replicates = count(j, "N", ptr, s.replicates, 1);
  s.significance = number(j, "significance", ptr, s.significance);
  if (!(s.significance > 0.0 && s.significance < 1.0))
    throw ConfigError(child(ptr, "significance"), "must lie in (0, 1)");
  s.permutations = count(j, "permutations", ptr, s.permutations, 1);
  s.times = number_list(j, "times", ptr, s.times);
  s.lags = number_list(j, "lags", ptr, s.lags);
  s.level_offset = number(j, "level_offset", ptr, s.level_offset);
  s.clock_step = number(j, "clock_step", ptr, s.clock_step);
  if (!(s.clock_step > 0.0)) throw ConfigError(child(ptr, "clock_step"), "must be > 0");
  s.pilot = count(j, "pilot", ptr, s.pilot, 1);
  if (s.name == "stationarity") {
    check_times(s.times, horizon, child(ptr, "times"), true);
    for (std::size_t i = 0; i < s.lags.size(); ++i) {
      if (!(s.lags[i] > 0.0)) throw ConfigError(child(child(ptr, "lags"), std::to_string(i)), "lag must be > 0");
      if (s.times.back() + s.lags[i] > horizon)
        throw ConfigError(child(child(ptr, "lags"), std::to_string(i)), "last time plus lag exceeds the horizon");
    }
  }
  return s;
}

json suite_to_json(const SuiteConfig& s) {
  json j{{"name", s.name}, {"N", s.replicates}, {"significance", s.significance}};
  if (s.name == "stationarity") {
    j["permutations"] = s.permutations;
    j["times"] = s.times;
    j["lags"] = s.lags;
  } else if (s.name == "poisson-counts") {
    j["level_offset"] = s.level_offset;
    j["pilot"] = s.pilot;
  } else if (s.name == "clock-identity") {
    j["clock_step"] = s.clock_step;
  }
  return j;
}

std::string syntax_location(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(syntax_location(text, e.byte), "malformed JSON");
  }
  require_object(root, "");
  reject_unknown(root, "",
                 {"seed", "parallelism", "levy", "mass_function", "grid", "ppp", "exceedance", "replicates", "suites",
                  "mda"});
  ExperimentConfig c;

  if (root.contains("seed")) {
    const json& s = root.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
      throw ConfigError("/seed", "expected a 64-bit unsigned integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (root.contains("parallelism")) {
    const json& p = root.at("parallelism");
    if (p.is_string() && p.get<std::string>() == "auto") {
      c.parallelism = 0;
    } else if (p.is_number_integer() && p.get<std::int64_t>() >= 1 && p.get<std::int64_t>() <= 1024) {
      c.parallelism = static_cast<int>(p.get<std::int64_t>());
    } else {
      throw ConfigError("/parallelism", "expected \"auto\" or an integer in [1, 1024]");
    }
  }

  if (!root.contains("levy")) throw ConfigError("/levy", "required field is missing");
  {
    const json& l = require_object(root.at("levy"), "/levy");
    reject_unknown(l, "/levy", {"sigma", "jump_rate", "jump_dist", "drift_override"});
    const double sigma = number(l, "sigma", "/levy", 0.0);
    const double rate = number(l, "jump_rate", "/levy", 0.0);
    if (!(sigma >= 0.0)) throw ConfigError("/levy/sigma", "must be >= 0");
    if (!(rate >= 0.0)) throw ConfigError("/levy/jump_rate", "must be >= 0");
    JumpDist dist = ConstantJump{};
    if (l.contains("jump_dist")) dist = parse_jump(l.at("jump_dist"), "/levy/jump_dist");
    try {
      c.levy = make_levy_spec(sigma, rate, dist);
    } catch (const Error& e) {
      throw ConfigError("/levy", e.what());
    }
    if (l.contains("drift_override") && !l.at("drift_override").is_null())
      c.levy = c.levy.with_drift(number(l, "drift_override", "/levy", std::nullopt));
  }

  if (root.contains("mass_function")) {
    const json& m = require_object(root.at("mass_function"), "/mass_function");
    if (!m.contains("kind") || !m.at("kind").is_string())
      throw ConfigError("/mass_function/kind", "expected a string");
    const auto kind = m.at("kind").get<std::string>();
    try {
      if (kind == "constant") {
        reject_unknown(m, "/mass_function", {"kind", "c"});
        c.alpha = MassFunction::constant(number(m, "c", "/mass_function", 1.0));
      } else if (kind == "logistic_bump") {
        reject_unknown(m, "/mass_function", {"kind", "a"});
        c.alpha = MassFunction::logistic_bump(number(m, "a", "/mass_function", std::nullopt));
      } else {
        throw ConfigError("/mass_function/kind", "unknown kind '" + kind + "' (constant | logistic_bump)");
      }
    } catch (const InvalidArgument& e) {
      throw ConfigError("/mass_function", e.what());
    }
  }

  if (root.contains("grid")) {
    const json& g = require_object(root.at("grid"), "/grid");
    reject_unknown(g, "/grid", {"horizon", "base_step", "eval_times"});
    c.horizon = number(g, "horizon", "/grid", c.horizon);
    c.base_step = number(g, "base_step", "/grid", c.base_step);
    if (!(c.horizon > 0.0)) throw ConfigError("/grid/horizon", "must be > 0");
    if (!(c.base_step > 0.0)) throw ConfigError("/grid/base_step", "must be > 0");
    c.eval_times = number_list(g, "eval_times", "/grid", c.eval_times);
  }
  check_times(c.eval_times, c.horizon, "/grid/eval_times", true);

  if (root.contains("ppp")) {
    const json& p = require_object(root.at("ppp"), "/ppp");
    reject_unknown(p, "/ppp", {"floor", "max_points"});
    if (p.contains("floor")) {
      const json& f = p.at("floor");
      if (f.is_string() && f.get<std::string>() == "auto") {
        c.floor.reset();
      } else if (f.is_number()) {
        c.floor = f.get<double>();
      } else {
        throw ConfigError("/ppp/floor", "expected \"auto\" or a number");
      }
    } else {
      c.floor.reset();
    }
    c.max_points = count(p, "max_points", "/ppp", c.max_points, 1);
  }

  if (root.contains("exceedance")) {
    const json& e = require_object(root.at("exceedance"), "/exceedance");
    reject_unknown(e, "/exceedance", {"v", "paths"});
    if (e.contains("v")) {
      const json& v = e.at("v");
      if (v.is_string() && v.get<std::string>() == "auto") {
        c.exceedance_v.reset();
      } else if (v.is_number() && v.get<double>() > 0.0) {
        c.exceedance_v = v.get<double>();
      } else {
        throw ConfigError("/exceedance/v", "expected \"auto\" or a positive number");
      }
    }
    c.exceedance_paths = count(e, "paths", "/exceedance", c.exceedance_paths, 2);
  }

  c.replicates = count(root, "replicates", "", c.replicates, 1);

  if (root.contains("suites")) {
    const json& s = root.at("suites");
    if (!s.is_array()) throw ConfigError("/suites", "expected an array");
    for (std::size_t i = 0; i < s.size(); ++i) c.suites.push_back(parse_suite(s[i], "/suites/" + std::to_string(i), c.horizon));
  }

  if (root.contains("mda")) {
    const json& m = require_object(root.at("mda"), "/mda");
    reject_unknown(m, "/mda", {"ladder", "N", "permutations", "times", "significance", "route"});
    if (m.contains("ladder")) {
      const json& l = m.at("ladder");
      if (!l.is_array() || l.empty()) throw ConfigError("/mda/ladder", "expected a nonempty array of integers");
      c.mda.ladder.clear();
      for (std::size_t i = 0; i < l.size(); ++i) {
        if (!l[i].is_number_unsigned() || l[i].get<std::uint64_t>() < 1)
          throw ConfigError("/mda/ladder/" + std::to_string(i), "expected an integer >= 1");
        c.mda.ladder.push_back(l[i].get<std::size_t>());
      }
    }
    c.mda.replicates = count(m, "N", "/mda", c.mda.replicates, 1);
    c.mda.permutations = count(m, "permutations", "/mda", c.mda.permutations, 1);
    c.mda.times = number_list(m, "times", "/mda", c.mda.times);
    c.mda.significance = number(m, "significance", "/mda", c.mda.significance);
    if (!(c.mda.significance > 0.0 && c.mda.significance < 1.0))
      throw ConfigError("/mda/significance", "must lie in (0, 1)");
    if (m.contains("route")) {
      if (!m.at("route").is_string()) throw ConfigError("/mda/route", "expected a string");
      c.mda.route = m.at("route").get<std::string>();
      if (c.mda.route != "auto" && c.mda.route != "direct" && c.mda.route != "copies")
        throw ConfigError("/mda/route", "expected auto | direct | copies");
    }
  }

  if (root.contains("mda")) check_times(c.mda.times, c.horizon, "/mda/times", true);

  refresh_canonical(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void refresh_canonical(ExperimentConfig& c) {
  json levy{{"sigma", c.levy.sigma()}, {"jump_rate", c.levy.jump_rate()}, {"jump_dist", jump_to_json(c.levy.jump_dist())}};
  levy["drift_override"] = c.levy.normalized() ? json(nullptr) : json(c.levy.drift());
  json alpha = c.alpha.kind() == MassFunction::Kind::constant
                   ? json{{"kind", "constant"}, {"c", c.alpha.parameter()}}
                   : json{{"kind", "logistic_bump"}, {"a", c.alpha.parameter()}};
  json suites = json::array();
  for (const auto& s : c.suites) suites.push_back(suite_to_json(s));
  c.canonical = json{
      {"seed", c.seed},
      {"levy", levy},
      {"mass_function", alpha},
      {"grid", {{"horizon", c.horizon}, {"base_step", c.base_step}, {"eval_times", c.eval_times}}},
      {"ppp", {{"floor", c.floor ? json(*c.floor) : json("auto")}, {"max_points", c.max_points}}},
      {"exceedance", {{"v", c.exceedance_v ? json(*c.exceedance_v) : json("auto")}, {"paths", c.exceedance_paths}}},
      {"replicates", c.replicates},
      {"suites", suites},
      {"mda",
       {{"ladder", c.mda.ladder},
        {"N", c.mda.replicates},
        {"permutations", c.mda.permutations},
        {"times", c.mda.times},
        {"significance", c.mda.significance},
        {"route", c.mda.route}}},
  };
}

std::string config_hash(const ExperimentConfig& c) {
  const std::string text = c.canonical.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lbr
