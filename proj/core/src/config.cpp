#include "pathclosure/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace pathclosure::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size() && std::isfinite(out);
  } catch (...) {
    return false;
  }
}

bool parse_int(const std::string& s, int& out) {
  const auto end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  const auto end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

using Setter = std::function<std::string(RunConfig&, const std::string&)>;

std::string ok() { return ""; }

Setter double_key(double RunConfig::* field,
                  const std::function<bool(double)>& valid,
                  const std::string& range_text) {
  return [field, valid, range_text](RunConfig& c, const std::string& v) {
    double d;
    if (!parse_double(v, d)) return std::string("expected a number, got '" + v + "'");
    if (!valid(d)) return std::string("value " + v + " violates " + range_text);
    c.*field = d;
    return ok();
  };
}

Setter int_key(int RunConfig::* field, const std::function<bool(int)>& valid,
               const std::string& range_text) {
  return [field, valid, range_text](RunConfig& c, const std::string& v) {
    int i;
    if (!parse_int(v, i)) return std::string("expected an integer, got '" + v + "'");
    if (!valid(i)) return std::string("value " + v + " violates " + range_text);
    c.*field = i;
    return ok();
  };
}

Setter dvec_key(std::vector<double> RunConfig::* field) {
  return [field](RunConfig& c, const std::string& v) {
    std::vector<double> vals;
    for (const auto& tok : split_values(v)) {
      double d;
      if (!parse_double(tok, d)) {
        return std::string("expected numbers, got '" + tok + "'");
      }
      vals.push_back(d);
    }
    if (vals.empty()) return std::string("expected at least one number");
    c.*field = vals;
    return ok();
  };
}

Setter ivec_key(std::vector<int> RunConfig::* field, int min_value) {
  return [field, min_value](RunConfig& c, const std::string& v) {
    std::vector<int> vals;
    for (const auto& tok : split_values(v)) {
      int i;
      if (!parse_int(tok, i)) {
        return std::string("expected integers, got '" + tok + "'");
      }
      if (i < min_value) {
        return std::string("value " + tok + " below minimum " +
                           std::to_string(min_value));
      }
      vals.push_back(i);
    }
    if (vals.empty()) return std::string("expected at least one integer");
    c.*field = vals;
    return ok();
  };
}

Setter enum_key(std::string RunConfig::* field,
                const std::vector<std::string>& allowed) {
  return [field, allowed](RunConfig& c, const std::string& v) {
    for (const auto& a : allowed) {
      if (v == a) {
        c.*field = v;
        return ok();
      }
    }
    std::string opts;
    for (const auto& a : allowed) opts += (opts.empty() ? "" : " | ") + a;
    return std::string("expected one of [" + opts + "], got '" + v + "'");
  };
}

Setter bool_key(bool RunConfig::* field) {
  return [field](RunConfig& c, const std::string& v) {
    if (v == "true" || v == "1") {
      c.*field = true;
      return ok();
    }
    if (v == "false" || v == "0") {
      c.*field = false;
      return ok();
    }
    return std::string("expected true/false, got '" + v + "'");
  };
}

const std::map<std::string, std::map<std::string, Setter>>& key_table() {
  auto positive = [](double d) { return d > 0.0; };
  auto non_negative = [](double d) { return d >= 0.0; };
  auto any_d = [](double) { return true; };
  static const std::map<std::string, std::map<std::string, Setter>> table = {
      {"model",
       {
           {"type", enum_key(&RunConfig::model_type,
                             {"harmonic", "free", "oscillator", "tbh"})},
           {"trunc", int_key(&RunConfig::tbh_trunc, [](int i) { return i >= 1 && i <= 16; },
                             "1 <= trunc <= 16")},
           {"k_res", int_key(&RunConfig::tbh_k_res, [](int i) { return i >= 1; },
                             "k_res >= 1")},
           {"beta", double_key(&RunConfig::beta, positive, "beta > 0")},
           {"kappa", double_key(&RunConfig::kappa, positive, "kappa > 0")},
       }},
      {"provider",
       {
           {"type", enum_key(&RunConfig::provider_type,
                             {"closed_form", "monte_carlo", "tabulated"})},
           {"count", int_key(&RunConfig::mc_count, [](int i) { return i >= 100; },
                             "count >= 100")},
           {"batches", int_key(&RunConfig::mc_batches, [](int i) { return i >= 2; },
                               "batches >= 2")},
           {"table_lo", dvec_key(&RunConfig::table_lo)},
           {"table_hi", dvec_key(&RunConfig::table_hi)},
           {"table_points", ivec_key(&RunConfig::table_points, 16)},
       }},
      {"lagrangian",
       {
           {"delta_t", double_key(&RunConfig::delta_t, positive, "delta_t > 0")},
           {"w_rev", double_key(&RunConfig::w_rev, non_negative, "w_rev >= 0")},
       }},
      {"grid",
       {
           {"lo", dvec_key(&RunConfig::grid_lo)},
           {"hi", dvec_key(&RunConfig::grid_hi)},
           {"points", ivec_key(&RunConfig::grid_points, 16)},
       }},
      {"run",
       {
           {"seed",
            [](RunConfig& c, const std::string& v) {
              std::uint64_t u;
              if (!parse_u64(v, u)) {
                return std::string("expected a non-negative integer, got '" + v +
                                   "'");
              }
              c.seed = u;
              return ok();
            }},
           {"T", double_key(&RunConfig::horizon_t, positive, "T > 0")},
           {"u0", double_key(&RunConfig::u0, any_d, "")},
           {"t_restart",
            double_key(&RunConfig::t_restart, positive, "t_restart > 0")},
           {"horizon", double_key(&RunConfig::horizon, positive, "horizon > 0")},
           {"n_nodes", int_key(&RunConfig::n_nodes, [](int i) { return i >= 8; },
                               "n_nodes >= 8")},
           {"n_sub", int_key(&RunConfig::n_sub, [](int i) { return i >= 1; },
                             "n_sub >= 1")},
           {"steps", int_key(&RunConfig::steps, [](int i) { return i >= 0; },
                             "steps >= 0")},
           {"tol", double_key(&RunConfig::tol, positive, "tol > 0")},
           {"max_iter", int_key(&RunConfig::max_iter, [](int i) { return i >= 1; },
                                "max_iter >= 1")},
           {"dt_pde", double_key(&RunConfig::dt_pde, non_negative, "dt_pde >= 0")},
           {"trials", int_key(&RunConfig::trials, [](int i) { return i >= 10; },
                              "trials >= 10")},
           {"confinement_factor",
            double_key(&RunConfig::confinement_factor, positive,
                       "confinement_factor > 0")},
           {"identity_count",
            int_key(&RunConfig::identity_count, [](int i) { return i >= 10000; },
                    "identity_count >= 10000")},
           {"ode_dt", double_key(&RunConfig::ode_dt, positive, "ode_dt > 0")},
           {"spectrum", bool_key(&RunConfig::spectrum)},
           {"lambda0", dvec_key(&RunConfig::lambda0)},
           {"lambda_target", dvec_key(&RunConfig::lambda_target)},
           {"endpoint_lo", dvec_key(&RunConfig::endpoint_lo)},
           {"endpoint_hi", dvec_key(&RunConfig::endpoint_hi)},
           {"endpoint_points", ivec_key(&RunConfig::endpoint_points, 4)},
           {"weight_times", dvec_key(&RunConfig::weight_times)},
       }},
  };
  return table;
}

}  // namespace

ParseResult parse_config(const std::string& text) {
  ParseResult result;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::string section;
  bool section_known = false;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        result.errors.push_back({line_no, "malformed section header '" + line + "'"});
        section_known = false;
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      section_known = key_table().count(section) > 0;
      if (!section_known) {
        result.errors.push_back({line_no, "unknown section [" + section + "]"});
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      result.errors.push_back({line_no, "expected 'key = value', got '" + line + "'"});
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      result.errors.push_back({line_no, "key '" + key + "' outside any section"});
      continue;
    }
    if (!section_known) continue;  // already reported the section

    const auto& keys = key_table().at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) {
      result.errors.push_back(
          {line_no, "unknown key '" + key + "' in section [" + section + "]"});
      continue;
    }
    const std::string err = it->second(result.config, value);
    if (!err.empty()) {
      result.errors.push_back({line_no, "key '" + key + "': " + err});
    }
  }
  return result;
}

}  // namespace pathclosure::config
