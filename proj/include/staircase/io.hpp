#pragma once

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "staircase/analysis.hpp"
#include "staircase/circle_map.hpp"
#include "staircase/config.hpp"
#include "staircase/firing.hpp"
#include "staircase/graph.hpp"
#include "staircase/graphon.hpp"
#include "staircase/lab.hpp"
#include "staircase/rational.hpp"

namespace staircase {

using Json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
  ParseError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what) {}
};

// --- graph text format: first line "n", then "u v [mult]" with 0-based ids ---

inline FiniteGraph read_graph(std::istream& in, const std::string& name = "<graph>") {
  std::string line;
  long long lineno = 0;
  auto next_line = [&]() -> std::optional<std::string> {
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream probe(line);
      std::string tok;
      if (probe >> tok) return line;
    }
    return std::nullopt;
  };
  auto where = [&] { return name + ":" + std::to_string(lineno); };

  auto first = next_line();
  if (!first) throw ParseError(name, "empty graph file");
  long long n;
  {
    std::istringstream ss(*first);
    if (!(ss >> n) || n <= 0) throw ParseError(where(), "expected positive vertex count");
    std::string extra;
    if (ss >> extra) throw ParseError(where(), "unexpected token after vertex count");
  }
  std::vector<FiniteGraph::Edge> edges;
  while (auto l = next_line()) {
    std::istringstream ss(*l);
    long long u, v, mult = 1;
    if (!(ss >> u >> v)) throw ParseError(where(), "expected 'u v [mult]'");
    if (!(ss >> mult)) mult = 1;
    std::string extra;
    if (ss >> extra) throw ParseError(where(), "unexpected token after edge");
    if (u < 0 || u >= n || v < 0 || v >= n) throw ParseError(where(), "vertex out of range");
    if (u == v) throw ParseError(where(), "self-loop not allowed");
    if (mult < 0) throw ParseError(where(), "negative multiplicity");
    edges.push_back({static_cast<int>(u), static_cast<int>(v), mult});
  }
  try {
    return FiniteGraph(static_cast<int>(n), edges);
  } catch (const std::exception& e) {
    throw ParseError(name, e.what());
  }
}

inline FiniteGraph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  return read_graph(in, path);
}

// --- graphon JSON: {"measures": [...], "kernel": [[...]]}, rationals as
//     "num/den" or decimal strings ---

inline Rational json_rational(const Json& j, const std::string& where) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(static_cast<long>(j.get<long long>()));
  } catch (const std::exception& e) {
    throw ParseError(where, e.what());
  }
  // floating JSON numbers are rejected: "0.1" the string parses exactly,
  // 0.1 the double does not
  throw ParseError(where, "expected a rational encoded as a string like \"1/3\" or \"0.25\"");
}

inline StepGraphon read_graphon(const Json& j, const std::string& name = "<graphon>") {
  if (!j.is_object() || !j.contains("measures") || !j.contains("kernel"))
    throw ParseError(name, "expected object with 'measures' and 'kernel'");
  std::vector<Rational> measures;
  for (std::size_t i = 0; i < j["measures"].size(); ++i)
    measures.push_back(json_rational(j["measures"][i], name + ".measures[" + std::to_string(i) + "]"));
  std::vector<std::vector<Rational>> kernel;
  if (!j["kernel"].is_array()) throw ParseError(name + ".kernel", "expected an array of rows");
  for (std::size_t r = 0; r < j["kernel"].size(); ++r) {
    const auto& row = j["kernel"][r];
    const std::string rw = name + ".kernel[" + std::to_string(r) + "]";
    if (!row.is_array()) throw ParseError(rw, "expected a row array");
    std::vector<Rational> out;
    for (std::size_t c = 0; c < row.size(); ++c)
      out.push_back(json_rational(row[c], rw + "[" + std::to_string(c) + "]"));
    kernel.push_back(std::move(out));
  }
  try {
    return StepGraphon(std::move(measures), std::move(kernel));
  } catch (const std::exception& e) {
    throw ParseError(name, e.what());
  }
}

inline Json graphon_json(const StepGraphon& w) {
  Json j;
  j["measures"] = Json::array();
  for (int i = 0; i < w.parts(); ++i) j["measures"].push_back(format_rational(w.measure(i)));
  j["kernel"] = Json::array();
  for (int i = 0; i < w.parts(); ++i) {
    Json row = Json::array();
    for (int c = 0; c < w.parts(); ++c) row.push_back(format_rational(w.kernel(i, c)));
    j["kernel"].push_back(row);
  }
  return j;
}

inline StepGraphon read_graphon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(path, e.what());
  }
  return read_graphon(j, path);
}

// --- chip config JSON: {"context": "graph"|"graphon", "values": [...]} ---

inline ChipConfig read_config(const Json& j, const std::string& name = "<config>") {
  if (!j.is_object() || !j.contains("context") || !j.contains("values"))
    throw ParseError(name, "expected object with 'context' and 'values'");
  const std::string ctx = j["context"].get<std::string>();
  Context c;
  if (ctx == "graph")
    c = Context::graph;
  else if (ctx == "graphon")
    c = Context::graphon;
  else
    throw ParseError(name + ".context", "expected 'graph' or 'graphon'");
  std::vector<Rational> vals;
  for (std::size_t i = 0; i < j["values"].size(); ++i)
    vals.push_back(json_rational(j["values"][i], name + ".values[" + std::to_string(i) + "]"));
  try {
    return ChipConfig(c, std::move(vals));
  } catch (const std::exception& e) {
    throw ParseError(name, e.what());
  }
}

inline ChipConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError(path, e.what());
  }
  return read_config(j, path);
}

inline Json config_json(const ChipConfig& c) {
  Json j;
  j["context"] = c.context() == Context::graph ? "graph" : "graphon";
  j["values"] = Json::array();
  for (const auto& v : c.values()) j["values"].push_back(format_rational(v));
  return j;
}

// --- result serializers ---

inline Json activity_json(const ActivityEstimate& e) {
  Json j;
  if (e.kind == ActivityEstimate::Kind::exact) {
    j["kind"] = "exact";
    if (e.uniform) j["value"] = format_rational(e.value);
    j["period"] = e.period;
    j["transient"] = e.transient;
    if (!e.uniform) {
      j["uniform"] = false;
      j["components"] = Json::array();
      for (const auto& v : e.component_values) j["components"].push_back(format_rational(v));
      j["lower"] = format_rational(e.lower);
      j["upper"] = format_rational(e.upper);
    }
  } else {
    j["kind"] = "interval";
    j["lower"] = format_rational(e.lower);
    j["upper"] = format_rational(e.upper);
  }
  j["steps_used"] = e.steps_used;
  return j;
}

inline Json rotation_json(const RotationInterval& r) {
  Json j;
  j["lower"] = format_rational(r.lower);
  j["upper"] = format_rational(r.upper);
  j["n"] = r.iterations;
  j["x0"] = format_rational(r.x0);
  return j;
}

inline Json cutdist_json(const CutDistanceResult& r) {
  Json j;
  j["lower"] = format_rational(r.lower);
  j["upper"] = format_rational(r.upper);
  j["exact"] = r.exact;
  auto intervals = [&](const std::vector<int>& parts) {
    Json arr = Json::array();
    for (int p : parts) {
      Json iv = Json::array();
      iv.push_back(format_rational(r.refined_cuts.at(p)));
      iv.push_back(format_rational(r.refined_cuts.at(p + 1)));
      arr.push_back(iv);
    }
    return arr;
  };
  j["witness_S"] = intervals(r.witness_S);
  j["witness_T"] = intervals(r.witness_T);
  return j;
}

/// Trace CSV: step, part, config_value, odometer.
template <class Model>
void write_trace_csv(std::ostream& os, const Model& model, const ChipConfig& sigma,
                     long long steps) {
  os << "step,part,config_value,odometer\n";
  Simulator sim(model, sigma);
  for (long long s = 0; s <= steps; ++s) {
    ChipConfig cfg = sim.config();
    auto odo = sim.odometer();
    for (int i = 0; i < cfg.size(); ++i)
      os << s << "," << i << "," << format_rational(cfg.value(i)) << ","
         << odo[i].get_str() << "\n";
    if (s < steps) sim.advance();
  }
}

/// Sweep CSV: parameter, kind, value_or_lower, upper, period, smoothness_hits.
inline void write_sweep_csv(std::ostream& os, const std::vector<DiagramSample>& samples,
                            const std::string& config_comment = "") {
  if (!config_comment.empty()) os << "# config " << config_comment << "\n";
  os << "parameter,kind,value_or_lower,upper,period,smoothness_hits\n";
  for (const auto& s : samples) {
    const auto& e = s.estimate;
    const bool exact = e.kind == ActivityEstimate::Kind::exact && e.uniform;
    os << format_rational(s.parameter) << "," << (exact ? "exact" : "interval") << ","
       << format_rational(exact ? e.value : e.lower) << ","
       << format_rational(exact ? e.value : e.upper) << "," << (exact ? e.period : 0) << ","
       << s.smoothness_hits << "\n";
  }
}

inline void write_geometric_csv(std::ostream& os, const GeometricSweepResult& res,
                                const std::string& config_comment = "") {
  if (!config_comment.empty()) os << "# config " << config_comment << "\n";
  os << "mu,kind,value_or_lower,upper,ref_lower,ref_upper,usable\n";
  for (const auto& s : res.samples) {
    const auto& e = s.estimate;
    const bool exact = e.kind == ActivityEstimate::Kind::exact && e.uniform;
    os << format_rational(s.mu) << "," << (exact ? "exact" : "interval") << ","
       << format_rational(exact ? e.value : e.lower) << ","
       << format_rational(exact ? e.value : e.upper) << ","
       << format_rational(s.reference.lower) << "," << format_rational(s.reference.upper)
       << "," << (s.usable ? 1 : 0) << "\n";
  }
}

/// Mixing CSV: n, max_tv. Bipartite carriers report the two-step per-side
/// chain, which is the convergent object there.
inline void write_mixing_csv(std::ostream& os, const MixingReport& rep,
                             const std::string& config_comment = "") {
  if (!config_comment.empty()) os << "# config " << config_comment << "\n";
  if (rep.bipartite) os << "# bipartite: rows are the two-step per-side chain\n";
  os << "n,max_tv\n";
  const auto& rows = rep.bipartite ? rep.side_rows : rep.rows;
  for (const auto& r : rows) os << r.step << "," << format_rational(r.tv) << "\n";
}

inline void write_counterexample_csv(std::ostream& os, const CounterexampleResult& res,
                                     const std::string& config_comment = "") {
  if (!config_comment.empty()) os << "# config " << config_comment << "\n";
  os << "n,u_n,ratio\n";
  for (std::size_t n = 0; n < res.odometer.size(); ++n) {
    os << n << "," << res.odometer[n] << ",";
    if (n == 0)
      os << "0";
    else
      os << format_rational(make_rational(res.odometer[n], static_cast<long long>(n)));
    os << "\n";
  }
}

inline void write_map_csv(std::ostream& os, const CircleLift& f, int grid,
                          const std::string& config_comment = "") {
  if (!config_comment.empty()) os << "# config " << config_comment << "\n";
  os << "x,f\n";
  char buf[64];
  for (const auto& [x, v] : f.sample(grid)) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", x, v);
    os << buf << "\n";
  }
}

}  // namespace staircase
